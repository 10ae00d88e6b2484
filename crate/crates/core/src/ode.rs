//! Dormand–Prince 5(4) embedded Runge–Kutta stepping on fixed-size states.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError<E> {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error(transparent)]
    Rhs(E),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: 0.1,
            max_steps: 200_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// A single Dormand–Prince step of size `h`.
///
/// Returns the fifth-order solution and the embedded error estimate (difference to the
/// fourth-order solution).
pub fn dopri_step<const N: usize, E>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<([f64; N], [f64; N]), E> {
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for n in 0..N {
                    ys[n] += h * a * kj[n];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for s in 0..7 {
        for n in 0..N {
            y5[n] += h * B5[s] * k[s][n];
            err[n] += h * (B5[s] - B4[s]) * k[s][n];
        }
    }
    Ok((y5, err))
}

/// Scaled RMS norm of an error estimate.
pub fn error_norm<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    err: &[f64; N],
    rtol: f64,
    atol: f64,
) -> f64 {
    let mut sum = 0.0;
    for n in 0..N {
        let sc = atol + rtol * y0[n].abs().max(y1[n].abs());
        sum += (err[n] / sc).powi(2);
    }
    (sum / N as f64).sqrt()
}

/// Step-size factor from an error norm (order 5 controller with safety 0.9).
pub fn step_factor(norm: f64) -> f64 {
    if norm == 0.0 {
        5.0
    } else {
        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) with adaptive steps.
pub fn integrate<const N: usize, E>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &AdaptiveOptions,
) -> Result<[f64; N], OdeError<E>> {
    if t1 == t0 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(opts.h_max).min((t1 - t0).abs());
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-15 * (1.0 + t1.abs()) {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (y_new, err) = dopri_step(&mut f, t, &y, dir * step).map_err(OdeError::Rhs)?;
        let norm = error_norm(&y, &y_new, &err, opts.rtol, opts.atol);
        if norm <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
            t = if last { t1 } else { t + dir * step };
            y = y_new;
            if last {
                return Ok(y);
            }
            h = (step * step_factor(norm)).min(opts.h_max);
        } else {
            h = step
                * if norm.is_finite() {
                    step_factor(norm).min(0.9)
                } else {
                    0.2
                };
            if h < opts.h_min {
                return Err(OdeError::StepUnderflow { t });
            }
        }
    }
    Err(OdeError::TooManySteps { t })
}
