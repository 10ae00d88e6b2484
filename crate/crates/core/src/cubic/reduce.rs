//! Monic normalization and the differential Tschirnhausen transformation.
//!
//! A monic cubic `p³ + a p² + b p + c = 0` is brought to depressed form by the coordinate change
//! `x = x̃`, `y = f(x̃, ỹ)` with `3 f_x̃ + a(x̃, f) = 0`. Slopes transform as `p = f_x̃ + f_ỹ p̃`,
//! and the new coefficients are
//!
//! ```text
//! Ã = (b − a²/3) / f_ỹ²,    B̃ = (2a³/27 − ab/3 + c) / f_ỹ³,
//! ```
//!
//! evaluated at `(x̃, f(x̃, ỹ))`. To obtain 2-jets of `Ã`, `B̃` in `(x̃, ỹ)` the integrator carries
//! `f_ỹ`, `f_ỹỹ` and `f_ỹỹỹ` through the variational equations; the last one needs `a_yyy`,
//! which is taken from a third-order line jet of `a` in `y`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DomainError, Jet2, Line3};
use crate::ode::{integrate, AdaptiveOptions, OdeError};
use crate::web::{CoefficientField, DomainBox, GeneralCubic, GridSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonicizeError {
    #[error("leading coefficient K3 = {k3:e} vanishes at ({x}, {y})")]
    LeadingCoefficientVanishes { x: f64, y: f64, k3: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

fn leading_vanishes(k: &[f64; 4]) -> bool {
    k[0].abs() < 1e-12 * (k[1].abs() + k[2].abs() + k[3].abs() + 1.0)
}

/// `(K2/K3, K1/K3, K0/K3)` at `(x, y)`.
pub fn monicize(w: &GeneralCubic, x: f64, y: f64) -> Result<(f64, f64, f64), MonicizeError> {
    let k = w.coefficients(x, y)?;
    if leading_vanishes(&k) {
        return Err(MonicizeError::LeadingCoefficientVanishes { x, y, k3: k[0] });
    }
    Ok((k[1] / k[0], k[2] / k[0], k[3] / k[0]))
}

/// 2-jets of the monic coefficients `(a, b, c)` at `(x, y)`.
pub fn monic_jets(w: &GeneralCubic, x: f64, y: f64) -> Result<[Jet2; 3], MonicizeError> {
    let k = w.jets(x, y)?;
    if leading_vanishes(&k.map(|j| j.v)) {
        return Err(MonicizeError::LeadingCoefficientVanishes { x, y, k3: k[0].v });
    }
    Ok([k[1] / k[0], k[2] / k[0], k[3] / k[0]])
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error("base abscissa x0 = {x0} lies outside the grid box")]
    BaseOutsideBox { x0: f64 },
    #[error("row ỹ = {y_tilde}: {source}")]
    Monicize { y_tilde: f64, source: MonicizeError },
    #[error("row ỹ = {y_tilde}: integration failed: {message}")]
    Integration { y_tilde: f64, message: String },
    #[error("row ỹ = {y_tilde}: f = {f} leaves the domain box at x̃ = {x}")]
    LeavesBox { y_tilde: f64, x: f64, f: f64 },
    #[error("row ỹ = {y_tilde}: f_ỹ = {f_y:e} degenerates at x̃ = {x}")]
    DegenerateMap { y_tilde: f64, x: f64, f_y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReduceOptions {
    pub ode: AdaptiveOptions,
    /// Reject the chart once `f_ỹ` falls below this value.
    pub min_f_y: f64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            ode: AdaptiveOptions {
                rtol: 1e-10,
                atol: 1e-10,
                h_init: 1e-3,
                h_min: 1e-12,
                h_max: 0.05,
                max_steps: 100_000,
            },
            min_f_y: 1e-8,
        }
    }
}

/// One node of a reduced web on the `(x̃, ỹ)` grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedNode {
    pub x: f64,
    pub y: f64,
    /// 2-jet of `Ã` in `(x̃, ỹ)`.
    pub a: Jet2,
    /// 2-jet of `B̃` in `(x̃, ỹ)`.
    pub b: Jet2,
    pub f: f64,
    pub f_x: f64,
    pub f_y: f64,
}

/// Depressed web sampled on a grid in the reduced chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledWeb {
    pub grid: GridSpec,
    pub x0: f64,
    /// Row-major (`ỹ` outer).
    pub nodes: Vec<ReducedNode>,
}

impl SampledWeb {
    pub fn node(&self, i: usize, j: usize) -> &ReducedNode {
        &self.nodes[j * self.grid.nx + i]
    }

    /// Writes `x, y, A, B, f, f_y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "A", "B", "f", "f_y"])?;
        for n in &self.nodes {
            w.write_record([n.x, n.y, n.a.v, n.b.v, n.f, n.f_y].map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Maps a slope `p̃` of the reduced web back to the original chart.
pub fn transport_slope(node: &ReducedNode, p_tilde: f64) -> f64 {
    node.f_x + node.f_y * p_tilde
}

/// State: `[f, f_ỹ, f_ỹỹ, f_ỹỹỹ]`.
fn rhs(w: &GeneralCubic, x: f64, s: &[f64; 4]) -> Result<[f64; 4], MonicizeError> {
    let k3 = w.k3.eval_line_y(x, s[0])?;
    let k2 = w.k2.eval_line_y(x, s[0])?;
    let others = [w.k1.eval(x, s[0])?, w.k0.eval(x, s[0])?];
    if leading_vanishes(&[k3.d[0], k2.d[0], others[0], others[1]]) {
        return Err(MonicizeError::LeadingCoefficientVanishes {
            x,
            y: s[0],
            k3: k3.d[0],
        });
    }
    let a: Line3 = k2 / k3;
    let [a0, a1, a2, a3] = a.d;
    let (g1, g2, g3) = (s[1], s[2], s[3]);
    Ok([
        -a0 / 3.0,
        -a1 * g1 / 3.0,
        -(a2 * g1 * g1 + a1 * g2) / 3.0,
        -(a3 * g1 * g1 * g1 + 3.0 * a2 * g1 * g2 + a1 * g3) / 3.0,
    ])
}

fn node_at(
    w: &GeneralCubic,
    x: f64,
    y_tilde: f64,
    s: &[f64; 4],
) -> Result<ReducedNode, MonicizeError> {
    let [a, b, c] = monic_jets(w, x, s[0])?;
    let p = b - a * a * (1.0 / 3.0);
    let q = a * a * a * (2.0 / 27.0) - a * b * (1.0 / 3.0) + c;
    let (f, g1, g2, g3) = (s[0], s[1], s[2], s[3]);
    let fx = -a.v / 3.0;
    let fxy = -a.vy * g1 / 3.0;
    let f_jet = Jet2 {
        v: f,
        vx: fx,
        vy: g1,
        vxx: -(a.vx + a.vy * fx) / 3.0,
        vxy: fxy,
        vyy: g2,
    };
    let s_jet = Jet2 {
        v: g1,
        vx: fxy,
        vy: g2,
        vxx: -(a.vxy * g1 + a.vyy * g1 * fx + a.vy * fxy) / 3.0,
        vxy: -(a.vyy * g1 * g1 + a.vy * g2) / 3.0,
        vyy: g3,
    };
    Ok(ReducedNode {
        x,
        y: y_tilde,
        a: p.compose_vertical(&f_jet) * s_jet.powi(-2),
        b: q.compose_vertical(&f_jet) * s_jet.powi(-3),
        f,
        f_x: fx,
        f_y: g1,
    })
}

fn reduce_row(
    w: &GeneralCubic,
    domain: &DomainBox,
    x0: f64,
    grid: &GridSpec,
    j: usize,
    opts: &ReduceOptions,
) -> Result<Vec<ReducedNode>, ReduceError> {
    let y_tilde = grid.y(j);
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x(i)).collect();
    let mut states = vec![[0.0; 4]; grid.nx];
    let start = [y_tilde, 1.0, 0.0, 0.0];
    let map_err = |e: OdeError<MonicizeError>| match e {
        OdeError::Rhs(source) => ReduceError::Monicize { y_tilde, source },
        other => ReduceError::Integration {
            y_tilde,
            message: other.to_string(),
        },
    };
    let check = |x: f64, s: &[f64; 4]| -> Result<(), ReduceError> {
        if !(s[0] >= domain.ymin && s[0] <= domain.ymax) {
            return Err(ReduceError::LeavesBox {
                y_tilde,
                x,
                f: s[0],
            });
        }
        if !(s[1] > opts.min_f_y) {
            return Err(ReduceError::DegenerateMap {
                y_tilde,
                x,
                f_y: s[1],
            });
        }
        Ok(())
    };
    check(x0, &start)?;
    // forward sweep over columns right of x0, then backward over those to the left
    for forward in [true, false] {
        let (mut t, mut s) = (x0, start);
        let order: Vec<usize> = if forward {
            (0..grid.nx).filter(|&i| xs[i] >= x0).collect()
        } else {
            (0..grid.nx).rev().filter(|&i| xs[i] < x0).collect()
        };
        for i in order {
            s = integrate(|x, st: &[f64; 4]| rhs(w, x, st), t, s, xs[i], &opts.ode)
                .map_err(map_err)?;
            t = xs[i];
            check(t, &s)?;
            states[i] = s;
        }
    }
    xs.iter()
        .zip(&states)
        .map(|(&x, s)| {
            node_at(w, x, y_tilde, s).map_err(|source| ReduceError::Monicize { y_tilde, source })
        })
        .collect()
}

/// The reduced node at a single point `(x̃, ỹ)` of the reduced chart, integrating from `x0`.
pub fn reduce_point(
    w: &GeneralCubic,
    domain: &DomainBox,
    x0: f64,
    x: f64,
    y_tilde: f64,
    opts: &ReduceOptions,
) -> Result<ReducedNode, ReduceError> {
    let s = integrate(
        |t, st: &[f64; 4]| rhs(w, t, st),
        x0,
        [y_tilde, 1.0, 0.0, 0.0],
        x,
        &opts.ode,
    )
    .map_err(|e| match e {
        OdeError::Rhs(source) => ReduceError::Monicize { y_tilde, source },
        other => ReduceError::Integration {
            y_tilde,
            message: other.to_string(),
        },
    })?;
    if !(s[0] >= domain.ymin && s[0] <= domain.ymax) {
        return Err(ReduceError::LeavesBox {
            y_tilde,
            x,
            f: s[0],
        });
    }
    if !(s[1] > opts.min_f_y) {
        return Err(ReduceError::DegenerateMap {
            y_tilde,
            x,
            f_y: s[1],
        });
    }
    node_at(w, x, y_tilde, &s).map_err(|source| ReduceError::Monicize { y_tilde, source })
}

/// Depressed coefficients of a general cubic in the reduced chart based at `x0`, computed
/// point by point.
#[derive(Clone, Debug)]
pub struct LocalReduction<'a> {
    pub web: &'a GeneralCubic,
    pub domain: DomainBox,
    pub x0: f64,
    pub opts: ReduceOptions,
}

impl CoefficientField for LocalReduction<'_> {
    fn coefficient_jets(&self, x: f64, y: f64) -> Result<(Jet2, Jet2), DomainError> {
        let n = reduce_point(self.web, &self.domain, self.x0, x, y, &self.opts)
            .map_err(|e| DomainError(e.to_string()))?;
        Ok((n.a, n.b))
    }
}

/// Samples the depressed form of a general cubic web on `grid`, whose box lives in the
/// reduced chart `(x̃, ỹ)`; `domain` is the original web's box, which `f` must not leave.
///
/// The base line `x̃ = x0` is where the two charts agree (`f(x0, ỹ) = ỹ`). Rows are
/// integrated independently.
pub fn tschirnhausen_reduce(
    w: &GeneralCubic,
    domain: &DomainBox,
    x0: f64,
    grid: &GridSpec,
    opts: &ReduceOptions,
) -> Result<SampledWeb, ReduceError> {
    if !(x0 >= grid.domain.xmin && x0 <= grid.domain.xmax) {
        return Err(ReduceError::BaseOutsideBox { x0 });
    }
    let rows: Vec<Vec<ReducedNode>> = (0..grid.ny)
        .into_par_iter()
        .map(|j| reduce_row(w, domain, x0, grid, j, opts))
        .collect::<Result<_, _>>()?;
    Ok(SampledWeb {
        grid: *grid,
        x0,
        nodes: rows.into_iter().flatten().collect(),
    })
}
