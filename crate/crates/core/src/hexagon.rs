//! Closure defect of the Blaschke hexagon at a regular point.
//!
//! Let `ℓ₁, ℓ₂, ℓ₃` be the leaves of the three families through `O`. Starting at the point
//! `q₀` at arclength `t` along `ℓ₁`, the hexagon follows family 3 to `ℓ₂`, family 1 to `ℓ₃`,
//! family 2 to `ℓ₁`, and repeats once more, arriving at `q₆ ∈ ℓ₁`. For three families of
//! parallel lines `q₆ = q₀`; in general the defect `|q₆ − q₀|` is `O(t³)` with a coefficient
//! governed by the curvature at `O`, and decays faster on flat webs.
//!
//! Leaves are integrated with a fixed number of Dormand–Prince steps per segment, so every
//! hexagon vertex is a smooth function of the segment lengths and each crossing with a
//! reference leaf is solved by Newton's method in the two arclength parameters.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connection;
use crate::cubic::{solve_depressed, solve_quadratic, Roots, DEFAULT_ROOT_TOL};
use crate::expr::DomainError;
use crate::ode::dopri_step;
use crate::trace::Surface;
use crate::web::{Depressed, QuadraticPlusVertical, WebSource, WebSpec};

/// Defects at or below `NOISE_FLOOR·(1 + |O|)` are treated as roundoff.
pub const NOISE_FLOOR: f64 = 1e-13;
/// A web passes the hexagon flatness criterion when the fitted slope reaches this value.
pub const FLAT_SLOPE: f64 = 2.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HexagonError {
    #[error("point ({x}, {y}) is not regular: three distinct real directions required")]
    NotRegular { x: f64, y: f64 },
    #[error("hexagon step {step} found no crossing with the target leaf")]
    StepEscaped { step: usize },
    #[error("non-positive offset t = {t}")]
    InvalidOffset { t: f64 },
    #[error("general cubic webs must be reduced before probing")]
    Unsupported,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexagonOptions {
    /// Dormand–Prince steps per leaf segment. A single step keeps the discretization error of
    /// curved leaves above roundoff, which is what makes the decay rate measurable on flat webs.
    pub steps: usize,
}

impl Default for HexagonOptions {
    fn default() -> Self {
        HexagonOptions { steps: 1 }
    }
}

#[derive(Clone, Copy)]
enum Local<'a> {
    Cubic(&'a Depressed),
    Quad(&'a QuadraticPlusVertical),
}

impl<'a> Local<'a> {
    fn new(spec: &'a WebSpec) -> Result<Self, HexagonError> {
        match &spec.source {
            WebSource::Depressed(w) => Ok(Local::Cubic(w)),
            WebSource::QuadraticPlusVertical(q) => Ok(Local::Quad(q)),
            WebSource::GeneralCubic(_) => Err(HexagonError::Unsupported),
        }
    }

    /// Slopes of the three families at a point; `None` marks the vertical family.
    fn slopes(&self, x: f64, y: f64) -> Result<[Option<f64>; 3], HexagonError> {
        match self {
            Local::Cubic(w) => {
                let (a, b) = w.coefficients(x, y)?;
                match solve_depressed(a, b, DEFAULT_ROOT_TOL).roots {
                    Roots::ThreeSimple { roots } => Ok(roots.map(Some)),
                    _ => Err(HexagonError::NotRegular { x, y }),
                }
            }
            Local::Quad(q) => {
                let r = solve_quadratic(q.a.eval(x, y)?, q.b.eval(x, y)?);
                match r[..] {
                    [p1, p2] if p1 < p2 => Ok([Some(p1), Some(p2), None]),
                    _ => Err(HexagonError::NotRegular { x, y }),
                }
            }
        }
    }

    fn surface(&self, x: f64, y: f64, p: f64) -> Result<crate::trace::SurfacePoint, DomainError> {
        match self {
            Local::Cubic(w) => w.surface_at(x, y, p),
            Local::Quad(q) => q.surface_at(x, y, p),
        }
    }
}

/// Direction of a leaf at `O` and the slope that identifies its family.
#[derive(Clone, Copy, Debug)]
struct Family {
    slope: Option<f64>,
}

fn unit(slope: Option<f64>) -> [f64; 2] {
    match slope {
        None => [0.0, 1.0],
        Some(p) => {
            let n = (1.0 + p * p).sqrt();
            [1.0 / n, p / n]
        }
    }
}

/// Follows the leaf of `fam` through `start` for signed arclength `s` (in the plane). Returns
/// the end point and the unit tangent there.
fn flow(
    web: Local,
    fam: Family,
    start: [f64; 2],
    s: f64,
    steps: usize,
) -> Result<([f64; 2], [f64; 2]), HexagonError> {
    let Some(p_ref) = fam.slope else {
        return Ok(([start[0], start[1] + s], [0.0, 1.0]));
    };
    let slopes = web.slopes(start[0], start[1])?;
    let p0 = slopes
        .iter()
        .flatten()
        .copied()
        .min_by(|a, b| (a - p_ref).abs().total_cmp(&(b - p_ref).abs()))
        .ok_or(HexagonError::NotRegular {
            x: start[0],
            y: start[1],
        })?;
    let mut rhs = |_t: f64, y: &[f64; 3]| -> Result<[f64; 3], DomainError> {
        let sp = web.surface(y[0], y[1], y[2])?;
        let n = (1.0 + y[2] * y[2]).sqrt();
        Ok([1.0 / n, y[2] / n, -(sp.fx + y[2] * sp.fy) / (sp.fp * n)])
    };
    let mut y = [start[0], start[1], p0];
    if s != 0.0 {
        let h = s / steps as f64;
        for k in 0..steps {
            y = dopri_step(&mut rhs, k as f64 * h, &y, h)?.0;
        }
    }
    Ok(([y[0], y[1]], unit(Some(y[2]))))
}

struct Probe<'a> {
    web: Local<'a>,
    o: [f64; 2],
    fams: [Family; 3],
    steps: usize,
}

impl<'a> Probe<'a> {
    fn new(spec: &'a WebSpec, o: [f64; 2], opts: &HexagonOptions) -> Result<Self, HexagonError> {
        let web = Local::new(spec)?;
        let s = web.slopes(o[0], o[1])?;
        Ok(Probe {
            web,
            o,
            fams: s.map(|slope| Family { slope }),
            steps: opts.steps.max(1),
        })
    }

    fn leaf(&self, k: usize, r: f64) -> Result<([f64; 2], [f64; 2]), HexagonError> {
        flow(self.web, self.fams[k], self.o, r, self.steps)
    }

    /// Moves from `q` along family `j` to the reference leaf `ℓ_k`; returns the parameter `r`
    /// of the crossing on `ℓ_k` and the crossing point.
    fn cross(
        &self,
        q: [f64; 2],
        j: usize,
        k: usize,
        step: usize,
        budget: f64,
    ) -> Result<(f64, [f64; 2]), HexagonError> {
        let escaped = HexagonError::StepEscaped { step };
        // straight-line guess
        let uj = unit(self.nearest_slope(q, j)?);
        let uk = unit(self.fams[k].slope);
        let solve2 = |m: [[f64; 2]; 2], rhs: [f64; 2]| -> Option<[f64; 2]> {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            (det.abs() > 1e-300).then(|| {
                [
                    (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
                    (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
                ]
            })
        };
        // q + s uj = O + r uk
        let d = [self.o[0] - q[0], self.o[1] - q[1]];
        let [mut s, mut r] =
            solve2([[uj[0], -uk[0]], [uj[1], -uk[1]]], d).ok_or(escaped.clone())?;
        let scale = 1.0 + self.o[0].abs() + self.o[1].abs();
        let mut best: Option<(f64, f64)> = None;
        for _ in 0..30 {
            if !(s.abs() <= budget && r.abs() <= budget) {
                return Err(escaped);
            }
            let (a, ta) = self.track(q, j, s)?;
            let (b, tb) = self.leaf(k, r)?;
            let g = [a[0] - b[0], a[1] - b[1]];
            let gn = g[0].hypot(g[1]);
            if best.is_none_or(|(bg, _)| gn < bg) {
                best = Some((gn, r));
            }
            if gn <= 1e-16 * scale {
                break;
            }
            let delta = solve2([[ta[0], -tb[0]], [ta[1], -tb[1]]], g).ok_or(escaped.clone())?;
            s -= delta[0];
            r -= delta[1];
            if delta[0].abs().max(delta[1].abs()) <= 1e-17 * (scale + s.abs() + r.abs()) {
                break;
            }
        }
        // roundoff keeps the residual from reaching zero; accept the best iterate near it
        match best {
            Some((gn, r)) if gn <= 1e-13 * scale => Ok((r, self.leaf(k, r)?.0)),
            _ => Err(escaped),
        }
    }

    fn nearest_slope(&self, q: [f64; 2], j: usize) -> Result<Option<f64>, HexagonError> {
        let Some(pj) = self.fams[j].slope else {
            return Ok(None);
        };
        let s = self.web.slopes(q[0], q[1])?;
        Ok(s.iter()
            .flatten()
            .copied()
            .min_by(|a, b| (a - pj).abs().total_cmp(&(b - pj).abs())))
    }

    /// Leaf of family `j` through `q`, identified by the slope nearest to that family's slope
    /// at `O`.
    fn track(&self, q: [f64; 2], j: usize, s: f64) -> Result<([f64; 2], [f64; 2]), HexagonError> {
        flow(self.web, self.fams[j], q, s, self.steps)
    }
}

/// Signed and Euclidean closure defect of the hexagon with offset `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub t: f64,
    /// `|q₆ − q₀|`.
    pub defect: f64,
    /// Arclength of `q₆` along `ℓ₁` minus `t`.
    pub signed: f64,
}

/// Hexagon closure defect at `center` with offset `t` (the sign of `t` chooses the side of
/// `ℓ₁` the hexagon starts on).
pub fn hexagon_defect(
    spec: &WebSpec,
    center: [f64; 2],
    t: f64,
    opts: &HexagonOptions,
) -> Result<Defect, HexagonError> {
    if t == 0.0 || !t.is_finite() {
        return Err(HexagonError::InvalidOffset { t });
    }
    let probe = Probe::new(spec, center, opts)?;
    let (q0, _) = probe.leaf(0, t)?;
    let budget = 20.0 * t.abs();
    // (family moved along, reference leaf reached)
    const PATTERN: [(usize, usize); 6] = [(2, 1), (0, 2), (1, 0), (2, 1), (0, 2), (1, 0)];
    let mut q = q0;
    let mut r_last = 0.0;
    for (step, &(j, k)) in PATTERN.iter().enumerate() {
        let (r, p) = probe.cross(q, j, k, step + 1, budget)?;
        q = p;
        r_last = r;
    }
    Ok(Defect {
        t,
        defect: (q[0] - q0[0]).hypot(q[1] - q0[1]),
        signed: r_last - t,
    })
}

/// The three leaves through `center`, sampled at `2n + 1` points over arclength
/// `[−length, length]`, ordered by family.
pub fn reference_leaves(
    spec: &WebSpec,
    center: [f64; 2],
    length: f64,
    n: usize,
    opts: &HexagonOptions,
) -> Result<[Vec<[f64; 2]>; 3], HexagonError> {
    let probe = Probe::new(spec, center, opts)?;
    let n = n.max(1);
    let mut out: [Vec<[f64; 2]>; 3] = Default::default();
    for (k, line) in out.iter_mut().enumerate() {
        for i in 0..=2 * n {
            let r = length * (i as f64 - n as f64) / n as f64;
            line.push(probe.leaf(k, r)?.0);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectEntry {
    pub t: f64,
    pub defect: Option<f64>,
    pub signed: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectTable {
    pub center: [f64; 2],
    pub entries: Vec<DefectEntry>,
    /// Least-squares slope of `ln d` against `ln t` over entries above the noise floor.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Least-squares fit `signed ≈ c3 t³ + c4 t⁴` over the same entries.
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub noise_floor: f64,
    pub fitted_entries: usize,
    /// Set when the slope is undefined.
    pub flag: Option<String>,
    /// Every computed defect is at or below the noise floor, so the hexagon closes to roundoff
    /// and no slope can be fitted.
    pub exact_closure: bool,
    /// Whether the slope reaches the flatness threshold. Exact closure also counts as flat.
    pub flat: Option<bool>,
    /// Curvature density at the centre, for depressed webs.
    pub curvature: Option<f64>,
}

fn lstsq2(rows: &[([f64; 2], f64)]) -> Option<[f64; 2]> {
    let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (r, y) in rows {
        a00 += r[0] * r[0];
        a01 += r[0] * r[1];
        a11 += r[1] * r[1];
        b0 += r[0] * y;
        b1 += r[1] * y;
    }
    let det = a00 * a11 - a01 * a01;
    (rows.len() >= 2 && det.abs() > 1e-12 * (a00 * a11).max(f64::MIN_POSITIVE))
        .then(|| [(b0 * a11 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det])
}

/// Defects over `ts` with a power-law fit.
pub fn defect_scan(
    spec: &WebSpec,
    center: [f64; 2],
    ts: &[f64],
    opts: &HexagonOptions,
) -> DefectTable {
    let entries: Vec<DefectEntry> = ts
        .par_iter()
        .map(|&t| match hexagon_defect(spec, center, t, opts) {
            Ok(d) => DefectEntry {
                t,
                defect: Some(d.defect),
                signed: Some(d.signed),
                error: None,
            },
            Err(e) => DefectEntry {
                t,
                defect: None,
                signed: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let floor = NOISE_FLOOR * (1.0 + center[0].abs() + center[1].abs());
    let valid: Vec<(f64, f64, f64)> = entries
        .iter()
        .filter_map(|e| match (e.defect, e.signed) {
            (Some(d), Some(s)) if d > floor && e.t > 0.0 => Some((e.t, d, s)),
            _ => None,
        })
        .collect();
    let log_fit = lstsq2(
        &valid
            .iter()
            .map(|&(t, d, _)| ([t.ln(), 1.0], d.ln()))
            .collect::<Vec<_>>(),
    );
    // scaled columns keep the normal equations well conditioned
    let tmax = valid.iter().map(|v| v.0).fold(0.0, f64::max);
    let poly_fit = lstsq2(
        &valid
            .iter()
            .map(|&(t, _, s)| ([(t / tmax).powi(3), (t / tmax).powi(4)], s))
            .collect::<Vec<_>>(),
    )
    .map(|[a, b]| [a / tmax.powi(3), b / tmax.powi(4)]);
    let computed = entries.iter().filter(|e| e.defect.is_some()).count();
    let exact_closure = valid.is_empty() && computed >= 2;
    let flag = log_fit.is_none().then(|| {
        if exact_closure {
            format!("slope undefined: all {computed} defects at or below the noise floor {floor:e} (exact closure)")
        } else {
            format!("slope undefined: {} of {} defects above the noise floor {floor:e}", valid.len(), entries.len())
        }
    });
    let curvature = match &spec.source {
        WebSource::Depressed(w) => connection::curvature(w, center[0], center[1])
            .ok()
            .map(|c| c.k),
        _ => None,
    };
    DefectTable {
        center,
        slope: log_fit.map(|f| f[0]),
        intercept: log_fit.map(|f| f[1]),
        c3: poly_fit.map(|f| f[0]),
        c4: poly_fit.map(|f| f[1]),
        noise_floor: floor,
        fitted_entries: valid.len(),
        flag,
        exact_closure,
        flat: log_fit
            .map(|f| f[0] >= FLAT_SLOPE)
            .or(exact_closure.then_some(true)),
        curvature,
        entries,
    }
}

/// `n` offsets spaced logarithmically over `[tmin, tmax]`.
pub fn log_offsets(tmin: f64, tmax: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![tmin],
        _ => (0..n)
            .map(|k| tmin * (tmax / tmin).powf(k as f64 / (n - 1) as f64))
            .collect(),
    }
}

impl DefectTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "defect", "signed"])?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| format!("{v:.17e}"));
        for e in &self.entries {
            w.write_record([fmt(Some(e.t)), fmt(e.defect), fmt(e.signed)])?;
        }
        w.flush()?;
        Ok(())
    }
}
