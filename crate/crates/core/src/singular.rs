//! Discriminant and criminant location, regularity and Legendrian residuals, and
//! classification of singular points of depressed-cubic webs.
//!
//! For `F = p³ + A p + B`:
//!
//! * the regularity variety `R` in 1-jet space is cut out by
//!   `4A³ + 27B²`, `A_x B_y − A_y B_x`, `3B A_x − 2A B_x`, `3B A_y − 2A B_y`;
//! * the Legendrian variety `L` by `g₁ = 4A³ + 27B²` and
//!   `g₂ = 6AB A_x − 9B² A_y + 6AB B_y − 4A² B_x` (which is `F_x + p F_y` at the double root
//!   `p = −3B/2A`, scaled by `4A²`).
//!
//! A singular point with a triple root is generic when `A_x B_y − A_y B_x ≠ 0` and the criminant
//! is transverse to the contact planes on a punctured neighbourhood; it is then equivalent to
//! `p³ + 2xp + y = 0`. A double root is generic when `F_x + p F_y ≠ 0` there, giving `p² = x`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::{refine_zero, zero_contours, FieldSample};
use crate::cubic::{
    self, discriminant_scale, monicize, solve_depressed, LocalReduction, ReduceOptions, Roots,
};
use crate::expr::{DomainError, Jet2};
use crate::web::{CoefficientField, DomainBox, GeneralCubic, GridSpec};

/// Relative tolerance for membership and non-vanishing tests.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SingularError {
    #[error("grid needs at least 16 nodes per axis, got {nx}×{ny}")]
    GridTooCoarse { nx: usize, ny: usize },
    #[error("point is not on the criminant: F = {f:e}, F_p = {fp:e}")]
    NotOnCriminant { f: f64, fp: f64 },
    #[error("root multiplicity could not be resolved at ({x}, {y})")]
    Unresolvable { x: f64, y: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A point of the plane with the 2-jets of `A` and `B` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub x: f64,
    pub y: f64,
    pub a: Jet2,
    pub b: Jet2,
}

impl JetPoint {
    pub fn at<W: CoefficientField + ?Sized>(w: &W, x: f64, y: f64) -> Result<Self, DomainError> {
        let (a, b) = w.coefficient_jets(x, y)?;
        Ok(JetPoint { x, y, a, b })
    }
}

fn tol_for(terms: &[f64]) -> f64 {
    MEMBERSHIP_TOL * (1.0 + terms.iter().map(|t| t.abs()).sum::<f64>())
}

fn r_terms(j: &JetPoint) -> [[f64; 2]; 4] {
    let (a, b) = (&j.a, &j.b);
    [
        [4.0 * a.v.powi(3), 27.0 * b.v * b.v],
        [a.vx * b.vy, -a.vy * b.vx],
        [3.0 * b.v * a.vx, -2.0 * a.v * b.vx],
        [3.0 * b.v * a.vy, -2.0 * a.v * b.vy],
    ]
}

/// The four defining functions of `R` at `j`.
pub fn r_residuals(j: &JetPoint) -> [f64; 4] {
    r_terms(j).map(|t| t[0] + t[1])
}

/// Whether all four `R` residuals vanish within the term-scaled tolerance.
pub fn in_r(j: &JetPoint) -> bool {
    r_terms(j).iter().all(|t| (t[0] + t[1]).abs() <= tol_for(t))
}

fn g2_terms(j: &JetPoint) -> [f64; 4] {
    let (a, b) = (&j.a, &j.b);
    [
        6.0 * a.v * b.v * a.vx,
        -9.0 * b.v * b.v * a.vy,
        6.0 * a.v * b.v * b.vy,
        -4.0 * a.v * a.v * b.vx,
    ]
}

/// `(g₁, g₂)` of the Legendrian variety at `j`.
pub fn legendrian_residual(j: &JetPoint) -> (f64, f64) {
    let g1 = r_residuals(j)[0];
    (g1, g2_terms(j).iter().sum())
}

pub fn in_l(j: &JetPoint) -> bool {
    let t1 = r_terms(j)[0];
    let t2 = g2_terms(j);
    (t1[0] + t1[1]).abs() <= tol_for(&t1) && t2.iter().sum::<f64>().abs() <= tol_for(&t2)
}

/// `F`, `F_p` and their gradients in `(x, y, p)`.
fn criminant_system(j: &JetPoint, p: f64) -> ([f64; 2], [[f64; 3]; 2]) {
    let (a, b) = (&j.a, &j.b);
    let f = (p * p + a.v) * p + b.v;
    let fp = 3.0 * p * p + a.v;
    let grad_f = [a.vx * p + b.vx, a.vy * p + b.vy, fp];
    let grad_fp = [a.vx, a.vy, 6.0 * p];
    ([f, fp], [grad_f, grad_fp])
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriminantSample {
    /// Signed arclength from the base point.
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub p: f64,
    /// Contact pairing `y′ − p x′` of the unit tangent.
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriminantCurve {
    /// Ordered by `s`.
    pub samples: Vec<CriminantSample>,
    /// Reason continuation stopped early, if it did.
    pub breakdown: Option<String>,
}

impl CriminantCurve {
    pub fn points(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| [s.x, s.y, s.p]).collect()
    }
}

/// Unit tangent of the criminant at `(x, y, p)`, or `None` where `dF` and `dF_p` are dependent.
fn criminant_tangent(j: &JetPoint, p: f64) -> Option<[f64; 3]> {
    let (_, [gf, gfp]) = criminant_system(j, p);
    let t = cross(gf, gfp);
    let n = norm3(t);
    let scale = norm3(gf) * norm3(gfp);
    (n > 1e-12 * scale && n > 0.0).then(|| t.map(|c| c / n))
}

/// Gauss–Newton projection of `q` onto `{F = F_p = 0}`.
fn correct<W: CoefficientField + ?Sized>(
    w: &W,
    mut q: [f64; 3],
) -> Result<Option<[f64; 3]>, DomainError> {
    for _ in 0..12 {
        let j = JetPoint::at(w, q[0], q[1])?;
        let (g, [r0, r1]) = criminant_system(&j, q[2]);
        let scale = discriminant_scale(j.a.v, j.b.v);
        if g[0].abs() <= 1e-13 * scale && g[1].abs() <= 1e-13 * scale {
            return Ok(Some(q));
        }
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let (m00, m01, m11) = (dot(r0, r0), dot(r0, r1), dot(r1, r1));
        let det = m00 * m11 - m01 * m01;
        if !(det.abs() > 1e-24 * (m00 * m11).max(1e-300)) {
            return Ok(None);
        }
        let l0 = (m11 * g[0] - m01 * g[1]) / det;
        let l1 = (m00 * g[1] - m01 * g[0]) / det;
        for k in 0..3 {
            q[k] -= l0 * r0[k] + l1 * r1[k];
        }
    }
    let j = JetPoint::at(w, q[0], q[1])?;
    let (g, _) = criminant_system(&j, q[2]);
    let scale = discriminant_scale(j.a.v, j.b.v);
    Ok((g[0].abs() <= 1e-10 * scale && g[1].abs() <= 1e-10 * scale).then_some(q))
}

/// Arclengths `s ∈ [1e-4, radius]`, logarithmically spaced.
pub fn isolation_arclengths(radius: f64, n: usize) -> Vec<f64> {
    let lo: f64 = 1e-4;
    if radius <= lo || n < 2 {
        return vec![radius.max(f64::MIN_POSITIVE)];
    }
    (0..n)
        .map(|k| lo * (radius / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Traces `{F = 0, F_p = 0}` through `m = (x, y, p)` by predictor–corrector continuation and
/// samples it at signed arclengths `±s` for each `s` in `arclengths` (ascending).
pub fn criminant_param<W: CoefficientField + ?Sized>(
    w: &W,
    m: [f64; 3],
    arclengths: &[f64],
) -> Result<CriminantCurve, SingularError> {
    let j = JetPoint::at(w, m[0], m[1])?;
    let (g, _) = criminant_system(&j, m[2]);
    let scale = discriminant_scale(j.a.v, j.b.v);
    if g[0].abs() > 1e-8 * scale || g[1].abs() > 1e-8 * scale {
        return Err(SingularError::NotOnCriminant { f: g[0], fp: g[1] });
    }
    let sample = |q: [f64; 3], t: [f64; 3], s: f64| CriminantSample {
        s,
        x: q[0],
        y: q[1],
        p: q[2],
        h: t[1] - q[2] * t[0],
    };
    let Some(t0) = criminant_tangent(&j, m[2]) else {
        return Ok(CriminantCurve {
            samples: vec![sample(m, [0.0; 3], 0.0)],
            breakdown: Some("criminant is singular at the base point".into()),
        });
    };
    let h_max = arclengths.last().copied().unwrap_or(0.0) / 16.0;
    let mut sides: Vec<Vec<CriminantSample>> = Vec::new();
    let mut breakdown = None;
    for sign in [-1.0, 1.0] {
        let mut side = Vec::new();
        let (mut q, mut t) = (m, t0.map(|c| sign * c));
        let mut s_cur = 0.0;
        'targets: for &target in arclengths {
            while s_cur < target * (1.0 - 1e-12) {
                let mut h = (target - s_cur).min(h_max.max(1e-6));
                let next = loop {
                    let pred = [q[0] + h * t[0], q[1] + h * t[1], q[2] + h * t[2]];
                    match correct(w, pred) {
                        Ok(Some(c)) => break Some(c),
                        Ok(None) | Err(_) if h > 1e-9 => h *= 0.5,
                        _ => break None,
                    }
                };
                let Some(c) = next else {
                    breakdown = Some(format!(
                        "continuation failed at arclength {:e}",
                        sign * s_cur
                    ));
                    break 'targets;
                };
                let jc = JetPoint::at(w, c[0], c[1])?;
                let Some(tc) = criminant_tangent(&jc, c[2]) else {
                    breakdown = Some(format!(
                        "rank deficiency at arclength {:e}",
                        sign * (s_cur + h)
                    ));
                    break 'targets;
                };
                let dot = tc[0] * t[0] + tc[1] * t[1] + tc[2] * t[2];
                t = if dot < 0.0 { tc.map(|v| -v) } else { tc };
                q = c;
                s_cur += h;
            }
            side.push(sample(q, t.map(|v| sign * v), sign * target));
        }
        sides.push(side);
    }
    let mut samples: Vec<CriminantSample> = sides[0].iter().rev().copied().collect();
    samples.push(sample(m, t0, 0.0));
    samples.extend(sides[1].iter().copied());
    Ok(CriminantCurve { samples, breakdown })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Double,
    Triple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason")]
pub enum Verdict {
    TripleGeneric,
    DoubleGeneric,
    NonGeneric(String),
    Degenerate(String),
    /// The point is off the discriminant.
    NotSingular,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::TripleGeneric => "TripleGeneric",
            Verdict::DoubleGeneric => "DoubleGeneric",
            Verdict::NonGeneric(_) => "NonGeneric",
            Verdict::Degenerate(_) => "Degenerate",
            Verdict::NotSingular => "NotSingular",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub r_system: [f64; 4],
    pub legendrian_g1: f64,
    pub legendrian_g2: f64,
    pub jacobian_ab: f64,
    /// `F_x + p₀ F_y` at the tangency slope.
    pub transversal_f: Option<f64>,
    pub bx_at_triple: Option<f64>,
    pub tangency_isolated: Option<bool>,
    /// Smallest `|h|` over the sampled punctured neighbourhood.
    pub min_abs_h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub x: f64,
    pub y: f64,
    /// `None` when the cubic could not be brought to depressed form.
    pub delta: Option<f64>,
    pub p0: Option<f64>,
    pub multiplicity: Option<Multiplicity>,
    pub residuals: Option<Residuals>,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub normal_form: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Relative discriminant tolerance for deciding root multiplicity.
    pub root_tol: f64,
    pub radius: f64,
    pub samples_per_side: usize,
    /// `|h|` below this counts as a contact tangency.
    pub tangency_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            root_tol: 1e-8,
            radius: 0.1,
            samples_per_side: 64,
            tangency_tol: 1e-12,
        }
    }
}

pub const TRIPLE_NORMAL_FORM: &str = "p^3+2xp+y=0";
pub const DOUBLE_NORMAL_FORM: &str = "p^2=x";

/// `F_x + p F_y` and its terms.
fn transversal(j: &JetPoint, p: f64) -> (f64, [f64; 4]) {
    let t = [j.a.vx * p, j.b.vx, j.a.vy * p * p, j.b.vy * p];
    (t.iter().sum(), t)
}

/// Classifies the point `(x0, y0)` of a web given by its depressed coefficients.
pub fn classify<W: CoefficientField + ?Sized>(
    w: &W,
    x0: f64,
    y0: f64,
    opts: &ClassifyOptions,
) -> Result<SingularReport, SingularError> {
    let j = JetPoint::at(w, x0, y0)?;
    let roots = solve_depressed(j.a.v, j.b.v, opts.root_tol);
    let (g1, g2) = legendrian_residual(&j);
    let mut residuals = Residuals {
        r_system: r_residuals(&j),
        legendrian_g1: g1,
        legendrian_g2: g2,
        jacobian_ab: r_residuals(&j)[1],
        transversal_f: None,
        bx_at_triple: None,
        tangency_isolated: None,
        min_abs_h: None,
    };
    let mut report = SingularReport {
        x: x0,
        y: y0,
        delta: Some(roots.delta),
        p0: None,
        multiplicity: None,
        residuals: None,
        verdict: Verdict::NotSingular,
        normal_form: None,
    };
    let (p0, mult) = match roots.roots {
        Roots::ThreeSimple { .. } | Roots::OneReal { .. } => {
            report.residuals = Some(residuals);
            return Ok(report);
        }
        Roots::Triple { root } => (root, Multiplicity::Triple),
        Roots::SimplePlusDouble { double, .. } => (double, Multiplicity::Double),
    };
    if !p0.is_finite() {
        return Err(SingularError::Unresolvable { x: x0, y: y0 });
    }
    report.p0 = Some(p0);
    report.multiplicity = Some(mult);
    let (tf, tf_terms) = transversal(&j, p0);
    residuals.transversal_f = Some(tf);

    let verdict = if in_r(&j) {
        Verdict::Degenerate("regularity condition fails".into())
    } else {
        match mult {
            Multiplicity::Triple => {
                residuals.bx_at_triple = Some(j.b.vx);
                let arcs = isolation_arclengths(opts.radius, opts.samples_per_side);
                let curve = criminant_param(w, [x0, y0, p0], &arcs)?;
                let punctured: Vec<f64> = curve
                    .samples
                    .iter()
                    .filter(|s| s.s != 0.0)
                    .map(|s| s.h.abs())
                    .collect();
                let min_h = punctured.iter().copied().fold(f64::INFINITY, f64::min);
                let isolated = curve.breakdown.is_none()
                    && punctured.len() == 2 * arcs.len()
                    && min_h > opts.tangency_tol;
                residuals.tangency_isolated = Some(isolated);
                residuals.min_abs_h = min_h.is_finite().then_some(min_h);
                let jac_terms = r_terms(&j)[1];
                if residuals.jacobian_ab.abs() <= tol_for(&jac_terms) {
                    Verdict::Degenerate("regularity condition fails".into())
                } else if !isolated {
                    Verdict::NonGeneric(match curve.breakdown {
                        Some(b) => format!("criminant continuation broke down: {b}"),
                        None => "criminant tangent to the contact planes".into(),
                    })
                } else {
                    Verdict::TripleGeneric
                }
            }
            Multiplicity::Double => {
                if tf.abs() > tol_for(&tf_terms) {
                    Verdict::DoubleGeneric
                } else {
                    Verdict::NonGeneric("Legendrian double root".into())
                }
            }
        }
    };
    report.normal_form = match verdict {
        Verdict::TripleGeneric => Some(TRIPLE_NORMAL_FORM.into()),
        Verdict::DoubleGeneric => Some(DOUBLE_NORMAL_FORM.into()),
        _ => None,
    };
    report.verdict = verdict;
    report.residuals = Some(residuals);
    Ok(report)
}

/// Classifies a point of a general cubic web. Points where the leading coefficient vanishes are
/// reported as degenerate; elsewhere the web is reduced to depressed form in a chart that agrees
/// with the original one on the vertical line through the point.
pub fn classify_general(
    w: &GeneralCubic,
    domain: &DomainBox,
    x0: f64,
    y0: f64,
    opts: &ClassifyOptions,
) -> Result<SingularReport, SingularError> {
    let k = w.coefficients(x0, y0)?;
    if k.iter().all(|c| c.abs() < 1e-12) {
        return Ok(SingularReport {
            x: x0,
            y: y0,
            delta: None,
            p0: None,
            multiplicity: None,
            residuals: None,
            verdict: Verdict::Degenerate(
                "leading coefficient vanishes, as do all other coefficients".into(),
            ),
            normal_form: None,
        });
    }
    match monicize(w, x0, y0) {
        Err(cubic::MonicizeError::Domain(e)) => Err(e.into()),
        Err(e @ cubic::MonicizeError::LeadingCoefficientVanishes { .. }) => Ok(SingularReport {
            x: x0,
            y: y0,
            delta: None,
            p0: None,
            multiplicity: None,
            residuals: None,
            verdict: Verdict::Degenerate(format!("leading coefficient vanishes ({e})")),
            normal_form: None,
        }),
        Ok(_) => {
            let local = LocalReduction {
                web: w,
                domain: *domain,
                x0,
                opts: ReduceOptions::default(),
            };
            classify(&local, x0, y0, opts)
        }
    }
}

fn delta_sample(j: &JetPoint) -> FieldSample {
    let (a, b) = (&j.a, &j.b);
    FieldSample {
        v: cubic::delta(a.v, b.v),
        gx: -12.0 * a.v * a.v * a.vx - 54.0 * b.v * b.vx,
        gy: -12.0 * a.v * a.v * a.vy - 54.0 * b.v * b.vy,
        scale: discriminant_scale(a.v, b.v),
    }
}

/// Polylines approximating `{δ = 0}` on the grid, each vertex moved onto the curve by Newton
/// steps along `∇δ` (vertices where that fails, such as cusps, keep their best position).
pub fn discriminant_trace<W: CoefficientField + ?Sized>(
    w: &W,
    grid: &GridSpec,
) -> Result<Vec<Vec<[f64; 2]>>, SingularError> {
    if grid.nx < 16 || grid.ny < 16 {
        return Err(SingularError::GridTooCoarse {
            nx: grid.nx,
            ny: grid.ny,
        });
    }
    let nodes: Vec<(f64, f64)> = grid.nodes().map(|(_, _, x, y)| (x, y)).collect();
    let values: Vec<Option<f64>> = nodes
        .par_iter()
        .map(|&(x, y)| {
            w.coefficient_jets(x, y)
                .ok()
                .map(|(a, b)| cubic::delta(a.v, b.v))
        })
        .collect();
    let max_move = grid.dx().hypot(grid.dy());
    let field = |x: f64, y: f64| JetPoint::at(w, x, y).ok().map(|j| delta_sample(&j));
    Ok(zero_contours(grid, &values)
        .into_par_iter()
        .map(|line| {
            line.into_iter()
                .map(|p| refine_zero(p, 1e-10, max_move, field).0)
                .collect()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleCandidate {
    pub x: f64,
    pub y: f64,
    /// The Jacobian of `(A, B)` is singular at the solution.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct SingularCandidates {
    pub triple: Vec<TripleCandidate>,
    pub double: Vec<[f64; 2]>,
    pub failures: Vec<SeedFailure>,
}

fn small_near(j: &Jet2, h: f64) -> bool {
    let grad = j.vx.abs() + j.vy.abs();
    let hess = j.vxx.abs().max(j.vxy.abs()).max(j.vyy.abs());
    j.v.abs() <= 2.0 * (grad * h + hess * h * h)
}

/// Newton on `A = B = 0`, with a damped least-squares step where the Jacobian is singular.
fn solve_ab<W: CoefficientField + ?Sized>(
    w: &W,
    seed: [f64; 2],
    domain: &DomainBox,
) -> Result<TripleCandidate, String> {
    let mut p = seed;
    let mut degenerate = false;
    let slack = 1e-9 * (1.0 + domain.diameter());
    for _ in 0..200 {
        let (a, b) = w.coefficient_jets(p[0], p[1]).map_err(|e| e.to_string())?;
        let det = a.vx * b.vy - a.vy * b.vx;
        let det_scale = (a.vx * b.vy).abs() + (a.vy * b.vx).abs();
        let singular = !(det.abs() > 1e-8 * det_scale) || det_scale == 0.0;
        let done = a.v.abs() <= 1e-13 * (1.0 + a.vx.abs() + a.vy.abs())
            && b.v.abs() <= 1e-13 * (1.0 + b.vx.abs() + b.vy.abs());
        if done {
            return Ok(TripleCandidate {
                x: p[0],
                y: p[1],
                degenerate: degenerate || singular,
            });
        }
        let step = if !singular {
            [
                (b.vy * a.v - a.vy * b.v) / det,
                (a.vx * b.v - b.vx * a.v) / det,
            ]
        } else {
            degenerate = true;
            // (JᵀJ + λI) d = Jᵀr
            let (j00, j01, j11) = (
                a.vx * a.vx + b.vx * b.vx,
                a.vx * a.vy + b.vx * b.vy,
                a.vy * a.vy + b.vy * b.vy,
            );
            let lambda = 1e-6 * (j00 + j11) + 1e-300;
            let (g0, g1) = (a.vx * a.v + b.vx * b.v, a.vy * a.v + b.vy * b.v);
            let (m00, m11) = (j00 + lambda, j11 + lambda);
            let d = m00 * m11 - j01 * j01;
            if !(d.abs() > 0.0) {
                return Err("zero gradient away from a solution".into());
            }
            [(m11 * g0 - j01 * g1) / d, (m00 * g1 - j01 * g0) / d]
        };
        p = [p[0] - step[0], p[1] - step[1]];
        if !p.iter().all(|v| v.is_finite())
            || p[0] < domain.xmin - slack
            || p[0] > domain.xmax + slack
            || p[1] < domain.ymin - slack
            || p[1] > domain.ymax + slack
        {
            return Err("iteration left the box".into());
        }
    }
    Err("no convergence".into())
}

/// Candidate singular points: triple roots from Newton on `A = B = 0` seeded at grid nodes where
/// both coefficients are small relative to their local variation, and double roots sampled from
/// the refined discriminant trace.
pub fn find_singular_points<W: CoefficientField + ?Sized>(
    w: &W,
    grid: &GridSpec,
) -> Result<SingularCandidates, SingularError> {
    let h = grid.dx().max(grid.dy());
    let seeds: Vec<[f64; 2]> = grid
        .nodes()
        .filter_map(|(_, _, x, y)| {
            let (a, b) = w.coefficient_jets(x, y).ok()?;
            (small_near(&a, h) && small_near(&b, h)).then_some([x, y])
        })
        .collect();
    let results: Vec<Result<TripleCandidate, SeedFailure>> = seeds
        .par_iter()
        .map(|&s| {
            solve_ab(w, s, &grid.domain).map_err(|reason| SeedFailure {
                x: s[0],
                y: s[1],
                reason,
            })
        })
        .collect();
    let mut out = SingularCandidates::default();
    for r in results {
        match r {
            Ok(c) => {
                let radius = if c.degenerate { h } else { 1e-6 };
                if let Some(prev) = out.triple.iter_mut().find(|t| {
                    (t.x - c.x).hypot(t.y - c.y) <= radius.max(if t.degenerate { h } else { 1e-6 })
                }) {
                    // keep the candidate closer to an exact zero
                    let score = |t: &TripleCandidate| {
                        w.coefficient_jets(t.x, t.y)
                            .map(|(a, b)| a.v.abs() + b.v.abs())
                            .unwrap_or(f64::INFINITY)
                    };
                    if score(&c) < score(prev) {
                        *prev = c;
                    }
                } else {
                    out.triple.push(c);
                }
            }
            Err(f) => out.failures.push(f),
        }
    }
    out.triple
        .sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let field = |x: f64, y: f64| JetPoint::at(w, x, y).ok().map(|j| delta_sample(&j));
    let mut doubles: Vec<[f64; 2]> = Vec::new();
    for line in discriminant_trace(w, grid)? {
        for p in line {
            let refined = field(p[0], p[1]).is_some_and(|s| s.v.abs() < 1e-10 * s.scale);
            let near_triple = out
                .triple
                .iter()
                .any(|t| (t.x - p[0]).hypot(t.y - p[1]) <= 1e-6);
            if refined
                && !near_triple
                && !doubles
                    .iter()
                    .any(|d| (d[0] - p[0]).hypot(d[1] - p[1]) <= 1e-6)
            {
                doubles.push(p);
            }
        }
    }
    out.double = doubles;
    Ok(out)
}
