//! Chern connection form, Blaschke curvature and flatness audits of depressed-cubic webs.
//!
//! For `p³ + A p + B = 0` with the leaf forms normalized so that `σ₁ + σ₂ + σ₃ = 0`,
//! the connection `γ = γ₁ dx + γ₂ dy` defined by `dσᵢ = γ ∧ σᵢ` is
//!
//! ```text
//! γ₁ = (2A²A_x − 4A²B_y + 6AB A_y + 9B B_x) / (4A³ + 27B²)
//! γ₂ = (4A²A_y + 6A B_x + 18B B_y − 9B A_x) / (4A³ + 27B²)
//! ```
//!
//! and the curvature density is `K = ∂x γ₂ − ∂y γ₁`, i.e. `dγ = K dx∧dy`. `K` is obtained by
//! differentiating the quotients exactly from the 2-jets of `A` and `B`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cubic::{
    self, discriminant_scale, solve_depressed, Roots, SampledWeb, DEFAULT_ROOT_TOL,
};
use crate::expr::{DomainError, Jet1, Jet2};
use crate::web::{Depressed, GridSpec};

/// Relative discriminant band `|δ| ≤ EXCLUSION·(1 + |A|³ + |B|²)` on which the connection is
/// not evaluated.
pub const EXCLUSION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectionError {
    #[error("point lies on the discriminant band (δ = {delta:e})")]
    OnDiscriminant { delta: f64 },
    #[error("three distinct real roots required (δ = {delta:e})")]
    NotThreeSimple { delta: f64 },
    #[error("every grid node lies in the discriminant band or outside the coefficient domain")]
    AllExcluded,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Connection components only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSample {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Coefficient of `dx∧dy` in `dγ`.
    pub k: f64,
    pub delta: f64,
}

/// Leaf forms `σᵢ = σᵢ₁ dx + σᵢ₂ dy`, stored as `[σᵢ₁, σᵢ₂]`, built from ascending roots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaTriple {
    pub roots: [f64; 3],
    pub forms: [[f64; 2]; 3],
}

impl SigmaTriple {
    pub fn sum(&self) -> [f64; 2] {
        let f = &self.forms;
        [f[0][0] + f[1][0] + f[2][0], f[0][1] + f[1][1] + f[2][1]]
    }
}

fn check_band(a: f64, b: f64, rel: f64) -> Result<f64, ConnectionError> {
    let delta = cubic::delta(a, b);
    if delta.abs() <= rel * discriminant_scale(a, b) {
        return Err(ConnectionError::OnDiscriminant { delta });
    }
    Ok(delta)
}

fn numerators(a: Jet1, ax: Jet1, ay: Jet1, b: Jet1, bx: Jet1, by: Jet1) -> (Jet1, Jet1, Jet1) {
    let a2 = a * a;
    let n1 = a2 * ax * 2.0 - a2 * by * 4.0 + a * b * ay * 6.0 + b * bx * 9.0;
    let n2 = a2 * ay * 4.0 + a * bx * 6.0 + b * by * 18.0 - b * ax * 9.0;
    let d = a2 * a * 4.0 + b * b * 27.0;
    (n1, n2, d)
}

/// γ from the jets of `A` and `B`, with a relative exclusion band.
pub fn gamma_from_jets(a: &Jet2, b: &Jet2, rel_exclusion: f64) -> Result<Gamma, ConnectionError> {
    let delta = check_band(a.v, b.v, rel_exclusion)?;
    let c = |v| Jet1::constant(v);
    let (n1, n2, d) = numerators(c(a.v), c(a.vx), c(a.vy), c(b.v), c(b.vx), c(b.vy));
    Ok(Gamma {
        gamma1: n1.v / d.v,
        gamma2: n2.v / d.v,
        delta,
    })
}

/// γ and `K` from the jets of `A` and `B`.
pub fn curvature_from_jets(
    a: &Jet2,
    b: &Jet2,
    rel_exclusion: f64,
) -> Result<ConnectionSample, ConnectionError> {
    let delta = check_band(a.v, b.v, rel_exclusion)?;
    let (n1, n2, d) = numerators(
        a.first(),
        a.partial_x(),
        a.partial_y(),
        b.first(),
        b.partial_x(),
        b.partial_y(),
    );
    let g1 = n1 / d;
    let g2 = n2 / d;
    Ok(ConnectionSample {
        gamma1: g1.v,
        gamma2: g2.v,
        k: g2.dx - g1.dy,
        delta,
    })
}

/// Chern connection of `w` at `(x, y)`.
pub fn gamma(w: &Depressed, x: f64, y: f64) -> Result<Gamma, ConnectionError> {
    let (a, b) = w.jets(x, y)?;
    gamma_from_jets(&a, &b, EXCLUSION)
}

/// Connection and Blaschke curvature density of `w` at `(x, y)`.
pub fn curvature(w: &Depressed, x: f64, y: f64) -> Result<ConnectionSample, ConnectionError> {
    let (a, b) = w.jets(x, y)?;
    curvature_from_jets(&a, &b, EXCLUSION)
}

pub fn sigma_from_roots(p: [f64; 3]) -> [[f64; 2]; 3] {
    let [p1, p2, p3] = p;
    let f = |scale: f64, slope: f64| [-scale * slope, scale];
    [f(p2 - p3, p1), f(p3 - p1, p2), f(p1 - p2, p3)]
}

/// Normalized leaf forms at a point with three distinct real slopes.
pub fn sigma_forms(w: &Depressed, x: f64, y: f64) -> Result<SigmaTriple, ConnectionError> {
    let (a, b) = w.coefficients(x, y)?;
    let r = solve_depressed(a, b, DEFAULT_ROOT_TOL);
    match r.roots {
        Roots::ThreeSimple { roots } => Ok(SigmaTriple {
            roots,
            forms: sigma_from_roots(roots),
        }),
        _ => Err(ConnectionError::NotThreeSimple { delta: r.delta }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

/// Result of evaluating `|K|` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub nodes: usize,
    pub evaluated: usize,
    /// Nodes inside the discriminant band.
    pub excluded: usize,
    /// Nodes where a coefficient could not be evaluated.
    pub undefined: usize,
    pub excluded_fraction: f64,
    pub max_abs_k: f64,
    pub argmax: [f64; 2],
    pub abs_k_quantiles: Quantiles,
    pub tol: f64,
    pub flat: bool,
}

/// Curvature at one grid node, `None` where excluded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub x: f64,
    pub y: f64,
    pub k: Option<f64>,
    pub delta: Option<f64>,
}

fn sample(x: f64, y: f64, jets: Result<(Jet2, Jet2), DomainError>) -> (GridSample, NodeStatus) {
    match jets {
        Err(_) => (
            GridSample {
                x,
                y,
                k: None,
                delta: None,
            },
            NodeStatus::Undefined,
        ),
        Ok((a, b)) => match curvature_from_jets(&a, &b, EXCLUSION) {
            Ok(s) => (
                GridSample {
                    x,
                    y,
                    k: Some(s.k),
                    delta: Some(s.delta),
                },
                NodeStatus::Evaluated,
            ),
            Err(ConnectionError::OnDiscriminant { delta }) => (
                GridSample {
                    x,
                    y,
                    k: None,
                    delta: Some(delta),
                },
                NodeStatus::Excluded,
            ),
            Err(_) => (
                GridSample {
                    x,
                    y,
                    k: None,
                    delta: None,
                },
                NodeStatus::Undefined,
            ),
        },
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeStatus {
    Evaluated,
    Excluded,
    Undefined,
}

/// Curvature on every node of `grid` (row-major).
pub fn curvature_grid(w: &Depressed, grid: &GridSpec) -> Vec<GridSample> {
    let nodes: Vec<(f64, f64)> = grid.nodes().map(|(_, _, x, y)| (x, y)).collect();
    nodes
        .par_iter()
        .map(|&(x, y)| sample(x, y, w.jets(x, y)).0)
        .collect()
}

pub fn write_curvature_csv<W: Write>(samples: &[GridSample], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "K", "delta"])?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |v| format!("{v:.17e}"));
    for s in samples {
        w.write_record([fmt(Some(s.x)), fmt(Some(s.y)), fmt(s.k), fmt(s.delta)])?;
    }
    w.flush()?;
    Ok(())
}

fn summarize(
    results: Vec<(GridSample, NodeStatus)>,
    tol: f64,
) -> Result<FlatnessReport, ConnectionError> {
    let nodes = results.len();
    let mut ks: Vec<f64> = Vec::with_capacity(nodes);
    let (mut excluded, mut undefined) = (0, 0);
    let mut max_abs_k = 0.0_f64;
    let mut argmax = [f64::NAN; 2];
    for (s, status) in &results {
        match status {
            NodeStatus::Evaluated => {
                let k = s.k.unwrap_or(f64::NAN).abs();
                if k > max_abs_k || argmax[0].is_nan() {
                    max_abs_k = max_abs_k.max(k);
                    argmax = [s.x, s.y];
                }
                ks.push(k);
            }
            NodeStatus::Excluded => excluded += 1,
            NodeStatus::Undefined => undefined += 1,
        }
    }
    if ks.is_empty() {
        return Err(ConnectionError::AllExcluded);
    }
    ks.sort_by(f64::total_cmp);
    let q = |p: f64| ks[((p * ks.len() as f64).ceil() as usize).clamp(1, ks.len()) - 1];
    Ok(FlatnessReport {
        nodes,
        evaluated: ks.len(),
        excluded,
        undefined,
        excluded_fraction: (excluded + undefined) as f64 / nodes as f64,
        max_abs_k,
        argmax,
        abs_k_quantiles: Quantiles {
            p50: q(0.5),
            p90: q(0.9),
            p99: q(0.99),
        },
        tol,
        flat: max_abs_k < tol,
    })
}

/// Evaluates `K` on every grid node outside the discriminant band; the web is reported flat
/// when `max |K| < tol`.
pub fn flatness_audit(
    w: &Depressed,
    grid: &GridSpec,
    tol: f64,
) -> Result<FlatnessReport, ConnectionError> {
    let nodes: Vec<(f64, f64)> = grid.nodes().map(|(_, _, x, y)| (x, y)).collect();
    let results = nodes
        .par_iter()
        .map(|&(x, y)| sample(x, y, w.jets(x, y)))
        .collect();
    summarize(results, tol)
}

/// Flatness audit of a web given by sampled coefficient jets (e.g. a reduced general cubic).
pub fn flatness_audit_sampled(
    web: &SampledWeb,
    tol: f64,
) -> Result<FlatnessReport, ConnectionError> {
    let results = web
        .nodes
        .par_iter()
        .map(|n| sample(n.x, n.y, Ok((n.a, n.b))))
        .collect();
    summarize(results, tol)
}
