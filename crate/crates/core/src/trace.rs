//! Web leaves traced as curves on the surface `M = {F(x, y, p) = 0}` in contact space.
//!
//! The contact lift `(F_p, p F_p, −(F_x + p F_y))` is tangent to `M`, projects onto the line
//! field `dy = p dx`, and stays smooth across the criminant `F = F_p = 0`, where its projection
//! degenerates. Trajectories are integrated in arclength of `(x, y, p)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cubic::{solve_depressed, solve_quadratic, Roots, DEFAULT_ROOT_TOL};
use crate::expr::DomainError;
use crate::ode::{dopri_step, error_norm, step_factor};
use crate::render::{PlotScene, PolylineKind, ScenePolyline};
use crate::singular::discriminant_trace;
use crate::web::{Depressed, DomainBox, GridSpec, QuadraticPlusVertical, WebSource, WebSpec};

/// `|F| < ON_SURFACE_TOL·(1 + |A| + |B|)` defines points on `M`.
pub const ON_SURFACE_TOL: f64 = 1e-8;
/// `|v| < STALL_TOL·(1 + |A| + |B|)` marks a Legendrian equilibrium or a singular point of `M`.
pub const STALL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("point is off the surface: F = {f:e}")]
    OffSurface { f: f64 },
    #[error("step size underflow at arclength {s}")]
    StepUnderflow { s: f64 },
    #[error("lift field vanishes at ({x}, {y}, {p})")]
    LegendrianStall { x: f64, y: f64, p: f64 },
    #[error("non-positive arclength budget")]
    InvalidArclength,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// `F` and its first partials at a point of contact space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub f: f64,
    pub fp: f64,
    pub fx: f64,
    pub fy: f64,
    /// `1 + |A| + |B|` (or the analogue for the quadratic).
    pub scale: f64,
}

/// An implicit first-order ODE `F(x, y, p) = 0`.
pub trait Surface: Sync {
    fn surface_at(&self, x: f64, y: f64, p: f64) -> Result<SurfacePoint, DomainError>;
}

impl Surface for Depressed {
    fn surface_at(&self, x: f64, y: f64, p: f64) -> Result<SurfacePoint, DomainError> {
        let (a, b) = self.jets(x, y)?;
        Ok(SurfacePoint {
            f: (p * p + a.v) * p + b.v,
            fp: 3.0 * p * p + a.v,
            fx: a.vx * p + b.vx,
            fy: a.vy * p + b.vy,
            scale: 1.0 + a.v.abs() + b.v.abs(),
        })
    }
}

impl Surface for QuadraticPlusVertical {
    fn surface_at(&self, x: f64, y: f64, p: f64) -> Result<SurfacePoint, DomainError> {
        let a = self.a.eval_jet2(x, y)?;
        let b = self.b.eval_jet2(x, y)?;
        Ok(SurfacePoint {
            f: (p + a.v) * p + b.v,
            fp: 2.0 * p + a.v,
            fx: a.vx * p + b.vx,
            fy: a.vy * p + b.vy,
            scale: 1.0 + a.v.abs() + b.v.abs(),
        })
    }
}

fn raw_field(sp: &SurfacePoint, p: f64) -> [f64; 3] {
    [sp.fp, p * sp.fp, -(sp.fx + p * sp.fy)]
}

/// The contact lift at a point of `M`.
pub fn lift_field<S: Surface + ?Sized>(
    s: &S,
    x: f64,
    y: f64,
    p: f64,
) -> Result<[f64; 3], TraceError> {
    let sp = s.surface_at(x, y, p)?;
    if !(sp.f.abs() < ON_SURFACE_TOL * sp.scale) {
        return Err(TraceError::OffSurface { f: sp.f });
    }
    Ok(raw_field(&sp, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: 0.02,
            h_min: 1e-13,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Arclength,
    LeftBox,
    Legendrian,
    Undefined,
    StepBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafPolyline {
    /// `(x, y, p)`, from the backward end to the forward end.
    pub vertices: Vec<[f64; 3]>,
    pub branch: u8,
    /// Index of the seed within `vertices`.
    pub seed_index: usize,
    /// For each crossing of `F_p = 0`, the index of the vertex after it.
    pub criminant_crossings: Vec<usize>,
    /// Refined crossing points.
    pub crossing_points: Vec<[f64; 3]>,
    /// Why the backward and forward halves ended.
    pub stops: [StopReason; 2],
}

impl LeafPolyline {
    pub fn projected(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [v[0], v[1]]).collect()
    }

    /// Largest `|F|/scale` over the vertices.
    pub fn max_drift<S: Surface + ?Sized>(&self, s: &S) -> Result<f64, DomainError> {
        let mut m: f64 = 0.0;
        for v in &self.vertices {
            let sp = s.surface_at(v[0], v[1], v[2])?;
            m = m.max(sp.f.abs() / sp.scale);
        }
        Ok(m)
    }
}

enum RhsFail {
    Stall,
    Domain,
}

fn unit_field<S: Surface + ?Sized>(s: &S, sign: f64, y: &[f64; 3]) -> Result<[f64; 3], RhsFail> {
    let sp = s
        .surface_at(y[0], y[1], y[2])
        .map_err(|_| RhsFail::Domain)?;
    let v = raw_field(&sp, y[2]);
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n >= STALL_TOL * sp.scale) {
        return Err(RhsFail::Stall);
    }
    Ok(v.map(|c| sign * c / n))
}

/// Minimum-norm Newton steps along `grad F` until `F` is at roundoff level. Keeps the best
/// iterate, so a step that overshoots near a fold never makes things worse.
fn project<S: Surface + ?Sized>(s: &S, y: [f64; 3]) -> Option<[f64; 3]> {
    let mut y = y;
    let mut best = (f64::INFINITY, y);
    for _ in 0..10 {
        let sp = s.surface_at(y[0], y[1], y[2]).ok()?;
        let r = sp.f.abs() / sp.scale;
        if r < best.0 {
            best = (r, y);
        }
        if r <= 1e-15 {
            break;
        }
        let g = [sp.fx, sp.fy, sp.fp];
        let g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        if !(g2 > 0.0) {
            break;
        }
        let k = sp.f / g2;
        y = [y[0] - k * g[0], y[1] - k * g[1], y[2] - k * g[2]];
    }
    Some(best.1)
}

fn fp_at<S: Surface + ?Sized>(s: &S, y: &[f64; 3]) -> Option<f64> {
    s.surface_at(y[0], y[1], y[2]).ok().map(|sp| sp.fp)
}

struct Half {
    points: Vec<[f64; 3]>,
    /// `(index in points of the vertex after the crossing, refined point)`
    crossings: Vec<(usize, [f64; 3])>,
    stop: StopReason,
}

fn half_leaf<S: Surface + ?Sized>(
    s: &S,
    domain: &DomainBox,
    seed: [f64; 3],
    sign: f64,
    length: f64,
    ctrl: &StepControl,
) -> Result<Half, TraceError> {
    let mut f = |_t: f64, y: &[f64; 3]| unit_field(s, sign, y);
    let mut points = vec![seed];
    let mut crossings = Vec::new();
    let (mut y, mut t) = (seed, 0.0);
    let mut h = ctrl.h_init.min(ctrl.h_max);
    let inside = |y: &[f64; 3]| domain.contains(y[0], y[1]);
    for _ in 0..ctrl.max_steps {
        if t >= length * (1.0 - 1e-14) {
            return Ok(Half {
                points,
                crossings,
                stop: StopReason::Arclength,
            });
        }
        let step = h.min(length - t);
        let (y5, err) = match dopri_step(&mut f, t, &y, step) {
            Ok(r) => r,
            Err(RhsFail::Stall) => {
                // walk up to the equilibrium so the end point does not depend on the step size
                let (mut lo, mut hi) = (0.0, step);
                let mut last = None;
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    match dopri_step(&mut f, t, &y, mid)
                        .ok()
                        .and_then(|(p, _)| project(s, p))
                    {
                        Some(p) if unit_field(s, sign, &p).is_ok() => {
                            lo = mid;
                            last = Some(p);
                        }
                        _ => hi = mid,
                    }
                }
                points.extend(last);
                return Ok(Half {
                    points,
                    crossings,
                    stop: StopReason::Legendrian,
                });
            }
            Err(RhsFail::Domain) => {
                return Ok(Half {
                    points,
                    crossings,
                    stop: StopReason::Undefined,
                })
            }
        };
        let norm = error_norm(&y, &y5, &err, ctrl.rtol, ctrl.atol);
        if !(norm <= 1.0) {
            h = step
                * if norm.is_finite() {
                    step_factor(norm).min(0.9)
                } else {
                    0.2
                };
            if h < ctrl.h_min {
                return Err(TraceError::StepUnderflow { s: t });
            }
            continue;
        }
        // partial step from y, used for box exits and criminant crossings
        let mut partial = |tau: f64| -> Option<[f64; 3]> {
            dopri_step(&mut f, t, &y, tau)
                .ok()
                .and_then(|(p, _)| project(s, p))
        };
        let Some(mut next) = project(s, y5) else {
            return Ok(Half {
                points,
                crossings,
                stop: StopReason::Undefined,
            });
        };
        let mut stop = None;
        let mut taken = step;
        if !inside(&next) {
            let (mut lo, mut hi) = (0.0, step);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                match partial(mid) {
                    Some(p) if inside(&p) => lo = mid,
                    _ => hi = mid,
                }
            }
            match partial(lo) {
                Some(p) => next = p,
                None => {
                    return Ok(Half {
                        points,
                        crossings,
                        stop: StopReason::Undefined,
                    })
                }
            }
            taken = lo;
            stop = Some(StopReason::LeftBox);
        }
        if let (Some(fp0), Some(fp1)) = (fp_at(s, &y), fp_at(s, &next)) {
            if fp0 != 0.0 && fp1 != 0.0 && fp0.signum() != fp1.signum() {
                let (mut lo, mut hi) = (0.0, taken);
                while hi - lo > 1e-10 {
                    let mid = 0.5 * (lo + hi);
                    match partial(mid).and_then(|p| fp_at(s, &p)) {
                        Some(v) if v.signum() == fp0.signum() => lo = mid,
                        _ => hi = mid,
                    }
                }
                if let Some(p) = partial(0.5 * (lo + hi)) {
                    crossings.push((points.len(), p));
                }
            }
        }
        points.push(next);
        y = next;
        t += taken;
        if let Some(reason) = stop {
            return Ok(Half {
                points,
                crossings,
                stop: reason,
            });
        }
        h = (step * step_factor(norm)).min(ctrl.h_max);
    }
    Ok(Half {
        points,
        crossings,
        stop: StopReason::StepBudget,
    })
}

/// Traces the leaf through `seed` for up to `arclength` in each direction, stopping early at
/// the box boundary or a Legendrian equilibrium.
pub fn trace_leaf<S: Surface + ?Sized>(
    s: &S,
    domain: &DomainBox,
    seed: [f64; 3],
    arclength: f64,
    branch: u8,
    ctrl: &StepControl,
) -> Result<LeafPolyline, TraceError> {
    if !(arclength > 0.0) {
        return Err(TraceError::InvalidArclength);
    }
    let v = lift_field(s, seed[0], seed[1], seed[2])?;
    let scale = s.surface_at(seed[0], seed[1], seed[2])?.scale;
    if !((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() >= STALL_TOL * scale) {
        return Err(TraceError::LegendrianStall {
            x: seed[0],
            y: seed[1],
            p: seed[2],
        });
    }
    let back = half_leaf(s, domain, seed, -1.0, arclength, ctrl)?;
    let fwd = half_leaf(s, domain, seed, 1.0, arclength, ctrl)?;
    let nb = back.points.len();
    let mut vertices: Vec<[f64; 3]> = back.points.iter().rev().copied().collect();
    vertices.extend(fwd.points.iter().skip(1));
    let mut crossing: Vec<(usize, [f64; 3])> =
        back.crossings.iter().map(|&(i, p)| (nb - i, p)).collect();
    crossing.reverse();
    crossing.extend(fwd.crossings.iter().map(|&(i, p)| (nb - 1 + i, p)));
    Ok(LeafPolyline {
        vertices,
        branch,
        seed_index: nb - 1,
        criminant_crossings: crossing.iter().map(|c| c.0).collect(),
        crossing_points: crossing.iter().map(|c| c.1).collect(),
        stops: [back.stop, fwd.stop],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    /// Seeds per side of the box boundary.
    pub boundary: usize,
    /// Seeds taken along the discriminant.
    pub discriminant: usize,
    pub points: Vec<[f64; 2]>,
    /// Vertical lines drawn for the quadratic-plus-vertical variant.
    pub verticals: usize,
    /// Arclength budget per direction; `None` uses twice the box diameter.
    pub arclength: Option<f64>,
    pub step: StepControl,
    /// Grid resolution used for the discriminant overlay.
    pub grid: usize,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            boundary: 6,
            discriminant: 8,
            points: Vec::new(),
            verticals: 9,
            arclength: None,
            step: StepControl::default(),
            grid: 96,
        }
    }
}

impl SeedSpec {
    pub fn none() -> Self {
        SeedSpec {
            boundary: 0,
            discriminant: 0,
            verticals: 0,
            ..SeedSpec::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafFailure {
    pub seed: [f64; 3],
    pub branch: u8,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WebTrace {
    pub scene: PlotScene,
    pub leaves: Vec<LeafPolyline>,
    pub failures: Vec<LeafFailure>,
}

fn boundary_seeds(d: &DomainBox, n: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for k in 0..n {
        let u = (k as f64 + 0.5) / n as f64;
        let (x, y) = (d.xmin + u * d.width(), d.ymin + u * d.height());
        out.extend([[x, d.ymin], [d.xmax, y], [x, d.ymax], [d.xmin, y]]);
    }
    out
}

/// Evenly spaced picks from the vertices of `lines`.
fn spread(lines: &[Vec<[f64; 2]>], n: usize) -> Vec<[f64; 2]> {
    let all: Vec<[f64; 2]> = lines.iter().flatten().copied().collect();
    if all.is_empty() || n == 0 {
        return Vec::new();
    }
    (0..n)
        .map(|k| all[((2 * k + 1) * all.len()) / (2 * n)])
        .collect()
}

/// Branch tags at a seed: three real roots get 1, 2, 3 in ascending order; a lone real root
/// gets 1 when it lies below the complex pair's real part, otherwise 3.
fn cubic_seeds(w: &Depressed, x: f64, y: f64) -> Vec<([f64; 3], u8)> {
    let Ok((a, b)) = w.coefficients(x, y) else {
        return Vec::new();
    };
    match solve_depressed(a, b, DEFAULT_ROOT_TOL).roots {
        Roots::ThreeSimple { roots } => (0..3).map(|i| ([x, y, roots[i]], i as u8 + 1)).collect(),
        Roots::OneReal { root } => vec![([x, y, root], if root < 0.0 { 1 } else { 3 })],
        Roots::SimplePlusDouble { double, simple } => {
            vec![
                ([x, y, double], 2),
                ([x, y, simple], if simple < double { 1 } else { 3 }),
            ]
        }
        Roots::Triple { .. } => Vec::new(),
    }
}

fn quad_seeds(q: &QuadraticPlusVertical, x: f64, y: f64) -> Vec<([f64; 3], u8)> {
    let (Ok(a), Ok(b)) = (q.a.eval(x, y), q.b.eval(x, y)) else {
        return Vec::new();
    };
    solve_quadratic(a, b)
        .into_iter()
        .enumerate()
        .map(|(i, p)| ([x, y, p], i as u8 + 1))
        .collect()
}

fn quad_discriminant(q: &QuadraticPlusVertical, grid: &GridSpec) -> Vec<Vec<[f64; 2]>> {
    use crate::contour::{refine_zero, zero_contours, FieldSample};
    let field = |x: f64, y: f64| -> Option<FieldSample> {
        let a = q.a.eval_jet2(x, y).ok()?;
        let b = q.b.eval_jet2(x, y).ok()?;
        Some(FieldSample {
            v: a.v * a.v - 4.0 * b.v,
            gx: 2.0 * a.v * a.vx - 4.0 * b.vx,
            gy: 2.0 * a.v * a.vy - 4.0 * b.vy,
            scale: 1.0 + a.v * a.v + b.v.abs(),
        })
    };
    let values: Vec<Option<f64>> = grid
        .nodes()
        .map(|(_, _, x, y)| field(x, y).map(|s| s.v))
        .collect();
    let max_move = grid.dx().hypot(grid.dy());
    zero_contours(grid, &values)
        .into_iter()
        .map(|l| {
            l.into_iter()
                .map(|p| refine_zero(p, 1e-12, max_move, field).0)
                .collect()
        })
        .collect()
}

/// Traces a picture of the web: leaves through seeds on the box boundary, on the
/// discriminant and at explicit points, plus the discriminant itself.
pub fn trace_web(spec: &WebSpec, seeds: &SeedSpec) -> Result<WebTrace, TraceError> {
    let d = spec.domain;
    let grid = GridSpec::square(seeds.grid.max(16), d).map_err(|e| DomainError(e.to_string()))?;
    let length = seeds.arclength.unwrap_or(2.0 * d.diameter());
    let mut scene = PlotScene::new(d);
    #[allow(clippy::type_complexity)]
    let (disc, jobs): (Vec<Vec<[f64; 2]>>, Vec<([f64; 3], u8)>) = match &spec.source {
        WebSource::Depressed(w) => {
            let disc = discriminant_trace(w, &grid).map_err(|e| DomainError(e.to_string()))?;
            let mut pts = boundary_seeds(&d, seeds.boundary);
            pts.extend(spread(&disc, seeds.discriminant));
            pts.extend(seeds.points.iter().copied());
            (
                disc,
                pts.iter()
                    .flat_map(|p| cubic_seeds(w, p[0], p[1]))
                    .collect(),
            )
        }
        WebSource::QuadraticPlusVertical(q) => {
            let disc = quad_discriminant(q, &grid);
            let mut pts = boundary_seeds(&d, seeds.boundary);
            pts.extend(spread(&disc, seeds.discriminant));
            pts.extend(seeds.points.iter().copied());
            (
                disc,
                pts.iter().flat_map(|p| quad_seeds(q, p[0], p[1])).collect(),
            )
        }
        WebSource::GeneralCubic(_) => {
            return Err(TraceError::Domain(DomainError(
                "general cubic webs must be reduced before tracing".into(),
            )))
        }
    };
    let results: Vec<Result<LeafPolyline, LeafFailure>> = jobs
        .par_iter()
        .map(|&(seed, tag)| {
            let r = match &spec.source {
                WebSource::Depressed(w) => trace_leaf(w, &d, seed, length, tag, &seeds.step),
                WebSource::QuadraticPlusVertical(q) => {
                    trace_leaf(q, &d, seed, length, tag, &seeds.step)
                }
                WebSource::GeneralCubic(_) => unreachable!(),
            };
            r.map_err(|e| LeafFailure {
                seed,
                branch: tag,
                error: e.to_string(),
            })
        })
        .collect();
    let mut leaves = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(l) if l.vertices.len() >= 2 => leaves.push(l),
            Ok(_) => {}
            Err(f) => failures.push(f),
        }
    }
    for l in &leaves {
        scene.polylines.push(ScenePolyline {
            kind: PolylineKind::Leaf,
            tag: l.branch,
            points: l.projected(),
        });
    }
    if matches!(spec.source, WebSource::QuadraticPlusVertical(_)) {
        let n = seeds.verticals;
        for k in 0..n {
            let x = d.xmin + (k as f64 + 0.5) / n as f64 * d.width();
            scene.polylines.push(ScenePolyline {
                kind: PolylineKind::Leaf,
                tag: 3,
                points: vec![[x, d.ymin], [x, d.ymax]],
            });
        }
    }
    for line in disc {
        if line.len() >= 2 {
            scene.polylines.push(ScenePolyline {
                kind: PolylineKind::Discriminant,
                tag: 0,
                points: line,
            });
        }
    }
    Ok(WebTrace {
        scene,
        leaves,
        failures,
    })
}
