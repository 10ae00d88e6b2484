//! Continuous labelling of the three root branches along a polyline.

use thiserror::Error;

use super::{complex_pair, solve_depressed, Roots, DEFAULT_ROOT_TOL};
use crate::expr::DomainError;
use crate::web::Depressed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    /// Any vertex off the three-real-roots region is an error.
    Strict,
    /// Branches are continued through `δ = 0` as if the path were pushed slightly into the
    /// complex domain (same side at every crossing), so closed loops report their monodromy.
    ThroughDiscriminant,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("path has fewer than two vertices")]
    TooShort,
    #[error("path crosses the discriminant at vertices {crossings:?}")]
    CrossingNotPermitted { crossings: Vec<usize> },
    #[error(
        "ambiguous branch matching at vertex {vertex}: gap {gap:e} below twice the drift {drift:e}"
    )]
    Ambiguous { vertex: usize, gap: f64, drift: f64 },
    #[error("first vertex must have three distinct real roots")]
    StartNotRegular,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchTrack {
    /// Per vertex, the real slope of each branch (`None` while the branch is complex).
    pub slopes: Vec<[Option<f64>; 3]>,
    /// Vertices at which the number of real roots changes.
    pub crossings: Vec<usize>,
    /// For closed paths: branch `i` at the end coincides with branch `permutation[i]` at the start.
    pub permutation: Option<[usize; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Regime {
    Real([f64; 3]),
    /// real root, pair real part, pair imaginary part (≥ 0)
    Complex(f64, f64, f64),
    Boundary,
}

fn regime(a: f64, b: f64) -> Regime {
    let r = solve_depressed(a, b, DEFAULT_ROOT_TOL);
    match r.roots {
        Roots::ThreeSimple { roots } => Regime::Real(roots),
        Roots::OneReal { root } => {
            let (re, im) = complex_pair(a, root);
            Regime::Complex(root, re, im)
        }
        _ => Regime::Boundary,
    }
}

/// Per-branch complex value `(re, im)`.
type State = [(f64, f64); 3];

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Tracks the three slope branches along `path`, assigning roots at each vertex to the branch
/// with the nearest previous value (ties keep the previous order).
pub fn root_branches(
    w: &Depressed,
    path: &[(f64, f64)],
    mode: BranchMode,
) -> Result<BranchTrack, BranchError> {
    if path.len() < 2 {
        return Err(BranchError::TooShort);
    }
    let regimes: Vec<Regime> = path
        .iter()
        .map(|&(x, y)| w.coefficients(x, y).map(|(a, b)| regime(a, b)))
        .collect::<Result<_, _>>()?;

    let crossings: Vec<usize> = {
        let mut out = Vec::new();
        let mut last_real = None;
        for (i, r) in regimes.iter().enumerate() {
            let is_real = match r {
                Regime::Real(_) => Some(true),
                Regime::Complex(..) => Some(false),
                Regime::Boundary => None,
            };
            if let Some(now) = is_real {
                if last_real.is_some_and(|prev| prev != now) {
                    out.push(i);
                }
                last_real = Some(now);
            }
            if mode == BranchMode::Strict && is_real != Some(true) {
                // a boundary vertex is flagged too
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        out
    };
    if mode == BranchMode::Strict && !crossings.is_empty() {
        return Err(BranchError::CrossingNotPermitted { crossings });
    }

    let Regime::Real(first) = regimes[0] else {
        return Err(BranchError::StartNotRegular);
    };
    let mut state: State = first.map(|p| (p, 0.0));
    let mut last_regime = regimes[0];
    let mut slopes = vec![first.map(Some)];

    for (v, reg) in regimes.iter().enumerate().skip(1) {
        match (*reg, last_regime) {
            (Regime::Boundary, _) => {
                slopes.push(real_slopes(&state));
                continue;
            }
            (Regime::Real(roots), Regime::Real(_)) => {
                state = match_real(&state, roots, v)?;
            }
            (Regime::Complex(r, re, im), Regime::Complex(..)) => {
                // the real branch stays real; the pair keeps the sign of its imaginary part
                state = state.map(|(_, si)| match si {
                    0.0 => (r, 0.0),
                    s if s > 0.0 => (re, im.max(f64::MIN_POSITIVE)),
                    _ => (re, -im.max(f64::MIN_POSITIVE)),
                });
            }
            (Regime::Complex(r, re, im), Regime::Real(_)) => {
                // entering δ < 0: of the colliding pair the upper real root turns into the
                // member with negative imaginary part
                let single = nearest(&state, r);
                let mut rest: Vec<usize> = (0..3).filter(|&i| i != single).collect();
                rest.sort_by(|&i, &j| state[i].0.total_cmp(&state[j].0));
                state[single] = (r, 0.0);
                state[rest[0]] = (re, im.max(f64::MIN_POSITIVE));
                state[rest[1]] = (re, -im.max(f64::MIN_POSITIVE));
            }
            (Regime::Real(roots), Regime::Complex(..)) => {
                // leaving δ < 0: the member with negative imaginary part becomes the lower root
                let single = (0..3).find(|&i| state[i].1 == 0.0).unwrap_or(0);
                let mut others: Vec<f64> = roots.to_vec();
                let k = others
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        (a.1 - state[single].0)
                            .abs()
                            .total_cmp(&(b.1 - state[single].0).abs())
                    })
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                let real = others.remove(k);
                let neg = (0..3)
                    .find(|&i| i != single && state[i].1 < 0.0)
                    .unwrap_or((single + 1) % 3);
                let pos = 3 - single - neg;
                state[single] = (real, 0.0);
                state[neg] = (others[0], 0.0);
                state[pos] = (others[1], 0.0);
            }
            (_, Regime::Boundary) => unreachable!("boundary regime is never stored"),
        }
        last_regime = *reg;
        slopes.push(real_slopes(&state));
    }

    let closed = {
        let (a, b) = (path[0], path[path.len() - 1]);
        (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
    };
    let permutation = match (closed, last_regime) {
        (true, Regime::Real(_)) => {
            let mut perm = [0; 3];
            for (i, slot) in perm.iter_mut().enumerate() {
                *slot = (0..3)
                    .min_by(|&j, &k| {
                        (state[i].0 - first[j])
                            .abs()
                            .total_cmp(&(state[i].0 - first[k]).abs())
                    })
                    .unwrap_or(i);
            }
            Some(perm)
        }
        _ => None,
    };
    Ok(BranchTrack {
        slopes,
        crossings,
        permutation,
    })
}

fn real_slopes(state: &State) -> [Option<f64>; 3] {
    state.map(|(r, i)| (i == 0.0).then_some(r))
}

fn nearest(state: &State, value: f64) -> usize {
    (0..3)
        .min_by(|&i, &j| {
            let di = (state[i].0 - value).hypot(state[i].1);
            let dj = (state[j].0 - value).hypot(state[j].1);
            di.total_cmp(&dj)
        })
        .unwrap_or(0)
}

fn match_real(state: &State, roots: [f64; 3], vertex: usize) -> Result<State, BranchError> {
    let cost = |p: &[usize; 3]| -> f64 { (0..3).map(|i| (state[i].0 - roots[p[i]]).abs()).sum() };
    let identity_order: [usize; 3] = {
        // previous ascending order
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| state[i].0.total_cmp(&state[j].0));
        let mut p = [0; 3];
        for (rank, &i) in idx.iter().enumerate() {
            p[i] = rank;
        }
        p
    };
    let mut best = identity_order;
    let mut best_cost = cost(&identity_order);
    for p in PERMS {
        let c = cost(&p);
        if c < best_cost - 1e-15 * (1.0 + best_cost) {
            best = p;
            best_cost = c;
        }
    }
    let drift = (0..3)
        .map(|i| (state[i].0 - roots[best[i]]).abs())
        .fold(0.0, f64::max);
    let gap = (roots[1] - roots[0]).min(roots[2] - roots[1]);
    if gap < 2.0 * drift {
        return Err(BranchError::Ambiguous { vertex, gap, drift });
    }
    Ok([0, 1, 2].map(|i| (roots[best[i]], 0.0)))
}
