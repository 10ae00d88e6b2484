//! Depressed cubics in the slope `p`: discriminant, real roots with multiplicity, reduction
//! of general cubic ODEs and branch tracking along paths.

mod branches;
mod reduce;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use branches::{root_branches, BranchError, BranchMode, BranchTrack};
pub use reduce::{
    monic_jets, monicize, reduce_point, transport_slope, tschirnhausen_reduce, LocalReduction,
    MonicizeError, ReduceError, ReduceOptions, ReducedNode, SampledWeb,
};

/// Default multiplicity tolerance for [`solve_depressed`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// `δ = −4A³ − 27B²`; positive exactly when `p³ + Ap + B` has three distinct real roots.
pub fn delta(a: f64, b: f64) -> f64 {
    -4.0 * a * a * a - 27.0 * b * b
}

/// Quasi-homogeneous magnitude `1 + |A|³ + |B|²` used to scale discriminant tolerances.
pub fn discriminant_scale(a: f64, b: f64) -> f64 {
    1.0 + a.abs().powi(3) + b * b
}

/// Real roots of a depressed cubic grouped by multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Roots {
    /// Ascending.
    ThreeSimple {
        roots: [f64; 3],
    },
    OneReal {
        root: f64,
    },
    SimplePlusDouble {
        double: f64,
        simple: f64,
    },
    Triple {
        root: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Roots,
    pub delta: f64,
}

impl RootSet {
    /// Real roots listed with multiplicity, ascending.
    pub fn with_multiplicity(&self) -> Vec<f64> {
        let mut v = match self.roots {
            Roots::ThreeSimple { roots } => roots.to_vec(),
            Roots::OneReal { root } => vec![root],
            Roots::SimplePlusDouble { double, simple } => vec![double, double, simple],
            Roots::Triple { root } => vec![root; 3],
        };
        v.sort_by(f64::total_cmp);
        v
    }

    /// Distinct real roots, ascending.
    pub fn distinct(&self) -> Vec<f64> {
        let mut v = self.with_multiplicity();
        v.dedup();
        v
    }

    pub fn is_three_simple(&self) -> bool {
        matches!(self.roots, Roots::ThreeSimple { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.roots {
            Roots::ThreeSimple { .. } => "three_simple",
            Roots::OneReal { .. } => "one_real",
            Roots::SimplePlusDouble { .. } => "simple_plus_double",
            Roots::Triple { .. } => "triple",
        }
    }
}

fn residual(a: f64, b: f64, p: f64) -> f64 {
    (p * p + a) * p + b
}

/// One Newton step on `p³ + Ap + B`, kept only if it lowers the residual.
fn polish(a: f64, b: f64, p: f64) -> f64 {
    let d = 3.0 * p * p + a;
    if d == 0.0 {
        return p;
    }
    let q = p - residual(a, b, p) / d;
    if residual(a, b, q).abs() < residual(a, b, p).abs() {
        q
    } else {
        p
    }
}

/// Real roots of `p³ + A p + B`.
///
/// The multiplicity decision compares `|δ|` with `tol·(1 + |A|³ + |B|²)`; a triple root
/// additionally needs `max(|A|, |B|) ≤ tol`. Three real roots come from the trigonometric
/// formula, a single real root from Cardano's formula.
pub fn solve_depressed(a: f64, b: f64, tol: f64) -> RootSet {
    let d = delta(a, b);
    let scale = discriminant_scale(a, b);
    let roots = if d.abs() <= tol * scale {
        if a.abs().max(b.abs()) <= tol {
            Roots::Triple { root: 0.0 }
        } else if a == 0.0 {
            Roots::OneReal { root: (-b).cbrt() }
        } else {
            let simple = polish(a, b, 3.0 * b / a);
            Roots::SimplePlusDouble {
                double: -0.5 * simple,
                simple,
            }
        }
    } else if d > 0.0 {
        // a < 0 here.
        let m = 2.0 * (-a / 3.0).sqrt();
        let arg = (3.0 * b / (a * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut r = [0, 1, 2].map(|k| polish(a, b, m * (theta - 2.0 * PI * k as f64 / 3.0).cos()));
        r.sort_by(f64::total_cmp);
        Roots::ThreeSimple { roots: r }
    } else {
        Roots::OneReal {
            root: polish(a, b, cardano_real_root(a, b)),
        }
    };
    RootSet { roots, delta: d }
}

/// The single real root when `δ < 0`, written to avoid cancellation.
fn cardano_real_root(a: f64, b: f64) -> f64 {
    let s = -0.5 * b;
    let disc = s * s + (a / 3.0).powi(3);
    let t = s + s.signum() * disc.max(0.0).sqrt();
    let t = if t == 0.0 { disc.max(0.0).sqrt() } else { t };
    let u = t.cbrt();
    if u == 0.0 {
        return 0.0;
    }
    let v = -a / (3.0 * u);
    if a > 0.0 {
        // u and v have opposite signs; use u³ + v³ = (u + v)(u² − uv + v²) = −B instead.
        -b / (u * u + a / 3.0 + v * v)
    } else {
        u + v
    }
}

/// Complex-conjugate pair `(re, im ≥ 0)` of `p³ + Ap + B` given its real root `r`.
pub fn complex_pair(a: f64, r: f64) -> (f64, f64) {
    (-0.5 * r, (0.75 * r * r + a).max(0.0).sqrt())
}

/// Real roots of `p² + a p + b`, ascending.
pub fn solve_quadratic(a: f64, b: f64) -> Vec<f64> {
    let disc = a * a - 4.0 * b;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-0.5 * a];
    }
    let q = -0.5 * (a + a.signum_nonzero() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, -a) } else { (q, b / q) };
    let mut v = vec![r1, r2];
    v.sort_by(f64::total_cmp);
    v
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_values() {
        assert_eq!(delta(0.0, 0.0), 0.0);
        assert_eq!(delta(2.0, 1.0), -59.0);
        assert_eq!(delta(-3.0, 2.0), 0.0);
    }

    #[test]
    fn triple_at_origin() {
        assert_eq!(
            solve_depressed(0.0, 0.0, 1e-10).roots,
            Roots::Triple { root: 0.0 }
        );
    }

    #[test]
    fn three_simple_symmetric() {
        let r = solve_depressed(-1.0, 0.0, 1e-10);
        let Roots::ThreeSimple { roots } = r.roots else {
            panic!("{r:?}")
        };
        for (got, want) in roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-15, "{roots:?}");
        }
    }

    #[test]
    fn double_root_factorization() {
        let r = solve_depressed(-3.0, 2.0, 1e-10);
        assert_eq!(
            r.roots,
            Roots::SimplePlusDouble {
                double: 1.0,
                simple: -2.0
            }
        );
        assert_eq!(r.with_multiplicity(), vec![-2.0, 1.0, 1.0]);
        assert_eq!(r.distinct(), vec![-2.0, 1.0]);
    }

    #[test]
    fn one_real_root() {
        let r = solve_depressed(2.0, 1.0, 1e-10);
        let Roots::OneReal { root } = r.roots else {
            panic!()
        };
        assert!(residual(2.0, 1.0, root).abs() < 1e-14);
        let (re, im) = complex_pair(2.0, root);
        // (p - re)^2 + im^2 times (p - root) reproduces the cubic
        assert!((re * 2.0 + root).abs() < 1e-15);
        assert!((re * re + im * im + 2.0 * re * root - 2.0).abs() < 1e-12);
    }

    #[test]
    fn large_coefficients_cancel_safely() {
        let r = solve_depressed(1e6, -1e-3, 1e-10);
        let Roots::OneReal { root } = r.roots else {
            panic!()
        };
        assert!((root - 1e-9).abs() < 1e-20);
    }

    #[test]
    fn quadratic_roots() {
        assert_eq!(solve_quadratic(0.0, -0.25), vec![-0.5, 0.5]);
        assert_eq!(solve_quadratic(0.0, 1.0), Vec::<f64>::new());
        assert_eq!(solve_quadratic(2.0, 1.0), vec![-1.0]);
        assert_eq!(solve_quadratic(-3.0, 0.0), vec![0.0, 3.0]);
    }

    proptest! {
        #[test]
        fn three_simple_roots_are_accurate(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let r = solve_depressed(a, b, 1e-10);
            if let Roots::ThreeSimple { roots } = r.roots {
                for p in roots {
                    prop_assert!(residual(a, b, p).abs() < 1e-10 * (1.0 + a.abs() + b.abs()) * (1.0 + p * p));
                }
                prop_assert!(roots[0] < roots[1] && roots[1] < roots[2]);
            }
            let s: f64 = r.with_multiplicity().iter().sum();
            if r.is_three_simple() {
                prop_assert!(s.abs() < 1e-10 * (1.0 + a.abs().sqrt()));
            }
        }

        #[test]
        fn kind_matches_delta_sign(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let r = solve_depressed(a, b, 1e-10);
            let band = 1e-10 * discriminant_scale(a, b);
            match r.roots {
                Roots::ThreeSimple { .. } => prop_assert!(r.delta > band),
                Roots::OneReal { .. } => prop_assert!(r.delta < band),
                _ => prop_assert!(r.delta.abs() <= band),
            }
        }
    }
}
