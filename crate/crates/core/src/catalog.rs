//! Built-in webs with their expected flatness and singular-point verdicts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{DomainError, Expr, Line3, ParseError};
use crate::web::{
    Depressed, DomainBox, GeneralCubic, GridSpec, QuadraticPlusVertical, WebSource, WebSpec,
};

/// Largest sampled `|u_yyy − u_xxy² + u_xxx u_xyy|` accepted from a claimed solution.
pub const ASSOC_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog id {0:?}")]
    UnknownId(String),
    #[error("entry {0:?} takes no parameter")]
    NoParameter(String),
    #[error("parameter must be finite")]
    BadParameter,
    #[error(transparent)]
    Assoc(#[from] AssocError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssocError {
    #[error(
        "not a solution: sampled residual {max:e} at ({x}, {y}) exceeds {ASSOC_RESIDUAL_TOL:e}"
    )]
    ResidualTooLarge { max: f64, x: f64, y: f64 },
    #[error(
        "supplied {name} disagrees with the derivative of u at ({x}, {y}): {given} vs {computed}"
    )]
    DerivativeMismatch {
        name: &'static str,
        x: f64,
        y: f64,
        given: f64,
        computed: f64,
    },
    #[error("no sample of u could be evaluated on the box")]
    NowhereDefined,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPoint {
    pub x: f64,
    pub y: f64,
    /// One of the verdict names reported by the singular-point classifier.
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub flat: bool,
    pub singular_points: Vec<ExpectedPoint>,
}

/// How a general cubic entry is reduced to depressed form before auditing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionPlan {
    pub x0: f64,
    /// Reduced-chart box `x̃ × ỹ`.
    pub reduced: DomainBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub spec: WebSpec,
    pub expected: Expectations,
    pub euler_weights: Option<[f64; 2]>,
    /// Regular point used by the hexagon probe.
    pub probe_center: Option<[f64; 2]>,
    pub reduction: Option<ReductionPlan>,
    pub notes: String,
}

pub const IDS: [&str; 10] = [
    "nf1",
    "nf2",
    "nf3",
    "nf4",
    "hom-tan",
    "hom-poly",
    "nongen-a",
    "nongen-b",
    "control-1",
    "assoc-poly",
];

pub fn list() -> &'static [&'static str] {
    &IDS
}

fn ex(s: &str) -> Expr {
    Expr::parse(s).expect("catalog expression")
}

fn point(x: f64, y: f64, verdict: &str) -> ExpectedPoint {
    ExpectedPoint {
        x,
        y,
        verdict: verdict.into(),
    }
}

fn bx(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> DomainBox {
    DomainBox::new(xmin, xmax, ymin, ymax).expect("catalog box")
}

fn depressed(a: &str, b: &str, domain: DomainBox) -> WebSpec {
    WebSpec {
        source: WebSource::Depressed(Depressed::new(ex(a), ex(b))),
        domain,
    }
}

fn quadratic(a: &str, b: &str, domain: DomainBox) -> WebSpec {
    WebSpec {
        source: WebSource::QuadraticPlusVertical(QuadraticPlusVertical { a: ex(a), b: ex(b) }),
        domain,
    }
}

fn general(k: [String; 4], domain: DomainBox) -> WebSpec {
    let [k3, k2, k1, k0] = k.map(|s| ex(&s));
    WebSpec {
        source: WebSource::GeneralCubic(GeneralCubic { k3, k2, k1, k0 }),
        domain,
    }
}

fn entry(
    id: &str,
    spec: WebSpec,
    flat: bool,
    points: Vec<ExpectedPoint>,
    notes: &str,
) -> CatalogEntry {
    CatalogEntry {
        id: id.into(),
        spec,
        expected: Expectations {
            flat,
            singular_points: points,
        },
        euler_weights: None,
        probe_center: None,
        reduction: None,
        notes: notes.into(),
    }
}

/// Entry `id` with its default parameter.
pub fn get(id: &str) -> Result<CatalogEntry, CatalogError> {
    let e = match id {
        "nf1" => CatalogEntry {
            probe_center: Some([-1.0, 0.1]),
            ..entry(
                "nf1",
                depressed("x", "-y", DomainBox::symmetric(2.0)),
                true,
                vec![point(0.0, 0.0, "NonGeneric"), point(-3.0, 2.0, "NonGeneric")],
                "normal form p^3 + xp - y = 0; leaves are the tangent lines of a cusp and the whole \
                 criminant is Legendrian, so every singular point is non-generic",
            )
        },
        "nf3" => CatalogEntry {
            probe_center: Some([-1.0, 0.0]),
            ..entry(
                "nf3",
                depressed("2*x", "y", DomainBox::symmetric(2.0)),
                true,
                vec![point(0.0, 0.0, "TripleGeneric"), point(-1.5, 2.0, "DoubleGeneric")],
                "normal form p^3 + 2xp + y = 0, generic triple point at the origin",
            )
        },
        "nf2" => CatalogEntry {
            probe_center: Some([0.5, 0.0]),
            ..entry(
                "nf2",
                quadratic("0", "-x", DomainBox::symmetric(1.0)),
                true,
                Vec::new(),
                "normal form p^2 = x together with the vertical lines",
            )
        },
        "nf4" => CatalogEntry {
            probe_center: Some([0.3, 0.5]),
            ..entry(
                "nf4",
                quadratic("0", "-y", DomainBox::symmetric(1.0)),
                true,
                Vec::new(),
                "normal form p^2 = y together with the vertical lines",
            )
        },
        "hom-tan" => CatalogEntry {
            euler_weights: Some([0.0, 1.0]),
            ..entry(
                "hom-tan",
                depressed("y^2", "-(2/sqrt(27))*y^3*tan(2*sqrt(3)*x)", bx(0.05, 0.7, 0.1, 1.0)),
                true,
                Vec::new(),
                "homogeneous flat web with A = y^2 >= 0, so only one family is real; the box stays \
                 clear of the tangent pole",
            )
        },
        "hom-poly" => CatalogEntry {
            probe_center: Some([0.5, 0.0]),
            ..entry(
                "hom-poly",
                depressed(
                    "4*x*(y-(4/9)*x^3)",
                    "y^2+(64/81)*x^6-(32/9)*y*x^3",
                    DomainBox::symmetric(1.0),
                ),
                true,
                Vec::new(),
                "polynomial homogeneous flat web; singular verdicts are not stated, only flatness is checked",
            )
        },
        "nongen-a" => nongen_a(1.0),
        "nongen-b" => nongen_b(1.0),
        "control-1" => CatalogEntry {
            probe_center: Some([0.0, 1.0]),
            ..entry(
                "control-1",
                depressed("-1", "y/10", bx(-1.0, 1.0, 0.0, 2.0)),
                false,
                Vec::new(),
                "non-flat control with three real branches for |y| < 20/sqrt(27)",
            )
        },
        "assoc-poly" => assoc_poly(),
        other => return Err(CatalogError::UnknownId(other.into())),
    };
    Ok(e)
}

/// Entry `id` with parameter `a` (only the two folded-singularity webs take one).
pub fn get_with_parameter(id: &str, a: f64) -> Result<CatalogEntry, CatalogError> {
    if !a.is_finite() {
        return Err(CatalogError::BadParameter);
    }
    match id {
        "nongen-a" => Ok(nongen_a(a)),
        "nongen-b" => Ok(nongen_b(a)),
        other if IDS.contains(&other) => Err(CatalogError::NoParameter(other.into())),
        other => Err(CatalogError::UnknownId(other.into())),
    }
}

/// `(xp − 2y)(p² + ax² − 2y) = 0`.
pub fn nongen_a(a: f64) -> CatalogEntry {
    let a = format!("({a:?})");
    let k = [
        "x".to_string(),
        "-2*y".to_string(),
        format!("{a}*x^3-2*x*y"),
        format!("-2*{a}*x^2*y+4*y^2"),
    ];
    let plan = ReductionPlan {
        x0: 0.6,
        reduced: bx(0.4, 0.9, 0.2, 0.6),
    };
    CatalogEntry {
        reduction: Some(plan),
        ..entry(
            "nongen-a",
            general(k, DomainBox::symmetric(1.0)),
            true,
            vec![point(0.0, 0.0, "Degenerate")],
            "(xp - 2y)(p^2 + ax^2 - 2y) = 0 built on the well-folded singularity p^2 + ax^2 = 2y",
        )
    }
}

/// `(2yp − x(2y − ax²))(p² + ax² − 2y) = 0`.
pub fn nongen_b(a: f64) -> CatalogEntry {
    let a = format!("({a:?})");
    let k = [
        "2*y".to_string(),
        format!("-(2*x*y-{a}*x^3)"),
        format!("2*{a}*x^2*y-4*y^2"),
        format!("x*(2*y-{a}*x^2)^2"),
    ];
    let plan = ReductionPlan {
        x0: 0.6,
        reduced: bx(0.4, 0.9, 0.2, 0.6),
    };
    CatalogEntry {
        reduction: Some(plan),
        ..entry(
        "nongen-b",
        general(k, DomainBox::symmetric(1.0)),
        true,
        vec![point(0.0, 0.0, "Degenerate")],
        "(2yp - x(2y - ax^2))(p^2 + ax^2 - 2y) = 0 built on the well-folded singularity p^2 + ax^2 = 2y",
        )
    }
}

fn assoc_poly() -> CatalogEntry {
    let input =
        AssocInput::parse("x^2*y^2/4+y^5/60", "0", "y", "x", "y^2").expect("catalog expression");
    let domain = bx(0.5, 1.5, 0.25, 2.0);
    let web = assoc_from_solution(&input, domain).expect("catalog solution");
    CatalogEntry {
        reduction: Some(ReductionPlan {
            x0: 1.0,
            reduced: bx(0.5, 1.5, 0.6, 1.0),
        }),
        ..entry(
            "assoc-poly",
            web.spec,
            true,
            Vec::new(),
            "characteristic web of the associativity-equation solution u = x^2 y^2/4 + y^5/60",
        )
    }
}

/// A claimed solution of `u_yyy = u_xxy² − u_xxx u_xyy` with its third derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct AssocInput {
    pub u: Expr,
    pub u_xxx: Expr,
    pub u_xxy: Expr,
    pub u_xyy: Expr,
    pub u_yyy: Expr,
}

impl AssocInput {
    pub fn parse(
        u: &str,
        u_xxx: &str,
        u_xxy: &str,
        u_xyy: &str,
        u_yyy: &str,
    ) -> Result<Self, ParseError> {
        Ok(AssocInput {
            u: Expr::parse(u)?,
            u_xxx: Expr::parse(u_xxx)?,
            u_xxy: Expr::parse(u_xxy)?,
            u_xyy: Expr::parse(u_xyy)?,
            u_yyy: Expr::parse(u_yyy)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssocWeb {
    /// Cubic `−u_xyy p³ − 2u_xxy p² − u_xxx p + 1 = 0`.
    pub spec: WebSpec,
    pub max_residual: f64,
    /// Set when the cubic degenerates on the whole sampled box.
    pub degenerate: Option<String>,
}

/// Third derivatives `[u_xxx, u_xxy, u_xyy, u_yyy]` of `u` from directional line jets.
pub fn third_derivatives(u: &Expr, x: f64, y: f64) -> Result<[f64; 4], DomainError> {
    let along = |s: f64| -> Result<f64, DomainError> {
        let line = u.eval_with(
            Line3::variable(x),
            Line3::constant(y) + Line3::constant(s) * (Line3::variable(x) - Line3::constant(x)),
        )?;
        Ok(line.d[3])
    };
    let xxx = along(0.0)?;
    let yyy = u.eval_line_y(x, y)?.d[3];
    // D³ along (1, ±1) is u_xxx ± 3u_xxy + 3u_xyy ± u_yyy
    let (plus, minus) = (along(1.0)?, along(-1.0)?);
    let xxy = (plus - minus - 2.0 * yyy) / 6.0;
    let xyy = (plus + minus - 2.0 * xxx) / 6.0;
    Ok([xxx, xxy, xyy, yyy])
}

const ASSOC_SAMPLES: usize = 17;

/// Characteristic web of a solution of the associativity equation, checked on a grid over
/// `domain` against both the equation and the derivatives of `u`.
pub fn assoc_from_solution(input: &AssocInput, domain: DomainBox) -> Result<AssocWeb, AssocError> {
    let grid = GridSpec::square(ASSOC_SAMPLES, domain).expect("fixed sample count");
    let names = ["u_xxx", "u_xxy", "u_xyy", "u_yyy"];
    let given = [&input.u_xxx, &input.u_xxy, &input.u_xyy, &input.u_yyy];
    let mut max_residual: f64 = 0.0;
    let mut worst = (f64::NAN, f64::NAN);
    let mut evaluated = 0;
    let mut lead_nonzero = false;
    let mut lower_nonzero = false;
    for (_, _, x, y) in grid.nodes() {
        let Ok(computed) = third_derivatives(&input.u, x, y) else {
            continue;
        };
        let mut d = [0.0; 4];
        let mut ok = true;
        for k in 0..4 {
            match given[k].eval(x, y) {
                Ok(v) => d[k] = v,
                Err(_) => ok = false,
            }
        }
        if !ok {
            continue;
        }
        evaluated += 1;
        for k in 0..4 {
            if (d[k] - computed[k]).abs() > 1e-8 * (1.0 + computed[k].abs()) {
                return Err(AssocError::DerivativeMismatch {
                    name: names[k],
                    x,
                    y,
                    given: d[k],
                    computed: computed[k],
                });
            }
        }
        let [xxx, xxy, xyy, yyy] = d;
        let r = (yyy - (xxy * xxy - xxx * xyy)).abs();
        if r > max_residual || r.is_nan() {
            max_residual = r;
            worst = (x, y);
        }
        lead_nonzero |= xyy.abs() > 1e-12;
        lower_nonzero |= xxx.abs() > 1e-12 || xxy.abs() > 1e-12;
    }
    if evaluated == 0 {
        return Err(AssocError::NowhereDefined);
    }
    if !(max_residual <= ASSOC_RESIDUAL_TOL) {
        return Err(AssocError::ResidualTooLarge {
            max: max_residual,
            x: worst.0,
            y: worst.1,
        });
    }
    let degenerate = match (lead_nonzero, lower_nonzero) {
        (false, false) => {
            Some("all characteristic coefficients but the leading one vanish".to_string())
        }
        (false, true) => Some("leading coefficient -u_xyy vanishes on the sampled box".to_string()),
        _ => None,
    };
    let neg = |e: &Expr| Expr::negate(e.clone());
    let spec = WebSpec {
        source: WebSource::GeneralCubic(GeneralCubic {
            k3: neg(&input.u_xyy),
            k2: neg(&Expr::binary(
                crate::expr::BinOp::Mul,
                Expr::Num(2.0),
                input.u_xxy.clone(),
            )),
            k1: neg(&input.u_xxx),
            k0: Expr::Num(1.0),
        }),
        domain,
    };
    Ok(AssocWeb {
        spec,
        max_residual,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves() {
        for id in list() {
            let e = get(id).unwrap();
            assert_eq!(&e.id, id);
            e.spec
                .validate()
                .unwrap_or_else(|err| panic!("{id}: {err}"));
        }
        assert!(matches!(get("nf9"), Err(CatalogError::UnknownId(_))));
        assert!(matches!(
            get_with_parameter("nf1", 2.0),
            Err(CatalogError::NoParameter(_))
        ));
    }

    #[test]
    fn assoc_poly_coefficients() {
        let e = get("assoc-poly").unwrap();
        let WebSource::GeneralCubic(g) = &e.spec.source else {
            panic!()
        };
        let k = g.coefficients(0.7, 1.3).unwrap();
        assert_eq!(k, [-0.7, -2.6, -0.0, 1.0]);
    }

    #[test]
    fn third_derivatives_of_polynomial() {
        let u = Expr::parse("x^2*y^2/4+y^5/60+x^3*y").unwrap();
        let d = third_derivatives(&u, 0.4, -1.1).unwrap();
        let want = [6.0 * -1.1, -1.1 + 6.0 * 0.4, 0.4, 1.21];
        for k in 0..4 {
            assert!((d[k] - want[k]).abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn trivial_solutions_are_degenerate() {
        let zero = AssocInput::parse("0", "0", "0", "0", "0").unwrap();
        let w = assoc_from_solution(&zero, DomainBox::symmetric(1.0)).unwrap();
        assert_eq!(w.max_residual, 0.0);
        assert!(w.degenerate.is_some());
        let quartic = AssocInput::parse("x^4", "24*x", "0", "0", "0").unwrap();
        let w = assoc_from_solution(&quartic, DomainBox::symmetric(1.0)).unwrap();
        assert!(w.degenerate.unwrap().contains("leading"));
    }

    #[test]
    fn non_solution_is_rejected() {
        let bad = AssocInput::parse("x^2*y^2/4", "0", "y", "x", "0").unwrap();
        assert!(matches!(
            assoc_from_solution(&bad, DomainBox::symmetric(1.0)),
            Err(AssocError::ResidualTooLarge { .. })
        ));
        let wrong = AssocInput::parse("x^2*y^2/4+y^5/60", "0", "y", "2*x", "y^2").unwrap();
        assert!(matches!(
            assoc_from_solution(&wrong, DomainBox::symmetric(1.0)),
            Err(AssocError::DerivativeMismatch { name: "u_xyy", .. })
        ));
    }
}
