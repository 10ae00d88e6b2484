//! Web sources, domain boxes and sampling grids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cubic;
use crate::expr::{DomainError, Expr, Jet2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WebError {
    #[error("invalid box '{0}': expected xmin:xmax:ymin:ymax with xmin<xmax and ymin<ymax")]
    InvalidBox(String),
    #[error("grid needs at least 2 nodes per axis, got {nx}x{ny}")]
    InvalidGrid { nx: usize, ny: usize },
    #[error("discriminant vanishes identically on the domain box")]
    DiscriminantIdenticallyZero,
    #[error("quadratic discriminant is negative everywhere on the domain box")]
    NoRealQuadraticBranches,
    #[error("coefficients could not be evaluated anywhere on the domain box")]
    NowhereDefined,
    #[error("operation needs a {expected} web, got {found}")]
    WrongVariant {
        expected: &'static str,
        found: &'static str,
    },
}

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl DomainBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self, WebError> {
        let b = DomainBox {
            xmin,
            xmax,
            ymin,
            ymax,
        };
        if [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) && xmin < xmax && ymin < ymax {
            Ok(b)
        } else {
            Err(WebError::InvalidBox(b.to_string()))
        }
    }

    pub fn symmetric(r: f64) -> Self {
        DomainBox {
            xmin: -r,
            xmax: r,
            ymin: -r,
            ymax: r,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

impl fmt::Display for DomainBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.xmin, self.xmax, self.ymin, self.ymax)
    }
}

impl FromStr for DomainBox {
    type Err = WebError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| WebError::InvalidBox(s.to_string()))?;
        match parts[..] {
            [a, b, c, d] => {
                DomainBox::new(a, b, c, d).map_err(|_| WebError::InvalidBox(s.to_string()))
            }
            _ => Err(WebError::InvalidBox(s.to_string())),
        }
    }
}

/// Uniform `nx × ny` node grid spanning a box (corners included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub domain: DomainBox,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, domain: DomainBox) -> Result<Self, WebError> {
        if nx < 2 || ny < 2 {
            return Err(WebError::InvalidGrid { nx, ny });
        }
        Ok(GridSpec { nx, ny, domain })
    }

    pub fn square(n: usize, domain: DomainBox) -> Result<Self, WebError> {
        GridSpec::new(n, n, domain)
    }

    pub fn dx(&self) -> f64 {
        self.domain.width() / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.domain.height() / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.domain.xmax
        } else {
            self.domain.xmin + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.domain.ymax
        } else {
            self.domain.ymin + j as f64 * self.dy()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in row-major order (`j` outer, `i` inner).
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.x(i), self.y(j))))
    }
}

/// `p³ + A(x,y)·p + B(x,y) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Depressed {
    pub a: Expr,
    pub b: Expr,
}

impl Depressed {
    pub fn new(a: Expr, b: Expr) -> Self {
        Depressed { a, b }
    }

    pub fn parse(a: &str, b: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(Depressed {
            a: Expr::parse(a)?,
            b: Expr::parse(b)?,
        })
    }

    pub fn coefficients(&self, x: f64, y: f64) -> Result<(f64, f64), DomainError> {
        Ok((self.a.eval(x, y)?, self.b.eval(x, y)?))
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<(Jet2, Jet2), DomainError> {
        Ok((self.a.eval_jet2(x, y)?, self.b.eval_jet2(x, y)?))
    }

    pub fn delta(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        let (a, b) = self.coefficients(x, y)?;
        Ok(cubic::delta(a, b))
    }
}

/// Anything that supplies the 2-jets of depressed-cubic coefficients `(A, B)` at a point.
pub trait CoefficientField: Sync {
    fn coefficient_jets(&self, x: f64, y: f64) -> Result<(Jet2, Jet2), DomainError>;
}

impl CoefficientField for Depressed {
    fn coefficient_jets(&self, x: f64, y: f64) -> Result<(Jet2, Jet2), DomainError> {
        self.jets(x, y)
    }
}

/// `K3 p³ + K2 p² + K1 p + K0 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralCubic {
    pub k3: Expr,
    pub k2: Expr,
    pub k1: Expr,
    pub k0: Expr,
}

impl GeneralCubic {
    pub fn coefficients(&self, x: f64, y: f64) -> Result<[f64; 4], DomainError> {
        Ok([
            self.k3.eval(x, y)?,
            self.k2.eval(x, y)?,
            self.k1.eval(x, y)?,
            self.k0.eval(x, y)?,
        ])
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<[Jet2; 4], DomainError> {
        Ok([
            self.k3.eval_jet2(x, y)?,
            self.k2.eval_jet2(x, y)?,
            self.k1.eval_jet2(x, y)?,
            self.k0.eval_jet2(x, y)?,
        ])
    }
}

/// Branches of `p² + a p + b = 0` together with the foliation by vertical lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPlusVertical {
    pub a: Expr,
    pub b: Expr,
}

impl QuadraticPlusVertical {
    /// `a² − 4b`; the two finite branches are real where this is positive.
    pub fn discriminant(&self, x: f64, y: f64) -> Result<f64, DomainError> {
        let a = self.a.eval(x, y)?;
        let b = self.b.eval(x, y)?;
        Ok(a * a - 4.0 * b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WebSource {
    Depressed(Depressed),
    GeneralCubic(GeneralCubic),
    QuadraticPlusVertical(QuadraticPlusVertical),
}

impl WebSource {
    pub fn variant_name(&self) -> &'static str {
        match self {
            WebSource::Depressed(_) => "depressed",
            WebSource::GeneralCubic(_) => "general cubic",
            WebSource::QuadraticPlusVertical(_) => "quadratic-plus-vertical",
        }
    }
}

/// A 3-web source together with the box it is studied on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WebSpec {
    pub source: WebSource,
    pub domain: DomainBox,
}

impl WebSpec {
    pub fn depressed(a: Expr, b: Expr, domain: DomainBox) -> Self {
        WebSpec {
            source: WebSource::Depressed(Depressed { a, b }),
            domain,
        }
    }

    pub fn as_depressed(&self) -> Result<&Depressed, WebError> {
        match &self.source {
            WebSource::Depressed(d) => Ok(d),
            other => Err(WebError::WrongVariant {
                expected: "depressed",
                found: other.variant_name(),
            }),
        }
    }

    /// Sampled sanity check of the non-degeneracy conditions on the domain box.
    pub fn validate(&self) -> Result<(), WebError> {
        let grid = GridSpec::square(17, self.domain)?;
        let mut evaluated = 0usize;
        match &self.source {
            WebSource::Depressed(d) => {
                let mut nonzero = false;
                for (_, _, x, y) in grid.nodes() {
                    if let Ok((a, b)) = d.coefficients(x, y) {
                        evaluated += 1;
                        if cubic::delta(a, b).abs() > 1e-12 * cubic::discriminant_scale(a, b) {
                            nonzero = true;
                        }
                    }
                }
                if evaluated == 0 {
                    return Err(WebError::NowhereDefined);
                }
                if !nonzero {
                    return Err(WebError::DiscriminantIdenticallyZero);
                }
            }
            WebSource::QuadraticPlusVertical(q) => {
                let mut nonneg = false;
                for (_, _, x, y) in grid.nodes() {
                    if let Ok(d) = q.discriminant(x, y) {
                        evaluated += 1;
                        nonneg |= d >= 0.0;
                    }
                }
                if evaluated == 0 {
                    return Err(WebError::NowhereDefined);
                }
                if !nonneg {
                    return Err(WebError::NoRealQuadraticBranches);
                }
            }
            WebSource::GeneralCubic(g) => {
                if !grid
                    .nodes()
                    .any(|(_, _, x, y)| g.coefficients(x, y).is_ok())
                {
                    return Err(WebError::NowhereDefined);
                }
            }
        }
        Ok(())
    }
}
