//! Truncated Taylor arithmetic used to propagate derivatives through expressions.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Value and all partial derivatives up to second order of a scalar field on the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub vx: f64,
    pub vy: f64,
    pub vxx: f64,
    pub vxy: f64,
    pub vyy: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Jet2 {
            v,
            vx: 0.0,
            vy: 0.0,
            vxx: 0.0,
            vxy: 0.0,
            vyy: 0.0,
        }
    }

    /// The coordinate function `x` evaluated at `x`.
    pub const fn var_x(x: f64) -> Self {
        Jet2 {
            v: x,
            vx: 1.0,
            vy: 0.0,
            vxx: 0.0,
            vxy: 0.0,
            vyy: 0.0,
        }
    }

    pub const fn var_y(y: f64) -> Self {
        Jet2 {
            v: y,
            vx: 0.0,
            vy: 1.0,
            vxx: 0.0,
            vxy: 0.0,
            vyy: 0.0,
        }
    }

    /// 1-jet of the field itself (drops the second-order part).
    pub fn first(&self) -> Jet1 {
        Jet1 {
            v: self.v,
            dx: self.vx,
            dy: self.vy,
        }
    }

    /// 1-jet of `∂x` of the field.
    pub fn partial_x(&self) -> Jet1 {
        Jet1 {
            v: self.vx,
            dx: self.vxx,
            dy: self.vxy,
        }
    }

    /// 1-jet of `∂y` of the field.
    pub fn partial_y(&self) -> Jet1 {
        Jet1 {
            v: self.vy,
            dx: self.vxy,
            dy: self.vyy,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.v, self.vx, self.vy, self.vxx, self.vxy, self.vyy]
            .iter()
            .all(|c| c.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        [self.v, self.vx, self.vy, self.vxx, self.vxy, self.vyy]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn powi(self, n: i32) -> Self {
        JetNum::compose(self, power_derivatives(self.v, n as f64))
    }

    /// Substitutes `(x, y) = (x̃, f(x̃, ỹ))` into this jet, where `f` is given by its own 2-jet in
    /// `(x̃, ỹ)`. Returns the 2-jet of the composite in `(x̃, ỹ)`.
    pub fn compose_vertical(&self, f: &Jet2) -> Jet2 {
        // Φ(x̃, ỹ) = (x̃, f(x̃, ỹ)); chain rule to second order.
        let (gx, gy) = (self.vx, self.vy);
        let (gxx, gxy, gyy) = (self.vxx, self.vxy, self.vyy);
        Jet2 {
            v: self.v,
            vx: gx + gy * f.vx,
            vy: gy * f.vy,
            vxx: gxx + 2.0 * gxy * f.vx + gyy * f.vx * f.vx + gy * f.vxx,
            vxy: gxy * f.vy + gyy * f.vx * f.vy + gy * f.vxy,
            vyy: gyy * f.vy * f.vy + gy * f.vyy,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            vx: self.vx + o.vx,
            vy: self.vy + o.vy,
            vxx: self.vxx + o.vxx,
            vxy: self.vxy + o.vxy,
            vyy: self.vyy + o.vyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            vx: self.vx - o.vx,
            vy: self.vy - o.vy,
            vxx: self.vxx - o.vxx,
            vxy: self.vxy - o.vxy,
            vyy: self.vyy - o.vyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            v: -self.v,
            vx: -self.vx,
            vy: -self.vy,
            vxx: -self.vxx,
            vxy: -self.vxy,
            vyy: -self.vyy,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            vx: self.vx * o.v + self.v * o.vx,
            vy: self.vy * o.v + self.v * o.vy,
            vxx: self.vxx * o.v + 2.0 * self.vx * o.vx + self.v * o.vxx,
            vxy: self.vxy * o.v + self.vx * o.vy + self.vy * o.vx + self.v * o.vxy,
            vyy: self.vyy * o.v + 2.0 * self.vy * o.vy + self.v * o.vyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let inv = o.v.recip();
        self * JetNum::compose(o, [inv, -inv * inv, 2.0 * inv * inv * inv, 0.0])
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        Jet2 {
            v: self.v * c,
            vx: self.vx * c,
            vy: self.vy * c,
            vxx: self.vxx * c,
            vxy: self.vxy * c,
            vyy: self.vyy * c,
        }
    }
}

/// Value and gradient of a scalar field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Jet1 {
    pub const fn constant(v: f64) -> Self {
        Jet1 {
            v,
            dx: 0.0,
            dy: 0.0,
        }
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
        }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
        }
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            v: -self.v,
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
        }
    }
}

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(self, c: f64) -> Jet1 {
        Jet1 {
            v: self.v * c,
            dx: self.dx * c,
            dy: self.dy * c,
        }
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    fn div(self, o: Jet1) -> Jet1 {
        let q = self.v / o.v;
        Jet1 {
            v: q,
            dx: (self.dx - q * o.dx) / o.v,
            dy: (self.dy - q * o.dy) / o.v,
        }
    }
}

/// Derivatives up to third order of a function of one variable along a line.
///
/// `d[k]` is the k-th derivative. Only used where a single third derivative is needed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Line3 {
    pub d: [f64; 4],
}

impl Line3 {
    pub const fn constant(v: f64) -> Self {
        Line3 {
            d: [v, 0.0, 0.0, 0.0],
        }
    }

    pub const fn variable(t: f64) -> Self {
        Line3 {
            d: [t, 1.0, 0.0, 0.0],
        }
    }
}

impl Add for Line3 {
    type Output = Line3;
    fn add(self, o: Line3) -> Line3 {
        let mut d = self.d;
        d.iter_mut().zip(o.d).for_each(|(a, b)| *a += b);
        Line3 { d }
    }
}

impl Sub for Line3 {
    type Output = Line3;
    fn sub(self, o: Line3) -> Line3 {
        let mut d = self.d;
        d.iter_mut().zip(o.d).for_each(|(a, b)| *a -= b);
        Line3 { d }
    }
}

impl Neg for Line3 {
    type Output = Line3;
    fn neg(self) -> Line3 {
        Line3 {
            d: self.d.map(|c| -c),
        }
    }
}

impl Mul for Line3 {
    type Output = Line3;
    fn mul(self, o: Line3) -> Line3 {
        let [u0, u1, u2, u3] = self.d;
        let [v0, v1, v2, v3] = o.d;
        Line3 {
            d: [
                u0 * v0,
                u1 * v0 + u0 * v1,
                u2 * v0 + 2.0 * u1 * v1 + u0 * v2,
                u3 * v0 + 3.0 * u2 * v1 + 3.0 * u1 * v2 + u0 * v3,
            ],
        }
    }
}

impl Div for Line3 {
    type Output = Line3;
    fn div(self, o: Line3) -> Line3 {
        let inv = o.d[0].recip();
        let inv2 = inv * inv;
        self * JetNum::compose(o, [inv, -inv2, 2.0 * inv2 * inv, -6.0 * inv2 * inv2])
    }
}

/// Number types that carry derivative information through expression evaluation.
pub trait JetNum:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    /// True when every derivative slot is zero.
    fn is_flat(&self) -> bool;
    /// `g ∘ self`, where `g[k]` is the k-th derivative of `g` at `self.value()`.
    fn compose(self, g: [f64; 4]) -> Self;
}

impl JetNum for Jet2 {
    fn constant(v: f64) -> Self {
        Jet2::constant(v)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn is_flat(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0 && self.vxx == 0.0 && self.vxy == 0.0 && self.vyy == 0.0
    }

    fn compose(self, g: [f64; 4]) -> Self {
        let [g0, g1, g2, _] = g;
        Jet2 {
            v: g0,
            vx: g1 * self.vx,
            vy: g1 * self.vy,
            vxx: g2 * self.vx * self.vx + g1 * self.vxx,
            vxy: g2 * self.vx * self.vy + g1 * self.vxy,
            vyy: g2 * self.vy * self.vy + g1 * self.vyy,
        }
    }
}

impl JetNum for Line3 {
    fn constant(v: f64) -> Self {
        Line3::constant(v)
    }

    fn value(&self) -> f64 {
        self.d[0]
    }

    fn is_flat(&self) -> bool {
        self.d[1..].iter().all(|c| *c == 0.0)
    }

    fn compose(self, g: [f64; 4]) -> Self {
        let [_, u1, u2, u3] = self.d;
        Line3 {
            d: [
                g[0],
                g[1] * u1,
                g[2] * u1 * u1 + g[1] * u2,
                g[3] * u1 * u1 * u1 + 3.0 * g[2] * u1 * u2 + g[1] * u3,
            ],
        }
    }
}

impl JetNum for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn is_flat(&self) -> bool {
        true
    }

    fn compose(self, g: [f64; 4]) -> Self {
        g[0]
    }
}

/// Derivatives of `u ↦ u^n` at `u` up to third order.
///
/// Integer exponents use `powi` and zero out vanishing falling factorials so that `0^k`
/// with negative `k` never multiplies a zero coefficient.
pub(crate) fn power_derivatives(u: f64, n: f64) -> [f64; 4] {
    let integer = n.fract() == 0.0 && n.abs() < i32::MAX as f64;
    let mut out = [0.0; 4];
    let mut coef = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            coef *= n - (k as f64 - 1.0);
        }
        if coef == 0.0 {
            break;
        }
        let e = n - k as f64;
        let p = if integer { u.powi(e as i32) } else { u.powf(e) };
        *slot = coef * p;
    }
    out
}
