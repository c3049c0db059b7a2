//! Second-order Taylor jets.
//!
//! A [`Jet<N>`] carries a value together with its gradient and Hessian with
//! respect to `N` independent variables. Arithmetic on jets propagates exact
//! first and second derivatives, which is how metric components, scalar
//! fields and deformation functions supply "analytic" derivatives to the
//! curvature engine.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest chart dimension supported by the curvature engine.
pub const MAX_DIM: usize = 4;

/// Jet in the coordinates of a chart (up to [`MAX_DIM`] variables).
pub type Jet4 = Jet<MAX_DIM>;

/// Univariate jet: value, first and second derivative.
pub type Jet1 = Jet<1>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl<const N: usize> Jet<N> {
    pub const fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// The coordinate function `x_i` evaluated at `v`.
    pub fn variable(v: f64, i: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Applies a scalar function with value `f0` and derivatives `f1`, `f2`
    /// at `self.v` (chain rule to second order).
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for k in 0..N {
                out.h[i][k] = f2 * self.g[i] * self.g[k] + f1 * self.h[i][k];
            }
        }
        out
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.v *= c;
        for i in 0..N {
            out.g[i] *= c;
            for k in 0..N {
                out.h[i][k] *= c;
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let kf = f64::from(k);
                let p2 = self.v.powi(k - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, kf * p1, kf * (kf - 1.0) * p2)
            }
        }
    }

    pub fn powf(self, p: f64) -> Self {
        let p0 = self.v.powf(p);
        let p1 = p * self.v.powf(p - 1.0);
        let p2 = p * (p - 1.0) * self.v.powf(p - 2.0);
        self.chain(p0, p1, p2)
    }
}

impl Jet1 {
    /// `t` as a univariate jet.
    pub fn var(t: f64) -> Self {
        Self::variable(t, 0)
    }

    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self {
            v,
            g: [d1],
            h: [[d2]],
        }
    }

    pub fn d1(&self) -> f64 {
        self.g[0]
    }

    pub fn d2(&self) -> f64 {
        self.h[0][0]
    }

    /// Treats `self` as the 2-jet of an outer function at `inner.v` and
    /// composes it with `inner`.
    pub fn compose<const M: usize>(&self, inner: Jet<M>) -> Jet<M> {
        inner.chain(self.v, self.d1(), self.d2())
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, rhs: Self) {
        self.v += rhs.v;
        for i in 0..N {
            self.g[i] += rhs.g[i];
            for k in 0..N {
                self.h[i][k] += rhs.h[i][k];
            }
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, rhs: Self) {
        self.v -= rhs.v;
        for i in 0..N {
            self.g[i] -= rhs.g[i];
            for k in 0..N {
                self.h[i][k] -= rhs.h[i][k];
            }
        }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.v * rhs.v);
        for i in 0..N {
            out.g[i] = self.g[i] * rhs.v + self.v * rhs.g[i];
            for k in 0..N {
                out.h[i][k] = self.h[i][k] * rhs.v
                    + self.v * rhs.h[i][k]
                    + self.g[i] * rhs.g[k]
                    + rhs.g[i] * self.g[k];
            }
        }
        out
    }
}

impl<const N: usize> MulAssign for Jet<N> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.v += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.v -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.scale(1.0 / rhs)
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, rhs: Jet<N>) -> Jet<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        rhs.scale(self)
    }
}

impl<const N: usize> Div<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn div(self, rhs: Jet<N>) -> Jet<N> {
        rhs.recip().scale(self)
    }
}

/// Scalar-like numbers: plain `f64` or a jet. Generic code written against
/// this trait yields values when run on `f64` and exact derivatives when run
/// on jets.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Real for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn from_f64(c: f64) -> Self {
        Self::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        Jet::sin(self)
    }
    fn cos(self) -> Self {
        Jet::cos(self)
    }
    fn tan(self) -> Self {
        Jet::tan(self)
    }
    fn sinh(self) -> Self {
        Jet::sinh(self)
    }
    fn cosh(self) -> Self {
        Jet::cosh(self)
    }
    fn exp(self) -> Self {
        Jet::exp(self)
    }
    fn ln(self) -> Self {
        Jet::ln(self)
    }
    fn sqrt(self) -> Self {
        Jet::sqrt(self)
    }
    fn powi(self, k: i32) -> Self {
        Jet::powi(self, k)
    }
    fn powf(self, p: f64) -> Self {
        Jet::powf(self, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let d2 = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h)
            - f(x + 2.0 * h))
            / (12.0 * h * h);
        (d1, d2)
    }

    #[test]
    fn univariate_derivatives_match_finite_differences() {
        let f = |t: Jet1| (t.sin() * t.exp() + t.powi(3)) / (t * t + 1.0) + t.sqrt().ln();
        let fv = |t: f64| (t.sin() * t.exp() + t.powi(3)) / (t * t + 1.0) + t.sqrt().ln();
        for &x in &[0.3, 1.1, 2.5] {
            let j = f(Jet1::var(x));
            let (d1, d2) = fd1(fv, x);
            assert!((j.v - fv(x)).abs() < 1e-14);
            assert!((j.d1() - d1).abs() < 1e-8, "{} vs {}", j.d1(), d1);
            assert!((j.d2() - d2).abs() < 1e-6, "{} vs {}", j.d2(), d2);
        }
    }

    #[test]
    fn mixed_partials_are_symmetric_and_correct() {
        // f(x, y) = x^2 y + sin(x y)
        let (x, y) = (0.7, -1.3);
        let jx = Jet::<2>::variable(x, 0);
        let jy = Jet::<2>::variable(y, 1);
        let f = jx * jx * jy + (jx * jy).sin();
        let c = (x * y).cos();
        let s = (x * y).sin();
        assert!((f.g[0] - (2.0 * x * y + y * c)).abs() < 1e-14);
        assert!((f.g[1] - (x * x + x * c)).abs() < 1e-14);
        assert!((f.h[0][1] - (2.0 * x + c - x * y * s)).abs() < 1e-14);
        assert_eq!(f.h[0][1], f.h[1][0]);
        assert!((f.h[1][1] - (-x * x * s)).abs() < 1e-14);
    }

    #[test]
    fn compose_applies_chain_rule() {
        // outer(u) = u^3 around u = 4, inner(t) = t^2 at t = 2
        let outer = Jet1::new(64.0, 48.0, 24.0);
        let inner = Jet1::var(2.0).powi(2);
        let c = outer.compose(inner);
        // (t^6)' = 6 t^5 = 192, (t^6)'' = 30 t^4 = 480
        assert_eq!(c.v, 64.0);
        assert!((c.d1() - 192.0).abs() < 1e-12);
        assert!((c.d2() - 480.0).abs() < 1e-12);
    }
}
