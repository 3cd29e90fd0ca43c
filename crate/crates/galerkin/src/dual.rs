//! Forward-mode dual numbers.
//!
//! `Dual<Dual<f64>>` carries second derivatives: seed with [`Dual2::variable`]
//! and read back value, first and second derivative.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn variable(x: T) -> Self {
        Dual { re: x, eps: T::cst(1.0) }
    }

    pub fn constant(x: T) -> Self {
        Dual { re: x, eps: T::cst(0.0) }
    }

    fn chain(self, f: T, df: T) -> Self {
        Dual { re: f, eps: df * self.eps }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: self.eps + o.eps }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: self.eps - o.eps }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, eps: self.eps * o.re + self.re * o.eps }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual { re: q, eps: (self.eps - q * o.eps) / o.re }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: -self.eps }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(c: f64) -> Self {
        Dual::constant(T::cst(c))
    }
    fn literal(c: f64, exact: bool) -> Self {
        Dual::constant(T::literal(c, exact))
    }
    fn pi() -> Self {
        Dual::constant(T::pi())
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::cst(1.0) + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::cst(1.0) / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
    fn abs(self) -> Self {
        let a = self.re.abs();
        self.chain(a, self.re / a)
    }
    fn acos(self) -> Self {
        let d = -(T::cst(1.0) - self.re * self.re).sqrt();
        self.chain(self.re.acos(), T::cst(1.0) / d)
    }
    fn asin(self) -> Self {
        let d = (T::cst(1.0) - self.re * self.re).sqrt();
        self.chain(self.re.asin(), T::cst(1.0) / d)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::cst(1.0);
        }
        let pm1 = self.re.powi(n - 1);
        self.chain(pm1 * self.re, T::cst(n as f64) * pm1)
    }
}

/// Second-order forward mode by nesting.
pub type Dual2<T> = Dual<Dual<T>>;

impl<T: Scalar> Dual<Dual<T>> {
    pub fn seed(x: T) -> Self {
        Dual { re: Dual::variable(x), eps: Dual::constant(T::cst(1.0)) }
    }

    /// (f, f', f'')
    pub fn parts(self) -> (T, T, T) {
        (self.re.re, self.re.eps, self.eps.eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_of_cubic() {
        let x = Dual2::seed(1.5_f64);
        let (f, d1, d2) = (x * x * x).parts();
        assert!((f - 3.375).abs() < 1e-15);
        assert!((d1 - 6.75).abs() < 1e-15);
        assert!((d2 - 9.0).abs() < 1e-15);
    }

    #[test]
    fn chain_through_transcendentals() {
        let t = 0.3_f64;
        let (f, d1, d2) = Dual2::seed(t).sin().exp().parts();
        let e = t.sin().exp();
        assert!((f - e).abs() < 1e-15);
        assert!((d1 - e * t.cos()).abs() < 1e-15);
        let expect = e * (t.cos() * t.cos() - t.sin());
        assert!((d2 - expect).abs() < 1e-14);
    }
}
