//! Numeric types that expression trees can be evaluated over.
//!
//! Map definitions are evaluated at plain floats, nested dual numbers,
//! Taylor jets, complex numbers and intervals through this one trait.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;

    /// A decimal literal from source text. `exact` is false when the literal
    /// was rounded on conversion to binary, so enclosing types can widen it.
    fn literal(c: f64, exact: bool) -> Self {
        let _ = exact;
        Self::cst(c)
    }

    fn pi() -> Self {
        Self::cst(std::f64::consts::PI)
    }

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn acos(self) -> Self;
    fn asin(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
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
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn asin(self) -> Self {
        f64::asin(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for Complex64 {
    fn cst(c: f64) -> Self {
        Complex64::new(c, 0.0)
    }
    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn tan(self) -> Self {
        Complex64::tan(self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    // Not holomorphic. Callers reject expressions using `abs` before
    // evaluating off the real line.
    fn abs(self) -> Self {
        Complex64::new(self.norm(), 0.0)
    }
    fn acos(self) -> Self {
        Complex64::acos(self)
    }
    fn asin(self) -> Self {
        Complex64::asin(self)
    }
    fn powi(self, n: i32) -> Self {
        Complex64::powi(&self, n)
    }
    fn powf(self, e: Self) -> Self {
        Complex64::powc(self, e)
    }
}
