//! Closed intervals of binary64 numbers with outward rounding.
//!
//! Arithmetic and square roots round each end in its direction exactly:
//! the round-to-nearest result is moved by one ulp only when its exact error
//! points the wrong way, so exact operations do not widen. Library
//! transcendental functions are assumed accurate to within one ulp and are
//! widened by two.
//!
//! Operations outside the domain (division by an interval containing zero,
//! log of a non-positive interval, ...) produce a poisoned interval whose ends
//! are NaN. Poison propagates; [`Interval::is_valid`] detects it and the
//! checked entry points report it as an error.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_nan() {
        x
    } else {
        x.next_down()
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_nan() {
        x
    } else {
        x.next_up()
    }
}

#[inline]
fn down2(x: f64) -> f64 {
    down(down(x))
}

#[inline]
fn up2(x: f64) -> f64 {
    up(up(x))
}

impl Interval {
    pub const POISON: Interval = Interval { lo: f64::NAN, hi: f64::NAN };

    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Self::POISON;
        }
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Symmetric interval [-r, r].
    pub fn radius(r: f64) -> Self {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    /// Smallest interval containing the real number written as `x` after
    /// an inexact conversion.
    pub fn around(x: f64) -> Self {
        Interval { lo: down(x), hi: up(x) }
    }

    pub fn is_valid(&self) -> bool {
        !self.lo.is_nan() && !self.hi.is_nan() && self.lo <= self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn subset_of(&self, o: &Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    pub fn width(&self) -> f64 {
        up(self.hi - self.lo)
    }

    /// Upper bound on |x| over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }

    /// Intersection; `None` when empty.
    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn checked_div(self, o: Interval) -> Result<Interval> {
        if !o.is_valid() || o.contains_zero() {
            return Err(Error::Domain(format!("interval division by {o:?}")));
        }
        Ok(self / o)
    }

    pub fn checked(self, what: &str) -> Result<Interval> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::Domain(format!("{what}: operation left its domain")))
        }
    }

    fn from_bounds(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            Self::POISON
        } else {
            Interval { lo, hi }
        }
    }

    /// Enclosure of cos on [lo, hi] with `shift` = 0, or sin with shift = π/2
    /// (sin x = cos(x - π/2)).
    fn cos_like(self, shift_half_pi: bool) -> Self {
        if !self.is_valid() {
            return Self::POISON;
        }
        let f = |x: f64| if shift_half_pi { x.sin() } else { x.cos() };
        if !(self.hi - self.lo < 2.0 * PI) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        // Extremum positions in units of π: cos has maxima at 2kπ and minima
        // at (2k+1)π; sin has them shifted by +π/2. Tests use a slightly
        // widened range so rounding can only make the answer more
        // conservative.
        let offset = if shift_half_pi { 0.5 } else { 0.0 };
        let slack = 1e-12 * (1.0 + self.lo.abs().max(self.hi.abs()));
        let a = (self.lo - slack) / PI - offset;
        let b = (self.hi + slack) / PI - offset;
        let mut has_max = false;
        let mut has_min = false;
        let mut k = a.ceil();
        while k <= b {
            if (k as i64).rem_euclid(2) == 0 {
                has_max = true;
            } else {
                has_min = true;
            }
            k += 1.0;
        }
        let (fa, fb) = (f(self.lo), f(self.hi));
        let lo = if has_min { -1.0 } else { down2(fa.min(fb)).max(-1.0) };
        let hi = if has_max { 1.0 } else { up2(fa.max(fb)).min(1.0) };
        Interval { lo, hi }
    }

    fn pos_powi(self, n: u32) -> Self {
        // self is non-negative here, so products are monotone.
        let mut acc = Interval::point(1.0);
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Interval { lo: acc.lo.max(0.0), hi: acc.hi }
    }
}

// Directed rounding from the round-to-nearest result and its exact error
// (TwoSum for sums, FMA for products, quotients and square roots). The error
// terms are exact unless the operands are tiny, where a plain one-ulp step
// is taken instead.
const TINY: f64 = 1e-280;

#[inline]
fn sum_error(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
fn add_dir(a: f64, b: f64, upward: bool) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if upward { up(s) } else { down(s) };
    }
    let e = sum_error(a, b, s);
    match (upward, e) {
        (true, e) if e > 0.0 => s.next_up(),
        (false, e) if e < 0.0 => s.next_down(),
        _ => s,
    }
}

#[inline]
fn mul_dir(a: f64, b: f64, upward: bool) -> f64 {
    let p = prod(a, b);
    if p == 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    if !p.is_finite() || p.abs() < TINY {
        return if upward { up(p) } else { down(p) };
    }
    let e = a.mul_add(b, -p);
    match (upward, e) {
        (true, e) if e > 0.0 => p.next_up(),
        (false, e) if e < 0.0 => p.next_down(),
        _ => p,
    }
}

#[inline]
fn div_dir(a: f64, b: f64, upward: bool) -> f64 {
    let q = a / b;
    if a == 0.0 && b != 0.0 && !b.is_nan() {
        return 0.0;
    }
    if !q.is_finite() || q.abs() < TINY || a.abs() < TINY || !b.is_finite() {
        return if upward { up(q) } else { down(q) };
    }
    // a/b − q has the sign of r/b
    let r = (-q).mul_add(b, a);
    let above = r != 0.0 && (r > 0.0) == (b > 0.0);
    let below = r != 0.0 && !above;
    if upward && above {
        q.next_up()
    } else if !upward && below {
        q.next_down()
    } else {
        q
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::from_bounds(add_dir(self.lo, o.lo, false), add_dir(self.hi, o.hi, true))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::from_bounds(add_dir(self.lo, -o.hi, false), add_dir(self.hi, -o.lo, true))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

fn prod(a: f64, b: f64) -> f64 {
    // 0 * inf stays 0 for interval purposes
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Indices of the smallest and largest of four candidates.
fn extremes(p: &[f64; 4]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for i in 1..4 {
        if p[i] < p[lo] {
            lo = i;
        }
        if p[i] > p[hi] {
            hi = i;
        }
    }
    (lo, hi)
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        if !self.is_valid() || !o.is_valid() {
            return Interval::POISON;
        }
        let pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let p = pairs.map(|(a, b)| prod(a, b));
        let (i, j) = extremes(&p);
        // ties between candidates can hide a more extreme exact product
        let lo = pairs.iter().zip(&p).filter(|(_, v)| **v == p[i]).map(|((a, b), _)| mul_dir(*a, *b, false)).fold(f64::INFINITY, f64::min);
        let hi =
            pairs.iter().zip(&p).filter(|(_, v)| **v == p[j]).map(|((a, b), _)| mul_dir(*a, *b, true)).fold(f64::NEG_INFINITY, f64::max);
        Interval::from_bounds(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        if !self.is_valid() || !o.is_valid() || o.contains_zero() {
            return Interval::POISON;
        }
        let pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let q = pairs.map(|(a, b)| a / b);
        let (i, j) = extremes(&q);
        let lo = pairs.iter().zip(&q).filter(|(_, v)| **v == q[i]).map(|((a, b), _)| div_dir(*a, *b, false)).fold(f64::INFINITY, f64::min);
        let hi =
            pairs.iter().zip(&q).filter(|(_, v)| **v == q[j]).map(|((a, b), _)| div_dir(*a, *b, true)).fold(f64::NEG_INFINITY, f64::max);
        Interval::from_bounds(lo, hi)
    }
}

fn sqrt_dir(x: f64, upward: bool) -> f64 {
    let s = x.sqrt();
    if !s.is_finite() || x < TINY {
        return if upward { up(s) } else { down(s) };
    }
    let r = (-s).mul_add(s, x);
    match (upward, r) {
        (true, r) if r > 0.0 => s.next_up(),
        (false, r) if r < 0.0 => s.next_down(),
        _ => s,
    }
}

impl Scalar for Interval {
    fn cst(c: f64) -> Self {
        Interval::point(c)
    }

    fn literal(c: f64, exact: bool) -> Self {
        if exact {
            Interval::point(c)
        } else {
            Interval::around(c)
        }
    }

    fn pi() -> Self {
        // The binary64 value of PI lies below π by less than one ulp.
        Interval { lo: PI, hi: up(PI) }
    }

    fn sin(self) -> Self {
        self.cos_like(true)
    }

    fn cos(self) -> Self {
        self.cos_like(false)
    }

    fn tan(self) -> Self {
        if !self.is_valid() {
            return Self::POISON;
        }
        // poles at π/2 + kπ
        let a = self.lo / PI - 0.5;
        let b = self.hi / PI - 0.5;
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if (a - slack).ceil() <= b + slack {
            return Self::POISON;
        }
        Interval::from_bounds(down2(self.lo.tan()), up2(self.hi.tan()))
    }

    fn exp(self) -> Self {
        if !self.is_valid() {
            return Self::POISON;
        }
        Interval::from_bounds(down2(self.lo.exp()).max(0.0), up2(self.hi.exp()))
    }

    fn ln(self) -> Self {
        if !self.is_valid() || self.lo <= 0.0 {
            return Self::POISON;
        }
        Interval::from_bounds(down2(self.lo.ln()), up2(self.hi.ln()))
    }

    fn sqrt(self) -> Self {
        if !self.is_valid() || self.hi < 0.0 {
            return Self::POISON;
        }
        let lo = if self.lo <= 0.0 { 0.0 } else { sqrt_dir(self.lo, false).max(0.0) };
        Interval::from_bounds(lo, sqrt_dir(self.hi, true))
    }

    fn abs(self) -> Self {
        if !self.is_valid() {
            return Self::POISON;
        }
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    fn acos(self) -> Self {
        if !self.is_valid() || self.lo > 1.0 || self.hi < -1.0 {
            return Self::POISON;
        }
        let lo_in = self.lo.max(-1.0);
        let hi_in = self.hi.min(1.0);
        let lo = down2(hi_in.acos()).max(0.0);
        let hi = if lo_in == -1.0 { Self::pi().hi } else { up2(lo_in.acos()) };
        Interval::from_bounds(lo, hi)
    }

    fn asin(self) -> Self {
        if !self.is_valid() || self.lo > 1.0 || self.hi < -1.0 {
            return Self::POISON;
        }
        let lo_in = self.lo.max(-1.0);
        let hi_in = self.hi.min(1.0);
        Interval::from_bounds(down2(lo_in.asin()), up2(hi_in.asin()))
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Interval::point(1.0);
        }
        let m = n.unsigned_abs();
        let p = if m.is_multiple_of(2) {
            self.abs().pos_powi(m)
        } else if self.lo >= 0.0 {
            self.pos_powi(m)
        } else if self.hi <= 0.0 {
            -(-self).pos_powi(m)
        } else {
            // odd power is monotone
            let a = Interval::point(self.lo.abs()).pos_powi(m);
            let b = Interval::point(self.hi).pos_powi(m);
            Interval::from_bounds(-a.hi, b.hi)
        };
        if n < 0 {
            Interval::point(1.0) / p
        } else {
            p
        }
    }

    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_by_zero_interval_is_an_error() {
        let a = Interval::point(1.0);
        assert!(a.checked_div(Interval::new(-1.0, 1.0)).is_err());
        assert!(!(a / Interval::new(0.0, 1.0)).is_valid());
    }

    #[test]
    fn pi_is_enclosed() {
        let p = Interval::pi();
        assert!(p.lo < p.hi);
        assert_eq!(p.lo, PI);
    }

    #[test]
    fn cos_range_over_extremum() {
        let c = Interval::new(-0.1, 0.1).cos();
        assert_eq!(c.hi, 1.0);
        assert!(c.lo < 0.1_f64.cos());
        let s = Interval::new(1.0, 2.0).sin();
        assert_eq!(s.hi, 1.0);
    }

    #[test]
    fn even_power_of_straddling_interval() {
        let p = Interval::new(-1.0, 2.0).powi(2);
        assert_eq!(p.lo, 0.0);
        assert!(p.hi >= 4.0);
    }
}
