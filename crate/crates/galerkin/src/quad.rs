//! Quad-double floating point: an unevaluated sum of four f64 limbs with
//! about 212 bits of significand.
//!
//! Used where binary64 runs out of digits, chiefly to observe the
//! convergence of the Galerkin solution past 1e-16. Not rigorous.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Qd(pub [f64; 4]);

/// Relative precision of a normalized quad-double.
pub const QD_EPS: f64 = 1.2e-63;

pub const QD_PI: Qd = Qd([std::f64::consts::PI, 1.2246467991473532e-16, -2.9947698097183397e-33, 1.1124542208633653e-49]);
pub const QD_LN2: Qd = Qd([std::f64::consts::LN_2, 2.3190468138462996e-17, 5.707708438416212e-34, -3.5824322106018114e-50]);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> Qd {
    let (s, c3) = quick_two_sum(c2, c3);
    let (s, c2) = quick_two_sum(c1, s);
    let (c0, c1) = quick_two_sum(c0, s);
    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
        }
    }
    Qd([s0, s1, s2, s3])
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Qd {
    let (s, c4) = quick_two_sum(c3, c4);
    let (s, c3) = quick_two_sum(c2, s);
    let (s, c2) = quick_two_sum(c1, s);
    let (c0, c1) = quick_two_sum(c0, s);
    let (mut s0, mut s1) = quick_two_sum(c0, c1);
    let (mut s2, mut s3) = (0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                (s2, s3) = quick_two_sum(s2, c4);
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    Qd([s0, s1, s2, s3])
}

impl Qd {
    pub const ZERO: Qd = Qd([0.0; 4]);
    pub const ONE: Qd = Qd([1.0, 0.0, 0.0, 0.0]);

    pub fn from_f64(x: f64) -> Qd {
        Qd([x, 0.0, 0.0, 0.0])
    }

    pub fn to_f64(self) -> f64 {
        self.0[0] + (self.0[1] + (self.0[2] + self.0[3]))
    }

    pub fn hi(self) -> f64 {
        self.0[0]
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Multiplication by a power of two, exact.
    pub fn ldexp(self, e: i32) -> Qd {
        let f = 2f64.powi(e);
        Qd(self.0.map(|v| v * f))
    }

    pub fn abs(self) -> Qd {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Qd {
        Qd::ONE / self
    }

    pub fn mul_f64(self, b: f64) -> Qd {
        let (p0, q0) = two_prod(self.0[0], b);
        let (p1, q1) = two_prod(self.0[1], b);
        let (p2, q2) = two_prod(self.0[2], b);
        let p3 = self.0[3] * b;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (t1, t2) = two_sum(q1, q2);
        let (s3, t3) = two_sum(p3, t1);
        let s4 = t2 + t3 + p2;
        renorm5(p0, s1, s2, s3, s4)
    }

    pub fn sqr(self) -> Qd {
        self * self
    }

    pub fn sqrt(self) -> Qd {
        if self.0[0] == 0.0 {
            return Qd::ZERO;
        }
        if self.0[0] < 0.0 {
            return Qd::from_f64(f64::NAN);
        }
        let mut y = Qd::from_f64(self.0[0].sqrt());
        for _ in 0..3 {
            y = (y + self / y).ldexp(-1);
        }
        y
    }

    fn round_f64(self) -> f64 {
        // nearest integer to a value whose magnitude fits in the top limb
        let r = self.0[0].round();
        let d = (self - Qd::from_f64(r)).to_f64();
        if d > 0.5 {
            r + 1.0
        } else if d < -0.5 {
            r - 1.0
        } else {
            r
        }
    }

    pub fn exp(self) -> Qd {
        if self.0[0] > 709.0 {
            return Qd::from_f64(f64::INFINITY);
        }
        if self.0[0] < -745.0 {
            return Qd::ZERO;
        }
        let k = (self / QD_LN2).round_f64();
        let r = (self - QD_LN2.mul_f64(k)).ldexp(-10);
        // expm1(r) by Taylor series, then squared back up as s ↦ s(2 + s)
        let mut term = r;
        let mut s = r;
        let mut i = 2.0;
        loop {
            term = (term * r) / Qd::from_f64(i);
            s = s + term;
            if term.0[0].abs() <= 1e-70 * s.0[0].abs().max(1e-300) {
                break;
            }
            i += 1.0;
        }
        for _ in 0..10 {
            s = s * (s + Qd::from_f64(2.0));
        }
        (s + Qd::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Qd {
        if !(self.0[0] > 0.0) {
            return Qd::from_f64(if self.0[0] == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let mut y = Qd::from_f64(self.0[0].ln());
        for _ in 0..3 {
            y = y + self * (-y).exp() - Qd::ONE;
        }
        y
    }

    /// sin and cos of |r| ≤ π/4 by Taylor series.
    fn sin_cos_reduced(r: Qd) -> (Qd, Qd) {
        let r2 = r * r;
        let mut term = r;
        let mut s = r;
        let mut i = 1.0;
        while term.0[0].abs() > 1e-70 {
            term = -(term * r2) / Qd::from_f64((2.0 * i) * (2.0 * i + 1.0));
            s = s + term;
            i += 1.0;
        }
        let mut term = Qd::ONE;
        let mut c = Qd::ONE;
        let mut i = 1.0;
        while term.0[0].abs() > 1e-70 {
            term = -(term * r2) / Qd::from_f64((2.0 * i - 1.0) * (2.0 * i));
            c = c + term;
            i += 1.0;
        }
        (s, c)
    }

    pub fn sin_cos(self) -> (Qd, Qd) {
        let half_pi = QD_PI.ldexp(-1);
        let k = (self / half_pi).round_f64();
        let r = self - half_pi.mul_f64(k);
        let (s, c) = Qd::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Qd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Qd {
        self.sin_cos().1
    }

    pub fn tan(self) -> Qd {
        let (s, c) = self.sin_cos();
        s / c
    }

    fn asin_newton(self) -> Qd {
        let mut t = Qd::from_f64(self.0[0].asin());
        for _ in 0..3 {
            let (s, c) = t.sin_cos();
            t = t - (s - self) / c;
        }
        t
    }

    pub fn asin(self) -> Qd {
        let a = self.abs();
        if a.0[0] > 1.0 {
            return Qd::from_f64(f64::NAN);
        }
        if a.0[0] <= 0.75 {
            return self.asin_newton();
        }
        // asin|x| = π/2 - 2 asin √((1-|x|)/2)
        let r = QD_PI.ldexp(-1) - ((Qd::ONE - a).ldexp(-1).sqrt().asin_newton()).ldexp(1);
        if self.0[0] < 0.0 {
            -r
        } else {
            r
        }
    }

    pub fn acos(self) -> Qd {
        if self.abs().0[0] > 1.0 {
            return Qd::from_f64(f64::NAN);
        }
        if self.0[0] > 0.5 {
            (Qd::ONE - self).ldexp(-1).sqrt().asin_newton().ldexp(1)
        } else if self.0[0] < -0.5 {
            QD_PI - (Qd::ONE + self).ldexp(-1).sqrt().asin_newton().ldexp(1)
        } else {
            QD_PI.ldexp(-1) - self.asin_newton()
        }
    }

    pub fn powi(self, n: i32) -> Qd {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Qd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Decimal digits of the value in scientific notation.
    pub fn to_sci_string(self, digits: usize) -> String {
        if self.0[0] == 0.0 {
            return "0".to_string();
        }
        if !self.is_finite() {
            return format!("{}", self.0[0]);
        }
        let neg = self.0[0] < 0.0;
        let mut x = self.abs();
        let mut e = x.0[0].log10().floor() as i32;
        x = x * Qd::from_f64(10.0).powi(-e);
        if x.0[0] >= 10.0 {
            x = x / Qd::from_f64(10.0);
            e += 1;
        } else if x.0[0] < 1.0 {
            x = x * Qd::from_f64(10.0);
            e -= 1;
        }
        let mut ds = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let d = x.0[0].floor().clamp(0.0, 9.0);
            ds.push(d as u8);
            x = (x - Qd::from_f64(d)) * Qd::from_f64(10.0);
        }
        // round on the extra digit
        if ds[digits] >= 5 {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    e += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
        ds.truncate(digits);
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push((b'0' + ds[0]) as char);
        if digits > 1 {
            s.push('.');
            s.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
        }
        s.push_str(&format!("e{e}"));
        s
    }
}

impl From<f64> for Qd {
    fn from(x: f64) -> Qd {
        Qd::from_f64(x)
    }
}

impl Neg for Qd {
    type Output = Qd;
    fn neg(self) -> Qd {
        Qd(self.0.map(|v| -v))
    }
}

/// Sum whose magnitude ordering of the inputs is resolved as it goes.
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, bb) = two_sum(*b, c);
    let (s, aa) = two_sum(*a, s);
    *a = aa;
    *b = bb;
    let za = *a != 0.0;
    let zb = *b != 0.0;
    if za && zb {
        return s;
    }
    if !zb {
        *b = *a;
        *a = s;
    } else {
        *a = s;
    }
    0.0
}

impl Add for Qd {
    type Output = Qd;
    fn add(self, b: Qd) -> Qd {
        let (a, b) = (self.0, b.0);
        let (mut i, mut j) = (0, 0);
        let pick = |i: &mut usize, j: &mut usize| -> f64 {
            if *i >= 4 {
                *j += 1;
                b[*j - 1]
            } else if *j >= 4 || a[*i].abs() > b[*j].abs() {
                *i += 1;
                a[*i - 1]
            } else {
                *j += 1;
                b[*j - 1]
            }
        };
        let mut u = pick(&mut i, &mut j);
        let mut v = pick(&mut i, &mut j);
        (u, v) = quick_two_sum(u, v);
        let mut x = [0.0; 4];
        let mut k = 0;
        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    x[k + 1] = v;
                }
                break;
            }
            let t = pick(&mut i, &mut j);
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &r in &a[i.min(4)..] {
            x[3] += r;
        }
        for &r in &b[j.min(4)..] {
            x[3] += r;
        }
        renorm4(x[0], x[1], x[2], x[3])
    }
}

impl Sub for Qd {
    type Output = Qd;
    fn sub(self, b: Qd) -> Qd {
        self + (-b)
    }
}

impl Mul for Qd {
    type Output = Qd;
    fn mul(self, b: Qd) -> Qd {
        let (a, b) = (self.0, b.0);
        let (p0, q0) = two_prod(a[0], b[0]);
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        let (p1, p2, q0) = three_sum(p1, p2, q0);

        // (p2, q1, q2) + (p3, p4, p5)
        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;

        let (p6, q6) = two_prod(a[0], b[3]);
        let (p7, q7) = two_prod(a[1], b[2]);
        let (p8, q8) = two_prod(a[2], b[1]);
        let (p9, q9) = two_prod(a[3], b[0]);

        let (q0, q3) = two_sum(q0, q3);
        let (q4, q5) = two_sum(q4, q5);
        let (p6, p7) = two_sum(p6, p7);
        let (p8, p9) = two_sum(p8, p9);
        let (t0, mut t1) = two_sum(q0, q4);
        t1 += q3 + q5;
        let (r0, mut r1) = two_sum(p6, p8);
        r1 += p7 + p9;
        let (q3, mut q4) = two_sum(t0, r0);
        q4 += t1 + r1;
        let (t0, mut t1) = two_sum(q3, s1);
        t1 += q4;

        t1 += a[1] * b[3] + a[2] * b[2] + a[3] * b[1] + q6 + q7 + q8 + q9 + s2;
        renorm5(p0, p1, s0, t0, t1)
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, b: Qd) -> Qd {
        let q0 = self.0[0] / b.0[0];
        let mut r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b.0[0];
        r = r - b.mul_f64(q1);
        let q2 = r.0[0] / b.0[0];
        r = r - b.mul_f64(q2);
        let q3 = r.0[0] / b.0[0];
        r = r - b.mul_f64(q3);
        let q4 = r.0[0] / b.0[0];
        renorm5(q0, q1, q2, q3, q4)
    }
}

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Qd) -> Option<Ordering> {
        (*self - *other).0[0].partial_cmp(&0.0)
    }
}

impl fmt::Display for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(63);
        f.write_str(&self.to_sci_string(digits.max(1)))
    }
}

impl Scalar for Qd {
    fn cst(c: f64) -> Self {
        Qd::from_f64(c)
    }
    fn pi() -> Self {
        QD_PI
    }
    fn sin(self) -> Self {
        Qd::sin(self)
    }
    fn cos(self) -> Self {
        Qd::cos(self)
    }
    fn tan(self) -> Self {
        Qd::tan(self)
    }
    fn exp(self) -> Self {
        Qd::exp(self)
    }
    fn ln(self) -> Self {
        Qd::ln(self)
    }
    fn sqrt(self) -> Self {
        Qd::sqrt(self)
    }
    fn abs(self) -> Self {
        Qd::abs(self)
    }
    fn acos(self) -> Self {
        Qd::acos(self)
    }
    fn asin(self) -> Self {
        Qd::asin(self)
    }
    fn powi(self, n: i32) -> Self {
        Qd::powi(self, n)
    }
}
