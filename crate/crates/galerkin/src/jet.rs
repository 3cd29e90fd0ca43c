//! Truncated Taylor series ("jets") of fixed length `K`.
//!
//! `c[i]` holds f^(i)(x0)/i!. Used where more than two derivatives are needed:
//! higher-order distortion constants, the entry-bound recurrence checks and,
//! over intervals, derivative enclosures on a whole range (seed the variable
//! with an interval and every coefficient encloses the derivative anywhere
//! in it).

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const K: usize, T = f64> {
    pub c: [T; K],
}

fn zero<T: Scalar>() -> T {
    T::cst(0.0)
}

impl<const K: usize, T: Scalar> Jet<K, T> {
    pub fn constant(v: T) -> Self {
        let mut c = [zero(); K];
        c[0] = v;
        Jet { c }
    }

    pub fn variable(x0: T) -> Self {
        let mut c = [zero(); K];
        c[0] = x0;
        if K > 1 {
            c[1] = T::cst(1.0);
        }
        Jet { c }
    }

    /// n-th derivative at the expansion point.
    pub fn derivative(&self, n: usize) -> T {
        let mut fact = 1.0;
        for i in 2..=n {
            fact *= i as f64;
        }
        self.c[n] * T::cst(fact)
    }

    fn without_constant(mut self) -> Self {
        self.c[0] = zero();
        self
    }

    /// Evaluates the series `outer` (Taylor coefficients about `inner.c[0]`)
    /// at `inner`, i.e. composes outer ∘ inner.
    pub fn compose(outer: &[T; K], inner: Self) -> Self {
        let d = inner.without_constant();
        let mut acc = Jet::constant(outer[K - 1]);
        for i in (0..K - 1).rev() {
            acc = acc * d;
            acc.c[0] = acc.c[0] + outer[i];
        }
        acc
    }

    /// Series reversion: from the jet of f at x0 returns the jet of f⁻¹ at f(x0).
    pub fn revert(self, x0: T) -> Self {
        let a = self.c;
        let mut t = [zero(); K];
        if K == 1 {
            t[0] = x0;
            return Jet { c: t };
        }
        t[1] = T::cst(1.0) / a[1];
        for n in 2..K {
            // coefficient n of Σ_{i≥1} a_i t(s)^i with t_n still zero
            let tj = Jet { c: t };
            let mut pow = tj;
            let mut coef: T = zero();
            for ai in a.iter().take(n + 1).skip(2) {
                pow = pow * tj;
                coef = coef + *ai * pow.c[n];
            }
            coef = coef + a[1] * t[n];
            t[n] = -coef / a[1];
        }
        t[0] = x0;
        Jet { c: t }
    }
}

impl<const K: usize, T: Scalar> Add for Jet<K, T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut c = self.c;
        for (ci, oi) in c.iter_mut().zip(o.c) {
            *ci = *ci + oi;
        }
        Jet { c }
    }
}

impl<const K: usize, T: Scalar> Sub for Jet<K, T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut c = self.c;
        for (ci, oi) in c.iter_mut().zip(o.c) {
            *ci = *ci - oi;
        }
        Jet { c }
    }
}

impl<const K: usize, T: Scalar> Neg for Jet<K, T> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for ci in c.iter_mut() {
            *ci = -*ci;
        }
        Jet { c }
    }
}

impl<const K: usize, T: Scalar> Mul for Jet<K, T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [zero(); K];
        for n in 0..K {
            let mut s: T = zero();
            for i in 0..=n {
                s = s + self.c[i] * o.c[n - i];
            }
            c[n] = s;
        }
        Jet { c }
    }
}

impl<const K: usize, T: Scalar> Div for Jet<K, T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [zero(); K];
        for n in 0..K {
            let mut s = self.c[n];
            for i in 1..=n {
                s = s - o.c[i] * q[n - i];
            }
            q[n] = s / o.c[0];
        }
        Jet { c: q }
    }
}

impl<const K: usize, T: Scalar> Jet<K, T> {
    fn sin_cos(self) -> (Self, Self) {
        let a = self.c;
        let mut s = [zero(); K];
        let mut c = [zero(); K];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for n in 1..K {
            let (mut ss, mut cc) = (zero::<T>(), zero::<T>());
            for i in 1..=n {
                ss = ss + T::cst(i as f64) * a[i] * c[n - i];
                cc = cc - T::cst(i as f64) * a[i] * s[n - i];
            }
            s[n] = ss / T::cst(n as f64);
            c[n] = cc / T::cst(n as f64);
        }
        (Jet { c: s }, Jet { c })
    }

    /// y with y' = a' g, y(x0) = y0.
    fn integrate_against(self, g: Self, y0: T) -> Self {
        let a = self.c;
        let mut y = [zero(); K];
        y[0] = y0;
        for n in 1..K {
            let mut s: T = zero();
            for i in 1..=n {
                s = s + T::cst(i as f64) * a[i] * g.c[n - i];
            }
            y[n] = s / T::cst(n as f64);
        }
        Jet { c: y }
    }
}

impl<const K: usize, T: Scalar> Scalar for Jet<K, T> {
    fn cst(v: f64) -> Self {
        Jet::constant(T::cst(v))
    }
    fn literal(v: f64, exact: bool) -> Self {
        Jet::constant(T::literal(v, exact))
    }
    fn pi() -> Self {
        Jet::constant(T::pi())
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos();
        s / c
    }
    fn exp(self) -> Self {
        let a = self.c;
        let mut e = [zero(); K];
        e[0] = a[0].exp();
        for n in 1..K {
            let mut s: T = zero();
            for i in 1..=n {
                s = s + T::cst(i as f64) * a[i] * e[n - i];
            }
            e[n] = s / T::cst(n as f64);
        }
        Jet { c: e }
    }
    fn ln(self) -> Self {
        let a = self.c;
        let mut l = [zero(); K];
        l[0] = a[0].ln();
        for n in 1..K {
            let mut s: T = zero();
            for i in 1..n {
                s = s + T::cst(i as f64) * l[i] * a[n - i];
            }
            l[n] = (a[n] - s / T::cst(n as f64)) / a[0];
        }
        Jet { c: l }
    }
    fn sqrt(self) -> Self {
        let a = self.c;
        let mut r = [zero(); K];
        r[0] = a[0].sqrt();
        for n in 1..K {
            let mut s = a[n];
            for i in 1..n {
                s = s - r[i] * r[n - i];
            }
            r[n] = s / (T::cst(2.0) * r[0]);
        }
        Jet { c: r }
    }
    // the sign is |c₀|/c₀: exact ±1 for floats, an enclosure of 1 or −1 for
    // intervals that do not contain zero, and undefined at zero
    fn abs(self) -> Self {
        let s = self.c[0].abs() / self.c[0];
        let mut c = self.c;
        for ci in c.iter_mut() {
            *ci = *ci * s;
        }
        c[0] = self.c[0].abs();
        Jet { c }
    }
    fn asin(self) -> Self {
        let one = Jet::constant(T::cst(1.0));
        let g = one / (one - self * self).sqrt();
        self.integrate_against(g, self.c[0].asin())
    }
    fn acos(self) -> Self {
        let one = Jet::constant(T::cst(1.0));
        let g = -(one / (one - self * self).sqrt());
        self.integrate_against(g, self.c[0].acos())
    }
    fn powi(self, n: i32) -> Self {
        let one = Jet::constant(T::cst(1.0));
        let mut base = if n < 0 { one / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = one;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_series_coefficients() {
        let j = Jet::<6>::variable(0.0).exp();
        let mut fact = 1.0;
        for (n, c) in j.c.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((c - 1.0 / fact).abs() < 1e-15);
        }
    }

    #[test]
    fn reversion_of_exp_is_log() {
        let x0 = 0.4;
        let f = Jet::<7>::variable(x0).exp();
        let inv = f.revert(x0);
        let y0 = x0.exp();
        let log = Jet::<7>::variable(y0).ln();
        for n in 0..7 {
            assert!((inv.c[n] - log.c[n]).abs() < 1e-12 * (1.0 + log.c[n].abs()), "n={n}");
        }
    }

    #[test]
    fn acos_derivatives_match_closed_form() {
        let x0 = 0.3_f64;
        let j = Jet::<4>::variable(x0).acos();
        let d1 = -1.0 / (1.0 - x0 * x0).sqrt();
        let d2 = -x0 / (1.0 - x0 * x0).powf(1.5);
        assert!((j.derivative(1) - d1).abs() < 1e-14);
        assert!((j.derivative(2) - d2).abs() < 1e-14);
    }
}
