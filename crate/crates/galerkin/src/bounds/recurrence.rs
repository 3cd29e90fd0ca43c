//! The integration-by-parts weights W_{r,l} for differentiable maps.
//!
//! After r integrations by parts an entry integral has integrand
//! h_r = iʳ Σ_l kˡ w_{r,l} / (j − k v′)^{r+l}, where each w_{r,l} is a
//! polynomial in v″, v‴, … times derivatives of h. The polynomials are kept
//! with exact rational coefficients and only rounded (upward) when the
//! derivative bounds are substituted.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub const MAX_ORDER: usize = 8;

/// Monomial V₂^{e₀} V₃^{e₁} ⋯ h^{(d)}; V_m stands for v^{(m)}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    pub v_exponents: Vec<u32>,
    pub h_derivative: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    fn h(vars: usize) -> Poly {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial { v_exponents: vec![0; vars], h_derivative: 0 }, BigRational::one());
        Poly { terms }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        let e = self.terms.entry(m).or_insert_with(BigRational::zero);
        *e += c;
        // drop cancelled terms so equality checks are structural
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn add(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    /// d/dx with dV_m = V_{m+1} and d h^{(d)} = h^{(d+1)}.
    fn derivative(&self) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let vars = m.v_exponents.len();
            for i in 0..vars {
                let e = m.v_exponents[i];
                if e == 0 {
                    continue;
                }
                assert!(i + 1 < vars, "derivative order exceeds the tracked variables");
                let mut v = m.v_exponents.clone();
                v[i] -= 1;
                v[i + 1] += 1;
                out.add_term(Monomial { v_exponents: v, h_derivative: m.h_derivative }, c * BigRational::from_integer(BigInt::from(e)));
            }
            out.add_term(Monomial { v_exponents: m.v_exponents.clone(), h_derivative: m.h_derivative + 1 }, c.clone());
        }
        out
    }

    /// self · factor · v″.
    fn times_v2(&self, factor: u32) -> Poly {
        let mut out = Poly::default();
        let f = BigRational::from_integer(BigInt::from(factor));
        for (m, c) in &self.terms {
            let mut v = m.v_exponents.clone();
            v[0] += 1;
            out.add_term(Monomial { v_exponents: v, h_derivative: m.h_derivative }, c * &f);
        }
        out
    }

    /// Evaluates at v^{(m)} = `v[m-2]` and h^{(d)} = `h[d]`, as an interval.
    pub fn eval(&self, v: &[f64], h: &[f64]) -> Interval {
        self.terms.iter().fold(Interval::point(0.0), |acc, (m, c)| {
            let mut t = rational_interval(c);
            for (i, &e) in m.v_exponents.iter().enumerate() {
                if e > 0 {
                    t = t * Interval::point(v[i]).pow_u(e);
                }
            }
            acc + t * Interval::point(h[m.h_derivative as usize])
        })
    }

    /// Upper bound with every coefficient replaced by its absolute value
    /// and the variables by nonnegative bounds.
    fn abs_bound(&self, v: &[f64], h: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(Interval::point(0.0), |acc, (m, c)| {
                let mut t = rational_interval(&c.abs());
                for (i, &e) in m.v_exponents.iter().enumerate() {
                    if e > 0 {
                        t = t * Interval::point(v[i].abs()).pow_u(e);
                    }
                }
                acc + t * Interval::point(h[m.h_derivative as usize].abs())
            })
            .hi
    }
}

fn rational_interval(c: &BigRational) -> Interval {
    let x = c.to_f64().unwrap_or(f64::INFINITY);
    let exact = c.is_integer() && x.abs() < 2f64.powi(53);
    if exact {
        Interval::point(x)
    } else {
        Interval::around(x)
    }
}

trait PowU {
    fn pow_u(self, e: u32) -> Self;
}

impl PowU for Interval {
    fn pow_u(self, e: u32) -> Interval {
        (0..e).fold(Interval::point(1.0), |acc, _| acc * self)
    }
}

/// Which coefficient the diagonal step w_{n,n} uses. `Exact` is what the
/// product rule gives, (2n − 1) v″ w_{n−1,n−1}; `Conservative` uses 2n,
/// which only enlarges the bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagonal {
    Exact,
    Conservative,
}

/// w_{n,l} for 0 ≤ l ≤ n ≤ r, indexed `[n][l]`.
pub fn w_polynomials(r: usize, diagonal: Diagonal) -> Result<Vec<Vec<Poly>>> {
    if r == 0 || r > MAX_ORDER {
        return Err(Error::InvalidInput(format!("differentiability order must be in 1..={MAX_ORDER}, got {r}")));
    }
    // V₂..V_{r+2}; the last slot stays unused but keeps derivative() total
    let vars = r + 1;
    let mut table = vec![vec![Poly::h(vars)]];
    for n in 1..=r {
        let prev = &table[n - 1];
        let mut row = Vec::with_capacity(n + 1);
        for l in 0..=n {
            let mut w = if l < n { prev[l].derivative() } else { Poly::default() };
            if l > 0 {
                let factor = if l == n && diagonal == Diagonal::Conservative { 2 * n } else { n + l - 1 };
                w.add(&prev[l - 1].times_v2(factor as u32));
            }
            row.push(w);
        }
        table.push(row);
    }
    Ok(table)
}

/// W_{r,0..r}: bounds on |w_{r,l}|/|h| given Υ₁..Υ_r (|v^{(m+1)}| ≤ Υ_m)
/// and H₁..H_r (|h^{(m)}/h| ≤ H_m).
pub fn w_weights(upsilon: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let r = upsilon.len();
    if h.len() != r {
        return Err(Error::InvalidInput(format!("need as many H as Υ values ({r}), got {}", h.len())));
    }
    if upsilon.iter().chain(h).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidInput("distortion constants must be finite and nonnegative".into()));
    }
    let table = w_polynomials(r, Diagonal::Conservative)?;
    let mut v = upsilon.to_vec();
    v.push(0.0);
    let mut hs = vec![1.0];
    hs.extend_from_slice(h);
    Ok(table[r].iter().map(|p| p.abs_bound(&v, &hs)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: &[f64], want: &[f64]) -> bool {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| *g >= *w && *g <= w * (1.0 + 1e-14))
    }

    #[test]
    fn first_step_by_hand() {
        // w₁,₀ = h′ and w₁,₁ = 2 v″ h
        let w = w_weights(&[3.0], &[5.0]).unwrap();
        assert!(close(&w, &[5.0, 6.0]), "{w:?}");
    }

    #[test]
    fn second_step_by_hand() {
        // w₂,₀ = h″, w₂,₁ = (2v″h)′ + 2v″h′ = 2v‴h + 4v″h′, w₂,₂ = 4v″·2v″h
        let w = w_weights(&[2.0, 7.0], &[3.0, 11.0]).unwrap();
        assert!(close(&w, &[11.0, 2.0 * 7.0 + 4.0 * 2.0 * 3.0, 8.0 * 4.0]), "{w:?}");
    }

    #[test]
    fn linear_map_with_constant_weight_has_no_weights() {
        for r in 1..=MAX_ORDER {
            let w = w_weights(&vec![0.0; r], &vec![0.0; r]).unwrap();
            assert!(w.iter().all(|&x| x < 1e-300), "r = {r}: {w:?}");
        }
    }

    #[test]
    fn order_guard() {
        assert!(w_polynomials(0, Diagonal::Exact).is_err());
        assert!(w_polynomials(9, Diagonal::Exact).is_err());
        assert!(w_polynomials(8, Diagonal::Exact).is_ok());
    }
}
