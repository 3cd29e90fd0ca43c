//! Rigorous enclosures of the acim and of statistics built from it.
//!
//! The matrix is enclosed entrywise ([`interval_assemble`]), the system is
//! solved at the midpoint in floating point and the solution is certified by
//! an interval residual. The certified distance to the true acim splits into
//! the part from the residual and the part from truncating the operator:
//!
//! ε_interval = b_S ‖u − Kρ̃‖ / (1 − x),  ε_finite = b_S ‖u‖ x / (1 − x),
//!
//! with x = b_S b_E and b_E the truncation bound. Norms are bounded by
//! Var + max(1, |Λ|)·sup, which dominates both Var + sup and Var + L¹.

mod assemble;
mod enclose;
mod quantity;
mod sum;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{bv_seminorm_upper, sup_upper, BasisKind, SpectralFunction};
use crate::bounds::{entry_bound_analytic, truncation_bound, AnalyticInputs, EntryBoundModel, SUM_SLACK};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::MarkovMap;
use crate::scalar::Scalar;

pub use assemble::{interval_assemble, interval_nodes, IntervalMatrix};
pub use enclose::enclose_preimages;
pub use quantity::{validated_quantity, QuantityKind, ValidatedQuantity};
pub use sum::{accurate_dot, accurate_sum};

/// Scalars that enclose real numbers. The validated pipeline is written
/// against this trait; binary64 [`Interval`] is the only backend.
pub trait IntervalScalar: Scalar + Send + Sync {
    fn from_bounds(lo: f64, hi: f64) -> Self;
    fn lo(&self) -> f64;
    fn hi(&self) -> f64;
    fn is_valid(&self) -> bool;
    fn intersect(&self, other: &Self) -> Option<Self>;
    /// Enclosure of the exact sum, tighter than left-to-right addition.
    fn sum(terms: &[Self]) -> Self;

    fn mid(&self) -> f64 {
        if self.lo() == self.hi() {
            self.lo()
        } else {
            0.5 * self.lo() + 0.5 * self.hi()
        }
    }

    fn width(&self) -> f64 {
        (self.hi() - self.lo()).next_up()
    }

    fn mag(&self) -> f64 {
        self.lo().abs().max(self.hi().abs())
    }

    fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

impl IntervalScalar for Interval {
    fn from_bounds(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi)
    }

    fn lo(&self) -> f64 {
        self.lo
    }

    fn hi(&self) -> f64 {
        self.hi
    }

    fn is_valid(&self) -> bool {
        Interval::is_valid(self)
    }

    fn intersect(&self, other: &Self) -> Option<Self> {
        Interval::intersect(self, other)
    }

    fn sum(terms: &[Self]) -> Self {
        accurate_sum(terms)
    }
}

/// 1/(1/x − 1), the finite-section factor x/(1 − x).
pub fn finite_section_factor(x: f64) -> f64 {
    1.0 / (1.0 / x - 1.0)
}

/// b_S ‖φ‖ x/(1 − x) with x = b_S b_E; `None` when the gate x < 1 fails.
pub fn finite_section_error(bsol: f64, truncation: f64, rhs_norm: f64) -> Option<f64> {
    let x = (bsol * truncation).next_up();
    (x < 1.0).then(|| inflate(bsol * rhs_norm * finite_section_factor(x)))
}

/// Analytic entry model for a degree-k circle map with affine inverse
/// branches: no distortion, slopes exactly 1/k and an arbitrarily wide
/// strip (capped at 30).
pub fn affine_circle_model(k: u32) -> Result<EntryBoundModel> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("degree must be at least 2, got {k}")));
    }
    let mu = 1.0 / k as f64;
    let inputs = AnalyticInputs { upsilon: 0.0, h: 0.0, delta: 30.0, mu: (mu, mu), p: (0.5 * mu, 1.5 * mu), c1: 0.0 };
    entry_bound_analytic(BasisKind::FourierReal, &inputs)
}

/// Upper bound on Var + max(1, |Λ|)·sup of a function given coefficient
/// magnitudes.
pub fn norm_upper(basis: BasisKind, mags: &[f64]) -> f64 {
    let scale = basis.domain_length().max(1.0);
    (bv_seminorm_upper(basis, mags) + scale * sup_upper(basis, mags)) * SUM_SLACK
}

fn norm_upper_t<T: IntervalScalar>(basis: BasisKind, c: &[T]) -> f64 {
    let mags: Vec<f64> = c.iter().map(|x| x.mag()).collect();
    norm_upper(basis, &mags)
}

/// Rounds a nonnegative quantity computed in a few float operations up.
fn inflate(x: f64) -> f64 {
    (x * (1.0 + 1e-12)).next_up()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Interval,
    Truncation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub order: usize,
    pub basis: BasisKind,
    pub bsol: f64,
    pub truncation_bound: f64,
    /// b_S·b_E, which must be below 1.
    pub gate: f64,
    pub residual_norm: f64,
    pub eps_interval: f64,
    pub eps_finite: f64,
    pub eps_total: f64,
    pub dominated_by: Budget,
    pub max_entry_width: f64,
    pub model: EntryBoundModel,
    pub coefficients: Vec<f64>,
}

/// A certificate together with the data needed for further validated
/// solves with the same matrix.
pub struct Validated<T = Interval> {
    pub certificate: Certificate,
    pub matrix: IntervalMatrix<T>,
    /// Interval enclosure of K = I − L + u𝒮.
    pub k: Vec<Vec<T>>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

#[derive(Clone, Debug)]
pub struct ValidationInputs {
    pub order: usize,
    pub bsol: f64,
    pub model: EntryBoundModel,
}

/// Result of a certified solve K χ = φ with its enclosure radius.
#[derive(Clone, Debug)]
pub struct CertifiedSolve {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    /// Bound on the distance to the exact finite-section solution.
    pub eps_interval: f64,
}

impl<T: IntervalScalar> Validated<T> {
    pub fn rho(&self) -> SpectralFunction {
        SpectralFunction::new(self.certificate.basis, self.certificate.coefficients.clone())
    }

    /// Upper bound on ‖ρ̃ − c‖ for coefficients `c` (zero-padded).
    pub fn distance_upper(&self, c: &[f64]) -> f64 {
        let rho = &self.certificate.coefficients;
        let len = rho.len().max(c.len());
        let d: Vec<T> = (0..len).map(|i| T::cst(rho.get(i).copied().unwrap_or(0.0)) - T::cst(c.get(i).copied().unwrap_or(0.0))).collect();
        norm_upper_t(self.certificate.basis, &d)
    }

    /// True when `c` lies in the certified ball around ρ̃.
    pub fn contains(&self, c: &[f64]) -> bool {
        self.distance_upper(c) <= self.certificate.eps_total
    }

    fn gate_factor(&self) -> f64 {
        let x = self.certificate.gate;
        inflate(self.certificate.bsol / (1.0 - x))
    }

    /// Midpoint solve of K χ = φ certified by the interval residual.
    pub fn solve(&self, phi: &[T]) -> Result<CertifiedSolve> {
        let n = self.matrix.n;
        if phi.len() != n {
            return Err(Error::InvalidInput(format!("right-hand side has {} coefficients, expected {n}", phi.len())));
        }
        let b = DVector::from_iterator(n, phi.iter().map(|x| x.mid()));
        let x = self.lu.solve(&b).ok_or_else(|| Error::Numerical("midpoint system is singular".into()))?;
        let xs: Vec<T> = x.iter().map(|&v| T::cst(v)).collect();
        let r: Vec<T> = (0..n)
            .map(|j| {
                let terms: Vec<T> = (0..n).map(|k| self.k[j][k] * xs[k]).collect();
                phi[j] - T::sum(&terms)
            })
            .collect();
        if r.iter().any(|e| !e.is_valid()) {
            return Err(Error::Validation("residual could not be enclosed".into()));
        }
        let residual_norm = norm_upper_t(self.matrix.basis, &r);
        Ok(CertifiedSolve {
            solution: x.iter().copied().collect(),
            residual_norm,
            eps_interval: inflate(residual_norm * self.gate_factor()),
        })
    }

    /// b_S x/(1 − x): the finite-section part of the error of a solve with a
    /// right-hand side of norm `rhs_norm`.
    pub fn finite_section_error(&self, rhs_norm: f64) -> f64 {
        let c = &self.certificate;
        finite_section_error(c.bsol, c.truncation_bound, rhs_norm).unwrap_or(f64::INFINITY)
    }
}

/// Interval coefficients of u = 1/|Λ| and the products u_j 𝒮_k.
fn u_vector<T: IntervalScalar>(basis: BasisKind, n: usize) -> Vec<T> {
    let len = match basis {
        BasisKind::Chebyshev => T::cst(2.0),
        BasisKind::FourierReal => T::pi() * T::cst(2.0),
    };
    let mut u = vec![T::cst(0.0); n];
    u[0] = T::cst(1.0) / len;
    u
}

/// u_0 𝒮_k, computed so the Fourier product is exactly 1.
fn u_s<T: IntervalScalar>(basis: BasisKind, k: usize) -> T {
    match basis {
        BasisKind::FourierReal => T::cst(if k == 0 { 1.0 } else { 0.0 }),
        BasisKind::Chebyshev if k % 2 == 1 => T::cst(0.0),
        BasisKind::Chebyshev => {
            let kk = k as f64;
            T::cst(1.0) / T::cst(1.0 - kk * kk)
        }
    }
}

/// Certifies the solve for the acim from an enclosed matrix.
pub fn interval_solve<T: IntervalScalar>(
    matrix: IntervalMatrix<T>,
    bsol: f64,
    truncation: f64,
    model: EntryBoundModel,
) -> Result<Validated<T>> {
    if !(bsol > 0.0 && bsol.is_finite()) {
        return Err(Error::InvalidInput(format!("b_S must be positive and finite, got {bsol}")));
    }
    let gate = (bsol * truncation).next_up();
    if !(gate < 1.0) {
        return Err(Error::Validation(format!("gate failed: b_S·b_E = {gate:e} ≥ 1 at N = {} (increase the order)", matrix.n)));
    }
    let (basis, n) = (matrix.basis, matrix.n);
    let mut k = vec![vec![T::cst(0.0); n]; n];
    let mut mid = DMatrix::<f64>::zeros(n, n);
    for (j, row) in k.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            let id = T::cst(if j == c { 1.0 } else { 0.0 });
            *e = id - matrix.get(j, c);
            if j == 0 {
                *e = *e + u_s(basis, c);
            }
            mid[(j, c)] = e.mid();
        }
    }
    let u = u_vector::<T>(basis, n);
    let u_norm = norm_upper_t(basis, &u);
    let max_entry_width = matrix.max_width();
    let mut v = Validated {
        certificate: Certificate {
            order: n,
            basis,
            bsol,
            truncation_bound: truncation,
            gate,
            residual_norm: 0.0,
            eps_interval: 0.0,
            eps_finite: 0.0,
            eps_total: 0.0,
            dominated_by: Budget::Interval,
            max_entry_width,
            model,
            coefficients: Vec::new(),
        },
        matrix,
        k,
        lu: mid.lu(),
    };
    let s = v.solve(&u)?;
    let eps_finite = v.finite_section_error(u_norm);
    let c = &mut v.certificate;
    c.residual_norm = s.residual_norm;
    c.eps_interval = s.eps_interval;
    c.eps_finite = eps_finite;
    c.eps_total = (s.eps_interval + eps_finite).next_up();
    c.dominated_by = if eps_finite > s.eps_interval { Budget::Truncation } else { Budget::Interval };
    c.coefficients = s.solution;
    Ok(v)
}

/// Runs the whole validated pipeline for the acim of `map`.
pub fn validate(map: &MarkovMap, inputs: &ValidationInputs) -> Result<Validated> {
    validate_with::<Interval>(map, inputs)
}

/// [`validate`] over any interval backend.
pub fn validate_with<T: IntervalScalar>(map: &MarkovMap, inputs: &ValidationInputs) -> Result<Validated<T>> {
    let n = inputs.order;
    let truncation = truncation_bound(&inputs.model, n);
    let gate = (inputs.bsol * truncation).next_up();
    if !(gate < 1.0) {
        return Err(Error::Validation(format!("gate failed: b_S·b_E = {gate:e} ≥ 1 at N = {n} (increase the order)")));
    }
    let matrix = interval_assemble::<T>(map, n, &inputs.model)?;
    interval_solve(matrix, inputs.bsol, truncation, inputs.model.clone())
}
