//! Statistical quantities from the density and the resolvent.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{SolveReport, Solver};
use crate::basis::{self, BasisKind, SpectralFunction};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::map::MarkovMap;

const QUADRATURE_CAP: usize = 1 << 16;

/// ∫ f over the canonical domain with n panels: Clenshaw–Curtis on the
/// n+1 extreme points for Chebyshev, the trapezoid rule for Fourier.
pub fn quadrature(basis: BasisKind, n: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    match basis {
        BasisKind::FourierReal => {
            let h = 2.0 * std::f64::consts::PI / n as f64;
            h * (0..n).into_par_iter().map(|l| f(h * l as f64)).sum::<f64>()
        }
        BasisKind::Chebyshev => {
            let n = n.max(2);
            let vals: Vec<f64> = (0..=n).into_par_iter().map(|l| f((std::f64::consts::PI * l as f64 / n as f64).cos())).collect();
            // DCT-I through an even extension of length 2n
            let mut buf: Vec<Complex64> = (0..2 * n).map(|j| Complex64::new(if j <= n { vals[j] } else { vals[2 * n - j] }, 0.0)).collect();
            basis::plan(2 * n, false).process(&mut buf);
            let mut acc = 0.0;
            for k in (0..=n).step_by(2) {
                let mut a = buf[k].re / n as f64;
                if k == 0 || k == n {
                    a *= 0.5;
                }
                acc += a * 2.0 / (1.0 - (k * k) as f64);
            }
            acc
        }
    }
}

/// Doubles the quadrature order from `start` until two successive values
/// agree to 1e-13. Returns the last value even if the cap is reached.
fn converged_quadrature(basis: BasisKind, start: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let mut n = start.max(16);
    let mut prev = quadrature(basis, n, &f);
    while n < QUADRATURE_CAP {
        n *= 2;
        let q = quadrature(basis, n, &f);
        let done = (q - prev).abs() < 1e-13 * q.abs().max(1.0);
        prev = q;
        if done {
            break;
        }
    }
    prev
}

/// Lyapunov exponent ∫ log|F'| ρ, written on the image side as
/// Σ_ι ∫ -log|v_ι'| |v_ι'| ρ(v_ι) so only inverse branches are evaluated.
pub fn lyapunov(map: &MarkovMap, rho: &SpectralFunction) -> Result<f64> {
    let integrand = |y: f64| -> Result<f64> {
        let mut s = 0.0;
        for j in map.preimages(y)? {
            let d = j.d1.abs();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Domain(format!("derivative of the map vanishes or blows up near y = {y}")));
            }
            s -= d.ln() * d * rho.eval(j.v);
        }
        Ok(s)
    };
    // probe once for errors, then integrate with a plain closure
    for y in basis::nodes(rho.basis, 33) {
        integrand(y)?;
    }
    Ok(converged_quadrature(rho.basis, 4 * rho.len(), |y| integrand(y).unwrap_or(f64::NAN)))
}

/// Chebyshev or Fourier interpolant of `f`, doubling the node count until
/// the tail is below `tol` relative, then trimming negligible coefficients.
pub fn interpolate_resolved(basis: BasisKind, f: impl Fn(f64) -> f64, tol: f64) -> Result<SpectralFunction> {
    let mut n = 17;
    loop {
        let g = SpectralFunction::interpolate(basis, n, &f);
        if g.coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("observable is not finite on the domain".into()));
        }
        if g.is_resolved(tol) {
            let scale = g.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
            let mut c = g.coeffs;
            while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 0.1 * tol * scale) {
                c.pop();
            }
            return Ok(SpectralFunction::new(basis, c));
        }
        if n > QUADRATURE_CAP {
            return Err(Error::NoConvergence(format!("observable not resolved by {n} nodes")));
        }
        n = 2 * n - 1;
    }
}

/// The observable `expr` (in the user's coordinate) on the canonical domain.
pub fn observable(map: &MarkovMap, expr: &Expr) -> Result<SpectralFunction> {
    let basis = crate::transfer::basis_for(map);
    interpolate_resolved(basis, |y| expr.eval(map.domain.from_canonical(y)), 1e-15)
}

/// Variance σ² of the central limit theorem for Birkhoff sums of A.
/// With ψ = ρ(A - ∫Aρ) and χ = Σ_n Lⁿψ, σ² = ∫ A (2χ - ψ).
pub fn birkhoff_variance(solver: &mut Solver, rho: &SpectralFunction, a: &SpectralFunction) -> Result<(f64, SolveReport)> {
    let phi = rho.times(a);
    let mean = phi.integral();
    let psi = phi.axpby(1.0, rho, -mean);
    let chi = solver.resolvent(&psi)?;
    let g = chi.solution.axpby(2.0, &psi, -1.0);
    Ok((a.times(&g).integral(), chi))
}

/// A priori bound on ‖(id - L + u𝒮)⁻¹‖ from λ and C₁ alone.
pub fn a_priori_solution_norm(lambda: f64, c1: f64) -> Result<f64> {
    if !(lambda > 1.0) || !(c1 >= 0.0) || !lambda.is_finite() || !c1.is_finite() {
        return Err(Error::InvalidInput(format!("need λ > 1 and C₁ ≥ 0, got λ = {lambda}, C₁ = {c1}")));
    }
    let contraction = 1.0 - 1.0 / lambda;
    let r = 2.0 * c1 / contraction;
    let d = 4.0 * r.exp() * (1.0 + r);
    let xi = 0.5 * (-r).exp() * contraction;
    let n = ((4.0 + 2.0 * (c1.max(1.0) * d.sqrt()).ln()) / xi).ceil();
    let m = (2.0 / lambda.ln()).ceil();
    let cp = 1.0 + c1 / (3.0 * contraction);
    Ok(1.0 + 5.0 / 3.0 * (m + n) * cp * (3.0 + cp))
}
