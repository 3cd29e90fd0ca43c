//! Solving with K = id - L + u𝒮: the acim is K⁻¹u and, for zero-integral
//! φ, K⁻¹φ = Σ Lⁿφ.

mod convergence;
mod extended;
mod qr;
mod stats;

pub use convergence::{convergence_study, linear_fit, ConvergencePoint, ConvergenceStudy, Precision};
pub use extended::{acim_qd, assemble_qd};
pub use qr::AdaptiveQr;
pub use stats::{a_priori_solution_norm, birkhoff_variance, interpolate_resolved, lyapunov, observable, quadrature};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::{BasisKind, SpectralFunction};
use crate::error::{Error, Result};
use crate::map::MarkovMap;
use crate::transfer::TransferOperator;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Adaptive { tol: f64 },
    Fixed { order: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub order: usize,
    pub solution: SpectralFunction,
    /// ‖Kρ̃ - rhs‖ in coefficient ℓ¹, recomputed from a fresh assembly.
    pub residual_l1: f64,
    pub residual_bv: f64,
    pub converged: bool,
    pub seconds: f64,
    /// Interpolation order per column (adaptive mode).
    pub column_orders: Vec<usize>,
}

/// The default u = 1/|Λ|.
pub fn default_u(basis: BasisKind) -> SpectralFunction {
    SpectralFunction::constant(basis, 1.0 / basis.domain_length())
}

/// K^{(N)} = I - L^{(N)} + u 𝒮^{(N)}.
pub fn build_k(op: &TransferOperator, u: &SpectralFunction, n: usize) -> Result<DMatrix<f64>> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("order {n} is below the minimum of 4")));
    }
    let cols = op.assemble(n)?;
    let mut k = DMatrix::<f64>::identity(n, n);
    for (c, col) in cols.iter().enumerate() {
        let s = op.basis.element_integral(c);
        for (r, &l) in col.iter().enumerate() {
            k[(r, c)] -= l;
        }
        for (r, &uv) in u.coeffs.iter().take(n).enumerate() {
            k[(r, c)] += uv * s;
        }
    }
    Ok(k)
}

pub struct Solver<'a> {
    pub op: TransferOperator<'a>,
    pub mode: Mode,
    pub u: SpectralFunction,
    qr: Option<AdaptiveQr>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl<'a> Solver<'a> {
    pub fn new(map: &'a MarkovMap, mode: Mode) -> Result<Solver<'a>> {
        let lam = map.constants.solver_expansion();
        if !(lam > 1.0) {
            return Err(Error::InvalidInput(format!(
                "map '{}' is not expanding enough for the solver (expansion parameter {lam} ≤ 1)",
                map.name
            )));
        }
        match mode {
            Mode::Adaptive { tol } if !(1e-15..=1e-2).contains(&tol) => {
                return Err(Error::InvalidInput(format!("tolerance {tol} outside [1e-15, 1e-2]")))
            }
            Mode::Fixed { order } if order < 4 => return Err(Error::InvalidInput(format!("order {order} is below the minimum of 4"))),
            _ => {}
        }
        let op = TransferOperator::new(map);
        let u = default_u(op.basis);
        Ok(Solver { op, mode, u, qr: None, lu: None })
    }

    pub fn basis(&self) -> BasisKind {
        self.op.basis
    }

    pub fn qr_state(&self) -> Option<&AdaptiveQr> {
        self.qr.as_ref()
    }

    /// Adaptive state with a custom column cap.
    pub fn set_column_cap(&mut self, cap: usize) {
        if let Mode::Adaptive { tol } = self.mode {
            let qr = self.qr.get_or_insert_with(|| AdaptiveQr::new(&self.u, tol));
            qr.column_cap = cap;
        }
    }

    fn raw_solve(&mut self, rhs: &SpectralFunction) -> Result<(Vec<f64>, Vec<usize>)> {
        match self.mode {
            Mode::Adaptive { tol } => {
                let qr = self.qr.get_or_insert_with(|| AdaptiveQr::new(&self.u, tol));
                let x = qr.solve(&self.op, &rhs.coeffs)?;
                let orders = qr.column_orders[..x.len().min(qr.column_orders.len())].to_vec();
                Ok((x, orders))
            }
            Mode::Fixed { order } => {
                if self.lu.is_none() {
                    let k = build_k(&self.op, &self.u, order)?;
                    self.lu = Some(k.lu());
                }
                let lu = self.lu.as_ref().unwrap();
                let b = DVector::from_iterator(order, (0..order).map(|i| rhs.coeffs.get(i).copied().unwrap_or(0.0)));
                let x = lu
                    .solve(&b)
                    .filter(|x| x.iter().all(|v| v.is_finite()))
                    .ok_or_else(|| Error::Numerical(format!("K is singular at order {order}; try a larger order")))?;
                Ok((x.iter().copied().collect(), vec![order; order]))
            }
        }
    }

    fn report(&mut self, sol: Vec<f64>, orders: Vec<usize>, rhs: &SpectralFunction, start: Instant) -> Result<SolveReport> {
        let solution = SpectralFunction::new(self.op.basis, sol);
        let n = (2 * solution.len()).max(rhs.len()).max(16);
        let lf = self.op.apply(&solution, n)?;
        let integral = solution.integral();
        let mut r = solution.axpby(1.0, &lf, -1.0);
        r = r.axpby(1.0, &self.u, integral);
        r = r.axpby(1.0, rhs, -1.0);
        let residual_l1 = r.coeffs.iter().map(|v| v.abs()).sum();
        Ok(SolveReport {
            order: solution.len(),
            residual_bv: r.bv_norm_upper(),
            residual_l1,
            converged: true,
            seconds: start.elapsed().as_secs_f64(),
            column_orders: orders,
            solution,
        })
    }

    /// The invariant density, normalized to unit integral.
    pub fn acim(&mut self) -> Result<SolveReport> {
        let start = Instant::now();
        let u = self.u.clone();
        let (mut x, orders) = self.raw_solve(&u)?;
        let s = crate::basis::integrate(self.op.basis, &x);
        if !(s.abs() > 0.0) {
            return Err(Error::Numerical("computed density has zero integral".into()));
        }
        for v in x.iter_mut() {
            *v /= s;
        }
        self.report(x, orders, &u, start)
    }

    /// K⁻¹φ = Σ_n Lⁿφ for φ with zero integral.
    pub fn resolvent(&mut self, phi: &SpectralFunction) -> Result<SolveReport> {
        let start = Instant::now();
        let scale = phi.coeffs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if phi.integral().abs() > 1e-10 * scale {
            return Err(Error::InvalidInput(format!("resolvent needs a zero-integral input; ∫φ = {:e}", phi.integral())));
        }
        let (x, orders) = self.raw_solve(phi)?;
        self.report(x, orders, phi, start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{catalog, parse_map_definition};
    use std::f64::consts::PI;

    #[test]
    fn doubling_acim_is_uniform() {
        let m = catalog("doubling").unwrap();
        for mode in [Mode::Adaptive { tol: 1e-14 }, Mode::Fixed { order: 5 }] {
            let mut s = Solver::new(&m, mode).unwrap();
            let r = s.acim().unwrap();
            assert!((r.solution.coeffs[0] - 1.0 / (2.0 * PI)).abs() < 1e-15);
            assert!(r.solution.coeffs[1..].iter().all(|v| v.abs() < 1e-15));
            assert!(r.residual_l1 < 1e-14);
        }
        let mut s = Solver::new(&m, Mode::Adaptive { tol: 1e-14 }).unwrap();
        assert!(s.acim().unwrap().order <= 4);
    }

    #[test]
    fn doubling_k_fixes_uniform_density() {
        let m = catalog("doubling").unwrap();
        let op = TransferOperator::new(&m);
        let k = build_k(&op, &default_u(op.basis), 5).unwrap();
        let mut e = DVector::zeros(5);
        e[0] = 1.0 / (2.0 * PI);
        assert!((&k * &e - &e).amax() < 1e-15);
    }

    #[test]
    fn piecewise_linear_acim_is_uniform() {
        let text = "domain interval -1 1\nbranch [-1, -1/3] expr 3*x + 2\nbranch [-1/3, 1] expr (3*x - 1)/2";
        let m = parse_map_definition(text).unwrap();
        for mode in [Mode::Adaptive { tol: 1e-14 }, Mode::Fixed { order: 16 }] {
            let r = Solver::new(&m, mode).unwrap().acim().unwrap();
            assert!((r.solution.coeffs[0] - 0.5).abs() < 1e-12);
            assert!(r.solution.coeffs[1..].iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn lanford_k_is_well_conditioned() {
        let m = catalog("lanford").unwrap();
        let op = TransferOperator::new(&m);
        let k = build_k(&op, &default_u(op.basis), 32).unwrap();
        let sv = k.singular_values();
        let cond = sv.max() / sv.min();
        assert!(cond < 1e3, "condition number {cond}");
    }

    #[test]
    fn fixed_and_adaptive_agree_on_lanford() {
        let m = catalog("lanford").unwrap();
        let a = Solver::new(&m, Mode::Adaptive { tol: 1e-14 }).unwrap().acim().unwrap();
        assert!(a.order <= 40, "N_opt = {}", a.order);
        let f = Solver::new(&m, Mode::Fixed { order: 40 }).unwrap().acim().unwrap();
        for j in 0..40 {
            let av = a.solution.coeffs.get(j).copied().unwrap_or(0.0);
            assert!((av - f.solution.coeffs[j]).abs() < 1e-12, "j={j}");
        }
        assert!(a.residual_l1 < 1e-12 && f.residual_l1 < 1e-12);
    }

    #[test]
    fn resolvent_rejects_nonzero_integral() {
        let m = catalog("doubling").unwrap();
        let mut s = Solver::new(&m, Mode::Adaptive { tol: 1e-14 }).unwrap();
        let e = s.resolvent(&SpectralFunction::constant(BasisKind::FourierReal, 1.0)).unwrap_err();
        assert!(e.is_input_error());
    }

    #[test]
    fn resolvent_of_zero_is_zero() {
        let m = catalog("lanford").unwrap();
        let mut s = Solver::new(&m, Mode::Adaptive { tol: 1e-14 }).unwrap();
        let r = s.resolvent(&SpectralFunction::zero(BasisKind::Chebyshev, 4)).unwrap();
        assert!(r.solution.coeffs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn doubling_resolvent_sums() {
        let m = catalog("doubling").unwrap();
        let mut s = Solver::new(&m, Mode::Adaptive { tol: 1e-14 }).unwrap();
        // cos θ is annihilated; cos 2θ → cos 2θ + cos θ
        let r = s.resolvent(&SpectralFunction::new(BasisKind::FourierReal, vec![0.0, 1.0])).unwrap();
        assert!((r.solution.coeffs[1] - 1.0).abs() < 1e-14);
        let r = s.resolvent(&SpectralFunction::new(BasisKind::FourierReal, vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        let c = r.solution.resized(5).coeffs;
        assert!((c[1] - 1.0).abs() < 1e-14 && (c[3] - 1.0).abs() < 1e-14);
        assert!(c[0].abs() < 1e-14 && c[2].abs() < 1e-14 && c[4].abs() < 1e-14);
    }

    #[test]
    fn non_expanding_maps_are_rejected() {
        let m = parse_map_definition("domain periodic 0 1\nlift 2*x\nconst lambda 0.9").unwrap();
        assert!(Solver::new(&m, Mode::Fixed { order: 8 }).is_err());
    }
}
