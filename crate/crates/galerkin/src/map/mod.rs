//! Full-branch Markov expanding maps on an interval or the circle.
//!
//! All evaluation happens in canonical coordinates: [-1, 1] for interval
//! maps and [0, 2π) for circle maps. Definitions are written in the user's
//! coordinates and rescaled affinely on the fly.

mod catalog;
mod constants;
mod parse;

pub use catalog::{catalog, catalog_names};
pub use constants::{estimate_constants, Constant, MapConstants, Provenance};
pub use parse::parse_map_definition;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dual::{Dual, Dual2};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Scalar;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// Circle, canonical [0, 2π).
    Periodic,
    /// Interval, canonical [-1, 1].
    NonPeriodic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(kind: DomainKind, a: f64, b: f64) -> Result<Domain> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Semantic(format!("domain [{a}, {b}] is empty or not finite")));
        }
        Ok(Domain { kind, a, b })
    }

    pub fn canonical_bounds(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::Periodic => (0.0, TWO_PI),
            DomainKind::NonPeriodic => (-1.0, 1.0),
        }
    }

    /// |Λ| in canonical units.
    pub fn canonical_length(&self) -> f64 {
        let (lo, hi) = self.canonical_bounds();
        hi - lo
    }

    /// d(canonical)/d(user).
    pub fn scale(&self) -> f64 {
        self.canonical_length() / (self.b - self.a)
    }

    pub fn to_canonical(&self, x: f64) -> f64 {
        self.to_canonical_t(x)
    }

    pub fn from_canonical(&self, y: f64) -> f64 {
        self.from_canonical_t(y)
    }

    /// The affine constants are formed in `T` so enclosing types stay
    /// rigorous when 2π or the interval length is not representable.
    pub fn to_canonical_t<T: Scalar>(&self, x: T) -> T {
        let len = T::cst(self.b) - T::cst(self.a);
        match self.kind {
            DomainKind::Periodic => (x - T::cst(self.a)) * (T::pi() * T::cst(2.0)) / len,
            DomainKind::NonPeriodic => (x - T::cst(self.a)) * T::cst(2.0) / len - T::cst(1.0),
        }
    }

    pub fn from_canonical_t<T: Scalar>(&self, y: T) -> T {
        let len = T::cst(self.b) - T::cst(self.a);
        match self.kind {
            DomainKind::Periodic => T::cst(self.a) + y * len / (T::pi() * T::cst(2.0)),
            DomainKind::NonPeriodic => T::cst(self.a) + (y + T::cst(1.0)) * len / T::cst(2.0),
        }
    }
}

/// One branch of an interval map, domain in canonical units.
#[derive(Clone, Debug)]
pub struct Branch {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub expr: Expr,
    pub deriv: Option<Expr>,
    /// +1 increasing, -1 decreasing.
    pub orientation: i8,
}

#[derive(Clone, Debug)]
pub enum Definition {
    Branches(Vec<Branch>),
    /// Forward lift f̂ on the user period, covering β turns.
    Lift {
        expr: Expr,
        deriv: Option<Expr>,
        beta: i64,
    },
    /// Inverse lift v with v(x + β·period) = v(x) + period.
    InverseLift {
        expr: Expr,
        deriv: Option<Expr>,
        beta: i64,
    },
}

#[derive(Clone, Debug)]
pub struct MarkovMap {
    pub name: String,
    pub domain: Domain,
    pub definition: Definition,
    pub constants: MapConstants,
    /// Canonical F̂(0) for forward lifts.
    lift_origin: f64,
}

/// v, v', v'' of one inverse branch at one point, canonical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl MarkovMap {
    /// Assembles a map and estimates any constants not already supplied.
    pub fn new(name: &str, domain: Domain, definition: Definition, supplied: constants::Supplied) -> Result<MarkovMap> {
        let mut map = MarkovMap { name: name.to_string(), domain, definition, constants: MapConstants::placeholder(), lift_origin: 0.0 };
        if let Definition::Lift { .. } = map.definition {
            map.lift_origin = map.lift_canonical(0.0_f64);
        }
        map.constants = constants::resolve(&map, &supplied, 257);
        Ok(map)
    }

    pub fn kind(&self) -> DomainKind {
        self.domain.kind
    }

    pub fn branch_count(&self) -> usize {
        match &self.definition {
            Definition::Branches(b) => b.len(),
            Definition::Lift { beta, .. } | Definition::InverseLift { beta, .. } => beta.unsigned_abs() as usize,
        }
    }

    /// β for circle maps.
    pub fn degree(&self) -> Option<i64> {
        match &self.definition {
            Definition::Branches(_) => None,
            Definition::Lift { beta, .. } | Definition::InverseLift { beta, .. } => Some(*beta),
        }
    }

    pub fn branches(&self) -> &[Branch] {
        match &self.definition {
            Definition::Branches(b) => b,
            _ => &[],
        }
    }

    /// True when the map has a holomorphic extension through its
    /// expressions (no `abs`).
    pub fn is_holomorphic(&self) -> bool {
        let uses = |e: &Expr, d: &Option<Expr>| e.uses_abs() || d.as_ref().is_some_and(|d| d.uses_abs());
        match &self.definition {
            Definition::Branches(bs) => !bs.iter().any(|b| uses(&b.expr, &b.deriv)),
            Definition::Lift { expr, deriv, .. } | Definition::InverseLift { expr, deriv, .. } => !uses(expr, deriv),
        }
    }

    fn lift_canonical<T: Scalar>(&self, theta: T) -> T {
        match &self.definition {
            Definition::Lift { expr, .. } => self.domain.to_canonical_t(expr.eval(self.domain.from_canonical_t(theta))),
            _ => unreachable!("not a forward lift"),
        }
    }

    /// Canonical forward map on branch ι (interval maps) or the canonical
    /// lift (circle maps, ι ignored). `None` for maps defined by their
    /// inverse.
    pub fn forward_t<T: Scalar>(&self, iota: usize, x: T) -> Option<T> {
        match &self.definition {
            Definition::Branches(bs) => {
                let d = &self.domain;
                Some(d.to_canonical_t(bs[iota].expr.eval(d.from_canonical_t(x))))
            }
            Definition::Lift { .. } => Some(self.lift_canonical(x)),
            Definition::InverseLift { .. } => None,
        }
    }

    /// Canonical forward value and derivative in `T`.
    pub fn forward_with_derivative_t<T: Scalar>(&self, iota: usize, x: T) -> Option<(T, T)> {
        let (expr, deriv) = match &self.definition {
            Definition::Branches(bs) => (&bs[iota].expr, &bs[iota].deriv),
            Definition::Lift { expr, deriv, .. } => (expr, deriv),
            Definition::InverseLift { .. } => return None,
        };
        let d = &self.domain;
        let xu = d.from_canonical_t(x);
        let (f, df) = match deriv {
            Some(de) => (expr.eval(xu), de.eval(xu)),
            None => {
                let r = expr.eval(Dual::variable(xu));
                (r.re, r.eps)
            }
        };
        Some((d.to_canonical_t(f), df))
    }

    /// (F, F', F'') in canonical units.
    pub fn forward_derivatives(&self, iota: usize, x: f64) -> Option<(f64, f64, f64)> {
        let (expr, deriv) = match &self.definition {
            Definition::Branches(bs) => (&bs[iota].expr, &bs[iota].deriv),
            Definition::Lift { expr, deriv, .. } => (expr, deriv),
            Definition::InverseLift { .. } => return None,
        };
        let d = &self.domain;
        let xu = d.from_canonical(x);
        let (f, d1, d2) = match deriv {
            Some(de) => {
                let r = de.eval(Dual::variable(xu));
                (expr.eval(xu), r.re, r.eps)
            }
            None => expr.eval(Dual2::seed(xu)).parts(),
        };
        Some((d.to_canonical(f), d1, d2 / d.scale()))
    }

    /// Canonical inverse lift V(y) and V'(y) in `T`, for maps defined by
    /// their inverse.
    pub fn inverse_lift_t<T: Scalar>(&self, y: T) -> Option<(T, T)> {
        let Definition::InverseLift { expr, deriv, .. } = &self.definition else {
            return None;
        };
        let d = &self.domain;
        let yu = d.from_canonical_t(y);
        let (v, dv) = match deriv {
            Some(de) => (expr.eval(yu), de.eval(yu)),
            None => {
                let r = expr.eval(Dual::variable(yu));
                (r.re, r.eps)
            }
        };
        Some((d.to_canonical_t(v), dv))
    }

    /// The canonical point on the lift target that branch ι of a circle map
    /// inverts: y + 2πι, shifted by whole lift periods into F̂([0, 2π]).
    fn lift_target(&self, iota: usize, y: f64) -> f64 {
        let beta = self.degree().unwrap_or(1) as f64;
        let span = TWO_PI * beta;
        let lo = self.lift_origin.min(self.lift_origin + span);
        let t = y + TWO_PI * iota as f64;
        t - span.abs() * ((t - lo) / span.abs()).floor()
    }

    /// v_ι(y): the branch-ι preimage of the canonical point y.
    pub fn branch_inverse(&self, iota: usize, y: f64) -> Result<f64> {
        if iota >= self.branch_count() {
            return Err(Error::InvalidInput(format!("branch index {iota} out of range")));
        }
        match &self.definition {
            Definition::Branches(bs) => {
                let b = &bs[iota];
                solve_monotone(|x| self.forward_with_derivative_t(iota, x).unwrap(), b.lo, b.hi, y)
            }
            Definition::Lift { .. } => {
                let t = self.lift_target(iota, y);
                solve_monotone(|x| self.forward_with_derivative_t(0, x).unwrap(), 0.0, TWO_PI, t)
            }
            Definition::InverseLift { .. } => Ok(self.inverse_lift_t(y + TWO_PI * iota as f64).unwrap().0),
        }
    }

    /// (v_ι, v_ι', v_ι'') at the canonical point y.
    pub fn branch_inverse_derivatives(&self, iota: usize, y: f64) -> Result<InverseJet> {
        match &self.definition {
            Definition::InverseLift { expr, deriv, .. } => {
                let d = &self.domain;
                let yu = d.from_canonical(y + TWO_PI * iota as f64);
                let (v, d1, d2) = match deriv {
                    Some(de) => {
                        let r = de.eval(Dual::variable(yu));
                        (expr.eval(yu), r.re, r.eps)
                    }
                    None => expr.eval(Dual2::seed(yu)).parts(),
                };
                Ok(InverseJet { v: d.to_canonical(v), d1, d2: d2 / d.scale() })
            }
            _ => {
                let x = self.branch_inverse(iota, y)?;
                let (_, f1, f2) = self.forward_derivatives(iota, x).unwrap();
                if !(f1.abs() > 1e-300) || !f1.is_finite() {
                    return Err(Error::Numerical(format!(
                        "f' vanishes at x = {} on branch {iota}: map is not expanding there",
                        self.domain.from_canonical(x)
                    )));
                }
                Ok(InverseJet { v: x, d1: 1.0 / f1, d2: -f2 / (f1 * f1 * f1) })
            }
        }
    }

    /// (v_ι(y), |v_ι'(y)|) for every branch in a wider type `T`: the f64
    /// preimage of `yf` (the rounded y) refined by Newton steps in `T`.
    pub fn preimages_t<T: Scalar>(&self, y: T, yf: f64) -> Result<Vec<(T, T)>> {
        let two_pi = T::pi() * T::cst(2.0);
        (0..self.branch_count())
            .map(|iota| {
                if let Definition::InverseLift { .. } = &self.definition {
                    let (v, dv) = self.inverse_lift_t(y + two_pi * T::cst(iota as f64)).unwrap();
                    return Ok((v, dv.abs()));
                }
                let (target, fwd) = match &self.definition {
                    Definition::Lift { .. } => {
                        let raw = yf + TWO_PI * iota as f64;
                        let periods = ((self.lift_target(iota, yf) - raw) / TWO_PI).round();
                        (y + two_pi * T::cst(iota as f64 + periods), 0)
                    }
                    _ => (y, iota),
                };
                let mut x = T::cst(self.branch_inverse(iota, yf)?);
                let mut d = T::cst(1.0);
                for _ in 0..4 {
                    let (f, df) = self.forward_with_derivative_t(fwd, x).unwrap();
                    x = x - (f - target) / df;
                    d = df;
                }
                Ok((x, (T::cst(1.0) / d).abs()))
            })
            .collect()
    }

    /// Inverse jets of every branch at y.
    pub fn preimages(&self, y: f64) -> Result<Vec<InverseJet>> {
        (0..self.branch_count()).map(|i| self.branch_inverse_derivatives(i, y)).collect()
    }

    /// v_ι at a complex point, continued from the real point `anchor`
    /// along a straight path. Used for the holomorphic distortion
    /// constants; returns (v, v', v'').
    pub fn branch_inverse_complex(
        &self,
        iota: usize,
        anchor: f64,
        z: Complex64,
        steps: usize,
    ) -> Result<(Complex64, Complex64, Complex64)> {
        if let Definition::InverseLift { expr, .. } = &self.definition {
            let d = &self.domain;
            let zu = d.from_canonical_t(z + Complex64::new(TWO_PI * iota as f64, 0.0));
            let (v, d1, d2) = expr.eval(Dual2::seed(zu)).parts();
            return Ok((d.to_canonical_t(v), d1, d2 / d.scale()));
        }
        let mut x = Complex64::new(self.branch_inverse(iota, anchor)?, 0.0);
        let shift = match &self.definition {
            Definition::Lift { .. } => self.lift_target(iota, anchor) - anchor,
            _ => 0.0,
        };
        let start = Complex64::new(anchor, 0.0);
        for s in 1..=steps {
            let target = start + (z - start) * (s as f64 / steps as f64) + shift;
            let mut converged = false;
            for _ in 0..50 {
                let (f, df) = self.forward_with_derivative_t(iota, x).unwrap();
                let step = (f - target) / df;
                x -= step;
                if !x.re.is_finite() || !x.im.is_finite() {
                    break;
                }
                if step.norm() <= 1e-15 * x.norm().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NoConvergence(format!("complex continuation of branch {iota} to {z}")));
            }
        }
        let d = &self.domain;
        let xu = d.from_canonical_t(x);
        let (expr, deriv) = match &self.definition {
            Definition::Branches(bs) => (&bs[iota].expr, &bs[iota].deriv),
            Definition::Lift { expr, deriv, .. } => (expr, deriv),
            Definition::InverseLift { .. } => unreachable!(),
        };
        let (f1, f2) = match deriv {
            Some(de) => {
                let r = de.eval(Dual::variable(xu));
                (r.re, r.eps)
            }
            None => {
                let (_, a, b) = expr.eval(Dual2::seed(xu)).parts();
                (a, b)
            }
        };
        let f2 = f2 / d.scale();
        Ok((x, Complex64::new(1.0, 0.0) / f1, -f2 / (f1 * f1 * f1)))
    }
}

/// Safeguarded Newton for a monotone g on [lo, hi]; `g` returns value and
/// derivative. Newton steps that leave the current bracket fall back to
/// bisection.
pub(crate) fn solve_monotone(g: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, y: f64) -> Result<f64> {
    let rlo = g(lo).0 - y;
    let rhi = g(hi).0 - y;
    if rlo == 0.0 {
        return Ok(lo);
    }
    if rhi == 0.0 {
        return Ok(hi);
    }
    if rlo.signum() == rhi.signum() {
        // y sits just outside the image because of rounding at an endpoint
        let tol = 1e-12 * y.abs().max(1.0);
        return if rlo.abs() <= tol && rlo.abs() <= rhi.abs() {
            Ok(lo)
        } else if rhi.abs() <= tol {
            Ok(hi)
        } else {
            Err(Error::Domain(format!("point {y} is not in the image of [{lo}, {hi}]")))
        };
    }
    // a keeps the sign of rlo
    let (mut a, mut b) = (lo, hi);
    let mut x = lo - rlo * (hi - lo) / (rhi - rlo);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let (fx, dfx) = g(x);
        let r = fx - y;
        if r == 0.0 {
            return Ok(x);
        }
        if r.signum() == rlo.signum() {
            a = x;
        } else {
            b = x;
        }
        let (blo, bhi) = (a.min(b), a.max(b));
        let newton = x - r / dfx;
        let next = if newton.is_finite() && newton >= blo && newton <= bhi { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        if bhi - blo <= 2.0 * f64::EPSILON * blo.abs().max(1.0) {
            return Ok(0.5 * (a + b));
        }
        x = next;
    }
    Err(Error::NoConvergence(format!("branch inverse at {y} did not converge in 100 iterations; check the branch definition")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_rescaling_round_trips() {
        for (kind, a, b) in [(DomainKind::NonPeriodic, 0.0, 1.0), (DomainKind::Periodic, -3.0, 7.5)] {
            let d = Domain::new(kind, a, b).unwrap();
            for i in 0..=20 {
                let x = a + (b - a) * i as f64 / 20.0;
                let y = d.to_canonical(x);
                assert!((d.from_canonical(y) - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(b - a));
            }
        }
    }

    #[test]
    fn lanford_inverse_matches_quadratic_root() {
        let m = catalog("lanford").unwrap();
        // user y = 0.5 is canonical 0
        let x = m.branch_inverse(0, 0.0).unwrap();
        let expect = (5.0 - 21f64.sqrt()) / 2.0;
        assert!((m.domain.from_canonical(x) - expect).abs() < 1e-15);
        assert_eq!(m.branch_inverse(0, -1.0).unwrap(), -1.0);
    }

    #[test]
    fn lanford_inverse_derivatives_at_origin() {
        let m = catalog("lanford").unwrap();
        let j = m.branch_inverse_derivatives(0, -1.0).unwrap();
        assert_eq!(j.v, -1.0);
        assert!((j.d1 - 0.4).abs() < 1e-15);
        // 8/125 in user units; canonical v'' is half of it on [0, 1]
        assert!((j.d2 * m.domain.scale() - 8.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn tripling_lift_inverse() {
        let m = catalog("circle k=3 linear").unwrap();
        let x = m.branch_inverse(1, PI).unwrap();
        assert!((x - PI).abs() < 1e-14);
        for y in [0.0, 1.0, 4.0] {
            let j = m.branch_inverse_derivatives(2, y).unwrap();
            assert!((j.d1 - 1.0 / 3.0).abs() < 1e-15);
            assert!(j.d2.abs() < 1e-14);
        }
    }

    #[test]
    fn doubling_inverse_slope() {
        let m = catalog("doubling").unwrap();
        let j = m.branch_inverse_derivatives(1, 1.0).unwrap();
        assert!((j.d1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn solve_monotone_reports_failure_outside_image() {
        let r = solve_monotone(|x| (x, 1.0), 0.0, 1.0, 3.0);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn complex_continuation_agrees_on_real_axis() {
        let m = catalog("lanford").unwrap();
        let (v, d1, _) = m.branch_inverse_complex(1, 0.3, Complex64::new(0.3, 0.0), 4).unwrap();
        let j = m.branch_inverse_derivatives(1, 0.3).unwrap();
        assert!((v.re - j.v).abs() < 1e-14 && v.im.abs() < 1e-14);
        assert!((d1.re - j.d1).abs() < 1e-14);
    }
}
