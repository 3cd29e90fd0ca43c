//! Enclosures of the Lyapunov exponent and the diffusion coefficient.
//!
//! The Lyapunov exponent is integrated on the image side,
//! ∫ Σ_ι w(|v_ι′|) ρ(v_ι(y)) dy with w(s) = −s ln s, by composite two-point
//! Gauss–Legendre. Panel widths come from fourth-derivative enclosures on
//! 64 groups, computed with interval Taylor jets of the inverse branches and
//! Markov-type bounds on the derivatives of ρ̃.

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{bv_seminorm_upper, sup_upper, BasisKind};
use crate::bounds::SUM_SLACK;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::map::{Definition, MarkovMap};
use crate::scalar::Scalar;

use super::assemble::Transform;
use super::enclose::enclose_preimages;
use super::{inflate, norm_upper_t, IntervalScalar, Validated};

const GROUPS: usize = 64;
const QUADRATURE_TARGET: f64 = 1e-13;
const PANEL_CAP: usize = 1 << 14;

#[derive(Clone, Debug)]
pub enum QuantityKind {
    Lyapunov,
    /// σ² of the central limit theorem for a polynomial observable, in the
    /// user's coordinate.
    Diffusion {
        observable: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidatedQuantity {
    pub lo: f64,
    pub hi: f64,
    /// Part of the radius from the error in the density (and, for diffusion,
    /// the resolvent solve).
    pub density_error: f64,
    /// Part of the radius from quadrature.
    pub quadrature_error: f64,
}

impl ValidatedQuantity {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    fn from_enclosure<T: IntervalScalar>(v: T, density_error: f64, quadrature_error: f64) -> Result<Self> {
        let r = inflate(density_error + quadrature_error);
        let w = v + T::from_bounds(-r, r);
        if !w.is_valid() || !w.lo().is_finite() || !w.hi().is_finite() {
            return Err(Error::Validation("quantity could not be enclosed".into()));
        }
        Ok(ValidatedQuantity { lo: w.lo(), hi: w.hi(), density_error, quadrature_error })
    }
}

/// Encloses `kind` for the certified density in `v`.
pub fn validated_quantity<T: IntervalScalar>(v: &Validated<T>, kind: &QuantityKind, map: &MarkovMap) -> Result<ValidatedQuantity> {
    match kind {
        QuantityKind::Lyapunov => lyapunov(v, map),
        QuantityKind::Diffusion { observable } => diffusion(v, observable, map),
    }
}

/// B_0..B_d with |ρ̃^{(m)}| ≤ B_m on the whole domain: Markov's bound
/// Π_{i<m} (k² − i²)/(2i + 1) for T_k, m^d for Fourier modes.
fn derivative_bounds(basis: BasisKind, c: &[f64], d: usize) -> Vec<f64> {
    (0..=d)
        .map(|m| {
            let s: f64 = c
                .iter()
                .enumerate()
                .map(|(idx, v)| {
                    let k = basis.mode(idx) as f64;
                    let f = match basis {
                        BasisKind::Chebyshev => (0..m).map(|i| (k * k - (i * i) as f64) / (2 * i + 1) as f64).product::<f64>(),
                        BasisKind::FourierReal => k.powi(m as i32),
                    };
                    v.abs() * f.max(0.0)
                })
                .sum();
            inflate(s * SUM_SLACK)
        })
        .collect()
}

/// ρ̃ at the point `x` (a float), as an enclosure.
fn eval_point<T: IntervalScalar>(basis: BasisKind, c: &[f64], x: f64) -> T {
    let x = T::cst(x);
    let theta = if basis == BasisKind::Chebyshev { x.acos() } else { x };
    let terms: Vec<T> = c
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let m = T::cst(basis.mode(idx) as f64);
            let b = match basis {
                BasisKind::Chebyshev => (m * theta).cos(),
                BasisKind::FourierReal if idx == 0 => T::cst(1.0),
                BasisKind::FourierReal if idx % 2 == 1 => (m * x).cos(),
                BasisKind::FourierReal => (m * x).sin(),
            };
            T::cst(v) * b
        })
        .collect();
    T::sum(&terms)
}

/// ρ̃ over the interval `x` by the mean value theorem.
fn eval_range<T: IntervalScalar>(basis: BasisKind, c: &[f64], b1: f64, x: T) -> T {
    let m = x.mid();
    let r = (x.hi() - m).max(m - x.lo()).next_up();
    let d = inflate(b1 * r);
    eval_point::<T>(basis, c, m) + T::from_bounds(-d, d)
}

fn canonical_bounds<T: IntervalScalar>(basis: BasisKind) -> (T, T) {
    match basis {
        BasisKind::Chebyshev => (T::cst(-1.0), T::cst(1.0)),
        BasisKind::FourierReal => (T::cst(0.0), T::pi() * T::cst(2.0)),
    }
}

fn lerp<T: IntervalScalar>(a: T, b: T, i: usize, n: usize) -> T {
    a + (b - a) * T::cst(i as f64) / T::cst(n as f64)
}

/// Σ_ι w(s_ι) ρ̃(v_ι) at the canonical point(s) y.
fn integrand<T: IntervalScalar>(map: &MarkovMap, basis: BasisKind, c: &[f64], b1: f64, y: T) -> Result<T> {
    let mut acc = T::cst(0.0);
    for (x, s) in enclose_preimages(map, y)? {
        acc = acc - s * s.ln() * eval_range(basis, c, b1, x);
    }
    Ok(acc)
}

/// Taylor jet (length 6) of v_ι over the canonical range `y`, given the
/// enclosure `x` of v_ι(y).
fn inverse_jet<T: IntervalScalar>(map: &MarkovMap, iota: usize, y: T, x: T) -> Result<Jet<6, T>> {
    let j = match &map.definition {
        Definition::InverseLift { .. } => {
            let shift = T::pi() * T::cst(2.0 * iota as f64);
            map.inverse_lift_t(Jet::<6, T>::variable(y + shift)).unwrap().0
        }
        Definition::Lift { .. } => map.forward_t(0, Jet::<6, T>::variable(x)).unwrap().revert(x),
        Definition::Branches(_) => map.forward_t(iota, Jet::<6, T>::variable(x)).unwrap().revert(x),
    };
    if j.c.iter().any(|e| !e.is_valid()) {
        return Err(Error::Validation(format!("derivatives of branch {iota} could not be enclosed over {y:?}")));
    }
    Ok(j)
}

struct Group {
    m4: f64,
    /// sup over the group of Σ_ι |w(s_ι)|.
    weight: f64,
}

fn group_bounds<T: IntervalScalar>(map: &MarkovMap, b: &[f64], y: T) -> Result<Group> {
    let mut f = Jet::<5, T>::constant(T::cst(0.0));
    let mut weight = 0.0;
    let unit = T::from_bounds(-1.0, 1.0);
    for (iota, (x, s)) in enclose_preimages(map, y)?.into_iter().enumerate() {
        let v = inverse_jet(map, iota, y, x)?;
        let mut dv = [T::cst(0.0); 5];
        let mut inner = [T::cst(0.0); 5];
        for i in 0..5 {
            dv[i] = v.c[i + 1] * T::cst((i + 1) as f64);
            inner[i] = v.c[i];
        }
        let sign = if dv[0].lo() > 0.0 {
            1.0
        } else if dv[0].hi() < 0.0 {
            -1.0
        } else {
            return Err(Error::Validation(format!("branch {iota} is not monotone over {y:?}")));
        };
        let sj = Jet { c: dv.map(|e| e * T::cst(sign)) };
        let w = -(sj * sj.ln());
        let outer = [
            // the value only enters the constant term
            T::from_bounds(-b[0], b[0]),
            unit * T::cst(b[1]),
            unit * T::cst(b[2]) / T::cst(2.0),
            unit * T::cst(b[3]) / T::cst(6.0),
            unit * T::cst(b[4]) / T::cst(24.0),
        ];
        f = f + w * Jet::compose(&outer, Jet { c: inner });
        weight += (-(s * s.ln())).mag();
    }
    let m4 = f.c[4].mag() * 24.0;
    if !m4.is_finite() {
        return Err(Error::Validation(format!("fourth derivative of the integrand is unbounded over {y:?}")));
    }
    Ok(Group { m4: inflate(m4), weight: inflate(weight) })
}

fn lyapunov<T: IntervalScalar>(v: &Validated<T>, map: &MarkovMap) -> Result<ValidatedQuantity> {
    let cert = &v.certificate;
    let (basis, c) = (cert.basis, &cert.coefficients[..]);
    let b = derivative_bounds(basis, c, 4);
    let (lo, hi) = canonical_bounds::<T>(basis);
    let ends: Vec<T> = (0..=GROUPS).map(|g| lerp(lo, hi, g, GROUPS)).collect();
    let density_target = QUADRATURE_TARGET / (hi - lo).hi();
    let groups: Vec<(Group, usize)> = (0..GROUPS)
        .into_par_iter()
        .map(|g| {
            let y = T::from_bounds(ends[g].lo(), ends[g + 1].hi());
            let gr = group_bounds(map, &b, y)?;
            let len = (ends[g + 1] - ends[g]).hi();
            let p = (len * (gr.m4 / (4320.0 * density_target)).powf(0.25)).ceil();
            let panels = if p.is_finite() { (p as usize).clamp(1, PANEL_CAP) } else { PANEL_CAP };
            Ok((gr, panels))
        })
        .collect::<Result<_>>()?;
    let mut quad_err = 0.0;
    let mut functional = 0.0;
    for (g, (gr, panels)) in groups.iter().enumerate() {
        let len = (ends[g + 1] - ends[g]).hi();
        let h = inflate(len / *panels as f64);
        quad_err += *panels as f64 * h.powi(5) * gr.m4 / 4320.0;
        functional += len * gr.weight;
    }
    let s3 = T::cst(3.0).sqrt();
    let tasks: Vec<(usize, usize)> = groups.iter().enumerate().flat_map(|(g, (_, p))| (0..*p).map(move |i| (g, i))).collect();
    let parts: Vec<T> = tasks
        .par_iter()
        .map(|&(g, i)| {
            let p = groups[g].1;
            let a = lerp(ends[g], ends[g + 1], i, p);
            let bb = lerp(ends[g], ends[g + 1], i + 1, p);
            let mid = (a + bb) / T::cst(2.0);
            let half = (bb - a) / T::cst(2.0);
            let f1 = integrand(map, basis, c, b[1], mid - half / s3)?;
            let f2 = integrand(map, basis, c, b[1], mid + half / s3)?;
            Ok(half * (f1 + f2))
        })
        .collect::<Result<_>>()?;
    let density_error = inflate(cert.eps_total * functional);
    ValidatedQuantity::from_enclosure(T::sum(&parts), density_error, inflate(quad_err))
}

/// Coefficients of the product of two Chebyshev series, exactly.
fn chebyshev_product<T: IntervalScalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut slots: Vec<Vec<T>> = vec![Vec::new(); a.len() + b.len() - 1];
    let half = T::cst(0.5);
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let p = x * y * half;
            slots[i + j].push(p);
            slots[i.abs_diff(j)].push(p);
        }
    }
    slots.iter().map(|s| T::sum(s)).collect()
}

fn chebyshev_integral<T: IntervalScalar>(c: &[T]) -> T {
    let terms: Vec<T> = c
        .iter()
        .enumerate()
        .step_by(2)
        .map(|(k, &v)| {
            let kk = k as f64;
            v * T::cst(2.0) / T::cst(1.0 - kk * kk)
        })
        .collect();
    T::sum(&terms)
}

/// ‖·‖ of the coefficients `c` placed at indices `offset..`.
fn shifted_norm<T: IntervalScalar>(basis: BasisKind, c: &[T], offset: usize) -> f64 {
    let mut v = vec![T::cst(0.0); offset];
    v.extend_from_slice(c);
    norm_upper_t(basis, &v)
}

fn diffusion<T: IntervalScalar>(v: &Validated<T>, expr: &Expr, map: &MarkovMap) -> Result<ValidatedQuantity> {
    let cert = &v.certificate;
    if cert.basis != BasisKind::Chebyshev {
        return Err(Error::InvalidInput("validated diffusion coefficients are implemented for interval maps only".into()));
    }
    let degree = expr
        .polynomial_degree()
        .ok_or_else(|| Error::InvalidInput(format!("validated diffusion needs a polynomial observable, got '{}'", expr.source())))?;
    let basis = BasisKind::Chebyshev;
    let n = cert.order;

    // the observable is interpolated exactly at degree + 1 nodes
    let m = degree as usize + 1;
    let tr = Transform::<T>::new(basis, m);
    let values: Vec<T> = super::interval_nodes::<T>(basis, m).into_iter().map(|x| expr.eval(map.domain.from_canonical_t(x))).collect();
    let a: Vec<T> = (0..m).map(|j| tr.coefficient(&values, j)).collect();
    if a.iter().any(|e| !e.is_valid()) {
        return Err(Error::Validation("observable could not be enclosed".into()));
    }
    let amag: Vec<f64> = a.iter().map(|e| e.mag()).collect();
    let a_sup = sup_upper(basis, &amag) * SUM_SLACK;
    let a_factor = inflate(bv_seminorm_upper(basis, &amag) * SUM_SLACK + 2.0 * a_sup);
    let a_l1 = inflate(basis.domain_length() * a_sup);

    let rho: Vec<T> = cert.coefficients.iter().map(|&x| T::cst(x)).collect();
    let rho_a = chebyshev_product(&rho, &a);
    let mean = chebyshev_integral(&rho_a);
    let psi: Vec<T> = rho_a.iter().enumerate().map(|(k, &x)| x - mean * rho.get(k).copied().unwrap_or(T::cst(0.0))).collect();
    let (phi, tail) = psi.split_at(n.min(psi.len()));
    let sol = v.solve(phi)?;

    let eps = cert.eps_total;
    let eps_psi = inflate(eps * (a_factor + mean.mag() + a_l1 * (norm_upper_t(basis, &rho) + eps)));
    let eps_chi =
        inflate(cert.bsol * (eps_psi + shifted_norm(basis, tail, n)) + v.finite_section_error(norm_upper_t(basis, phi)) + sol.eps_interval);
    let g: Vec<T> = psi.iter().enumerate().map(|(k, &p)| T::cst(2.0) * T::cst(sol.solution.get(k).copied().unwrap_or(0.0)) - p).collect();
    let sigma2 = chebyshev_integral(&chebyshev_product(&a, &g));
    ValidatedQuantity::from_enclosure(sigma2, inflate(a_l1 * (2.0 * eps_chi + eps_psi)), 0.0)
}
