//! Bounds on transfer-operator matrix entries, aliasing errors and the
//! truncation operator E_N = (id − P_N) L P_N.
//!
//! Entry models work in the index space where the decay estimates are
//! natural: complex exponential modes j, k ∈ ℤ for circle maps and
//! Chebyshev degrees j, k ≥ 0 for interval maps. [`EntryBoundModel::bound_layout`]
//! and [`aliasing_bound`] translate to the real sine/cosine layout the
//! solvers use.
//!
//! Sums of many terms are accumulated in f64 and inflated by
//! [`SUM_SLACK`] at the end, which covers their rounding error.

mod distortion;
mod recurrence;

use std::f64::consts::PI;

use serde::Serialize;

use crate::basis::BasisKind;
use crate::error::{Error, Result};
use crate::map::{DomainKind, MarkovMap};
use crate::solver::assemble_qd;
use crate::transfer::basis_for;

pub use distortion::{chebyshev_conjugation_constants, circle_distortion_constants, DistortionEstimate, DEFAULT_SAMPLES, INFLATION};
pub use recurrence::{w_polynomials, w_weights, Diagonal, Monomial, Poly, MAX_ORDER};

pub const SUM_SLACK: f64 = 1.0 + 1e-10;

/// Rows checked one by one before a tail is closed in the differentiable case.
const EXPLICIT_ROWS: i64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryCase {
    /// c·e^{−ζ d(j, k p̃)}.
    Analytic { c: f64, zeta: f64 },
    /// Σ_n W_n |k|ⁿ / d(j, k μ̃)^{n+r}.
    Differentiable { r: usize, w: Vec<f64>, mu: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryBoundModel {
    pub basis: BasisKind,
    pub case: EntryCase,
    /// Slope interval p̃; the model applies to entries with j ∉ k p̃.
    pub p: (f64, f64),
    /// ‖h‖₁/2π for circle maps. For interval maps the factor multiplying
    /// t_j = 2 − δ_{j0}, i.e. 1 + 2C₁ from G ≤ 4π(1 + 2C₁).
    pub prefactor: f64,
    /// C₁ used by the uniform bound of interval maps.
    pub c1: f64,
}

/// |L_jk| ≤ 1 for circle maps and (2 − δ_{j0})(2 + 4C₁) for interval maps.
pub fn uniform_entry_bound(basis: BasisKind, c1: f64, j: i64) -> f64 {
    match basis {
        BasisKind::FourierReal => 1.0,
        BasisKind::Chebyshev => t(j) * (2.0 + 4.0 * c1),
    }
}

fn t(j: i64) -> f64 {
    if j == 0 {
        1.0
    } else {
        2.0
    }
}

/// Distance from x to the interval s·[a, b].
fn distance_to_scaled(x: f64, s: f64, (a, b): (f64, f64)) -> f64 {
    let (lo, hi) = if s >= 0.0 { (s * a, s * b) } else { (s * b, s * a) };
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

fn check_slopes(p: (f64, f64)) -> Result<()> {
    if !(p.0 <= p.1) || !p.0.is_finite() || !p.1.is_finite() {
        return Err(Error::InvalidInput(format!("slope interval [{}, {}] is not a finite interval", p.0, p.1)));
    }
    Ok(())
}

fn check_c1(c1: f64) -> Result<()> {
    if !(c1 >= 0.0 && c1.is_finite()) {
        return Err(Error::InvalidInput(format!("C1 must be finite and nonnegative, got {c1}")));
    }
    Ok(())
}

fn prefactor_for(basis: BasisKind, c1: f64) -> f64 {
    match basis {
        BasisKind::FourierReal => 1.0,
        BasisKind::Chebyshev => 1.0 + 2.0 * c1,
    }
}

/// Inputs of the analytic model: strip constants and slopes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticInputs {
    pub upsilon: f64,
    pub h: f64,
    pub delta: f64,
    pub mu: (f64, f64),
    pub p: (f64, f64),
    pub c1: f64,
}

/// The analytic model: bound(j,k) = prefactor·t_j·e^{ζ(H − d(j, k p̃))}
/// with ζ = min{2 d(μ̃, ℝ∖p̃)/Υ, δ}.
pub fn entry_bound_analytic(basis: BasisKind, inp: &AnalyticInputs) -> Result<EntryBoundModel> {
    check_slopes(inp.p)?;
    check_slopes(inp.mu)?;
    check_c1(inp.c1)?;
    if !(inp.delta > 0.0) || !(inp.upsilon >= 0.0) || !(inp.h >= 0.0) || !inp.h.is_finite() {
        return Err(Error::InvalidInput("analytic model needs δ > 0 and finite nonnegative Υ, H".into()));
    }
    let margin = (inp.mu.0 - inp.p.0).min(inp.p.1 - inp.mu.1);
    let zeta = if inp.upsilon == 0.0 { inp.delta } else { (2.0 * margin / inp.upsilon).min(inp.delta) };
    if !(zeta > 0.0) || !(margin > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ζ = {zeta} is not positive: p̃ = [{}, {}] must strictly contain μ̃ = [{}, {}]",
            inp.p.0, inp.p.1, inp.mu.0, inp.mu.1
        )));
    }
    Ok(EntryBoundModel {
        basis,
        case: EntryCase::Analytic { c: (zeta * inp.h).exp(), zeta },
        p: inp.p,
        prefactor: prefactor_for(basis, inp.c1),
        c1: inp.c1,
    })
}

/// The differentiable model from Υ₁..Υ_r and H₁..H_r.
pub fn entry_bound_differentiable(
    basis: BasisKind,
    upsilon: &[f64],
    h: &[f64],
    mu: (f64, f64),
    p: (f64, f64),
    c1: f64,
) -> Result<EntryBoundModel> {
    check_slopes(p)?;
    check_slopes(mu)?;
    check_c1(c1)?;
    if !(p.0 <= mu.0 && mu.1 <= p.1) {
        return Err(Error::InvalidInput(format!("p̃ = [{}, {}] must contain μ̃ = [{}, {}]", p.0, p.1, mu.0, mu.1)));
    }
    let w = w_weights(upsilon, h)?;
    Ok(EntryBoundModel { basis, case: EntryCase::Differentiable { r: upsilon.len(), w, mu }, p, prefactor: prefactor_for(basis, c1), c1 })
}

impl EntryBoundModel {
    /// The explicit Lanford model |L_jk| ≤ t_j √(7 + √33/2) e^{a k − ζ j}
    /// with ζ = cosh⁻¹(7/4) and a = cosh⁻¹(4 − √6).
    pub fn lanford() -> EntryBoundModel {
        let zeta = 1.75_f64.acosh();
        let a = (4.0 - 6.0_f64.sqrt()).acosh();
        let p = a / zeta;
        EntryBoundModel {
            basis: BasisKind::Chebyshev,
            case: EntryCase::Analytic { c: (7.0 + 33.0_f64.sqrt() / 2.0).sqrt(), zeta },
            p: (-p, p),
            prefactor: 1.0,
            c1: 4.0 / 9.0,
        }
    }

    pub fn zeta(&self) -> Option<f64> {
        match self.case {
            EntryCase::Analytic { zeta, .. } => Some(zeta),
            EntryCase::Differentiable { .. } => None,
        }
    }

    /// d(j, k p̃).
    pub fn distance(&self, j: i64, k: i64) -> f64 {
        distance_to_scaled(j as f64, k as f64, self.p)
    }

    pub fn in_region(&self, j: i64, k: i64) -> bool {
        self.distance(j, k) > 0.0
    }

    fn row_factor(&self, j: i64) -> f64 {
        match self.basis {
            BasisKind::FourierReal => self.prefactor,
            BasisKind::Chebyshev => t(j) * self.prefactor,
        }
    }

    /// The model's right-hand side; meaningful only inside the region.
    pub fn model_value(&self, j: i64, k: i64) -> f64 {
        match &self.case {
            EntryCase::Analytic { c, zeta } => self.row_factor(j) * c * (-zeta * self.distance(j, k)).exp(),
            EntryCase::Differentiable { r, w, mu } => {
                let d = distance_to_scaled(j as f64, k as f64, *mu);
                let ka = (k as f64).abs();
                let s: f64 = w.iter().enumerate().map(|(n, wn)| wn * ka.powi(n as i32) / d.powi((n + r) as i32)).sum();
                self.row_factor(j) * s
            }
        }
    }

    /// Bound on |L_jk| in the model's index space: the model inside its
    /// region (capped by the uniform bound), the uniform bound elsewhere.
    pub fn bound(&self, j: i64, k: i64) -> f64 {
        let u = uniform_entry_bound(self.basis, self.c1, j);
        if self.in_region(j, k) {
            self.model_value(j, k).min(u)
        } else {
            u
        }
    }

    /// Bound on the entry (row, col) of the real-layout matrix.
    pub fn bound_layout(&self, row: usize, col: usize) -> f64 {
        match self.basis {
            BasisKind::Chebyshev => self.bound(row as i64, col as i64),
            BasisKind::FourierReal => {
                let (rs, cs) = (signed_modes(self.basis.mode(row)), signed_modes(self.basis.mode(col)));
                let s: f64 = rs.iter().flat_map(|&j| cs.iter().map(move |&k| (j, k))).map(|(j, k)| self.bound(j, k)).sum();
                s / cs.len() as f64 * SUM_SLACK
            }
        }
    }

    /// Σ_{i≥0} bound(start + i·step, k), summing explicitly until the
    /// progression has left k p̃ for good and closing the rest in closed form.
    fn progression_sum(&self, k: i64, start: i64, step: i64) -> f64 {
        assert!(step != 0);
        let (lo, hi) = {
            let (a, b) = (k as f64 * self.p.0, k as f64 * self.p.1);
            (a.min(b), a.max(b))
        };
        let mut j = start;
        let mut acc = 0.0;
        loop {
            let beyond = if step > 0 { j as f64 > hi } else { (j as f64) < lo };
            if beyond {
                return (acc + self.tail(j, k, step.unsigned_abs() as f64)) * SUM_SLACK;
            }
            acc += self.bound(j, k);
            j += step;
        }
    }

    /// Σ_{i≥0} model(j0 + i·step, k) for j0 beyond k p̃ in the step's
    /// direction, where the distance grows by |step| per term.
    fn tail(&self, j0: i64, k: i64, step: f64) -> f64 {
        let tmax = match self.basis {
            BasisKind::FourierReal => self.prefactor,
            BasisKind::Chebyshev => 2.0 * self.prefactor,
        };
        match &self.case {
            EntryCase::Analytic { c, zeta } => tmax * c * (-zeta * self.distance(j0, k)).exp() / -(-zeta * step).exp_m1(),
            EntryCase::Differentiable { r, w, mu } => {
                let d = distance_to_scaled(j0 as f64, k as f64, *mu);
                let ka = (k as f64).abs();
                let mut s = 0.0;
                for (n, wn) in w.iter().enumerate() {
                    if *wn == 0.0 {
                        continue;
                    }
                    let q = (n + r) as i32;
                    if q <= 1 {
                        return f64::INFINITY;
                    }
                    // g(d) + ∫_d^∞ g / step for decreasing g(x) = x^{−q}
                    s += wn * ka.powi(n as i32) * (d.powi(-q) + d.powi(1 - q) / ((q - 1) as f64 * step));
                }
                tmax * s
            }
        }
    }
}

fn signed_modes(m: usize) -> Vec<i64> {
    if m == 0 {
        vec![0]
    } else {
        vec![m as i64, -(m as i64)]
    }
}

/// Bound A on the aliasing error of the real-layout entry (row, col) when
/// columns are interpolated on `n` nodes: the sum of entry bounds over all
/// modes that fold onto `row`.
pub fn aliasing_bound(model: &EntryBoundModel, row: usize, col: usize, n: usize) -> f64 {
    let n = n as i64;
    match model.basis {
        BasisKind::Chebyshev => {
            // first-kind nodes: T_{2mn ± j} = (−1)^m T_j on the grid
            let (j, k) = (row as i64, col as i64);
            let plus = model.progression_sum(k, 2 * n + j, 2 * n);
            if j == 0 {
                plus
            } else {
                (plus + model.progression_sum(k, 2 * n - j, 2 * n)) * SUM_SLACK
            }
        }
        BasisKind::FourierReal => {
            let (rs, cs) = (signed_modes(model.basis.mode(row)), signed_modes(model.basis.mode(col)));
            let mut s = 0.0;
            for &j in &rs {
                for &k in &cs {
                    s += model.progression_sum(k, j + n, n) + model.progression_sum(k, j - n, -n);
                }
            }
            s / cs.len() as f64 * SUM_SLACK
        }
    }
}

/// ln Σ exp(x_i).
fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln of Σ_{j in a column tail} w_jk B(j,k)² |j|^{2·with_d}, rows running
/// from j0 in direction `dir`.
fn log_column_tail(model: &EntryBoundModel, k: i64, j0: i64, dir: i64, with_d: bool) -> f64 {
    let weight = |j: i64| match model.basis {
        BasisKind::FourierReal => 1.0,
        BasisKind::Chebyshev => t(k) / t(j),
    };
    let pw = if with_d { 2 } else { 0 };
    let (lo, hi) = {
        let (a, b) = (k as f64 * model.p.0, k as f64 * model.p.1);
        (a.min(b), a.max(b))
    };
    let mut logs = Vec::new();
    let mut j = j0;
    let mut explicit = 0;
    loop {
        let beyond = if dir > 0 { j as f64 > hi } else { (j as f64) < lo };
        let done = beyond
            && match model.case {
                EntryCase::Analytic { .. } => true,
                EntryCase::Differentiable { .. } => explicit >= EXPLICIT_ROWS,
            };
        if done {
            break;
        }
        let b = model.bound(j, k);
        logs.push(2.0 * b.ln() + weight(j).ln() + pw as f64 * (j.abs() as f64).ln());
        if beyond {
            explicit += 1;
        }
        j += dir;
    }
    // closed-form remainder from j onwards; here |j| > 0 so t_j = 2
    let jj = j.abs() as f64;
    let w = weight(j);
    let rest = match &model.case {
        EntryCase::Analytic { c, zeta } => {
            let q = (-2.0 * zeta).exp();
            let poly = if with_d {
                jj * jj / (1.0 - q) + 2.0 * jj * q / ((1.0 - q) * (1.0 - q)) + q * (1.0 + q) / (1.0 - q).powi(3)
            } else {
                1.0 / (1.0 - q)
            };
            let lead = model.row_factor(j) * c;
            2.0 * lead.ln() - 2.0 * zeta * model.distance(j, k) + w.ln() + poly.ln()
        }
        EntryCase::Differentiable { r, w: ws, mu } => {
            // f(x) = |j+x|^pw·B(j+x)² is decreasing; Σ f ≤ f(0) + ∫_0^∞ f with
            // |j+x|/d(x) ≤ |j|/d(0) and B² expanded into d^{−(n+m+2r)} terms
            let d = distance_to_scaled(j as f64, k as f64, *mu);
            let ka = (k as f64).abs();
            let a: Vec<f64> = ws.iter().enumerate().map(|(n, wn)| wn * ka.powi(n as i32)).collect();
            let lead = model.row_factor(j);
            let mut first = 0.0;
            let mut integral = 0.0;
            for (n, an) in a.iter().enumerate() {
                for (m, am) in a.iter().enumerate() {
                    let qq = (n + m + 2 * r) as i32;
                    let prod = an * am;
                    if prod == 0.0 {
                        continue;
                    }
                    first += prod * d.powi(-qq);
                    if qq <= pw + 1 {
                        return f64::INFINITY;
                    }
                    integral += prod * d.powi(pw + 1 - qq) / (qq - pw - 1) as f64;
                }
            }
            let ratio = if pw > 0 { (jj / d).powi(pw) } else { 1.0 };
            let total = lead * lead * w * (first * jj.powi(pw) + ratio * integral);
            total.ln()
        }
    };
    logs.push(rest);
    log_sum_exp(&logs)
}

/// Upper bound on ‖E_N‖_BV, E_N = (id − P_N) L P_N, for the real-layout
/// order `n`: 2π(‖D E‖_F + ‖E‖_F) over the tail block, with Chebyshev
/// entries weighted by √(t_k/t_j).
///
/// For circle maps with n = 2M the layout keeps cos Mθ but not sin Mθ; the
/// block used is rows |j| ≥ M, columns |k| ≤ M, which contains E_N.
pub fn truncation_bound(model: &EntryBoundModel, n: usize) -> f64 {
    let (cols, starts): (Vec<i64>, Vec<(i64, i64)>) = match model.basis {
        BasisKind::Chebyshev => ((0..n as i64).collect(), vec![(n as i64, 1)]),
        BasisKind::FourierReal => {
            let mc = (n / 2) as i64;
            let mr = n.div_ceil(2) as i64;
            ((-mc..=mc).collect(), vec![(mr, 1), (-mr, -1)])
        }
    };
    let mut le = Vec::new();
    let mut ld = Vec::new();
    for &k in &cols {
        for &(j0, dir) in &starts {
            le.push(log_column_tail(model, k, j0, dir, false));
            ld.push(log_column_tail(model, k, j0, dir, true));
        }
    }
    let e = (0.5 * log_sum_exp(&le)).exp();
    let d = (0.5 * log_sum_exp(&ld)).exp();
    2.0 * PI * (d + e) * SUM_SLACK
}

/// Bound model used when none is specified: the explicit model for the
/// catalog Lanford map, otherwise the analytic model from strip constants
/// for holomorphic maps and the r = 2 differentiable model otherwise.
pub fn default_model(map: &MarkovMap) -> Result<EntryBoundModel> {
    if map.name == "lanford" {
        return Ok(EntryBoundModel::lanford());
    }
    let basis = basis_for(map);
    let c1 = map.constants.c1.value.max(map.constants.c1_canonical);
    let est = match map.kind() {
        DomainKind::Periodic => circle_distortion_constants(map, None, 2, DEFAULT_SAMPLES)?,
        DomainKind::NonPeriodic => chebyshev_conjugation_constants(map, None, 2, DEFAULT_SAMPLES)?,
    };
    let pad = 0.25 * (est.mu.1 - est.mu.0).max(0.05);
    let p = (est.mu.0 - pad, est.mu.1 + pad);
    entry_bound_differentiable(basis, &est.upsilon, &est.h, est.mu, p, c1)
}

/// One row of a domination table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryCheck {
    pub row: usize,
    pub col: usize,
    pub entry: f64,
    pub bound: f64,
}

impl EntryCheck {
    pub fn violates(&self, slack: f64) -> bool {
        self.entry.abs() > self.bound * slack
    }
}

/// Entries of the leading `block`×`block` real-layout block next to their
/// bounds. Columns are assembled in quad-double at 4·block nodes, so
/// entries far below binary64 round-off are still meaningful.
pub fn entry_table(map: &MarkovMap, model: &EntryBoundModel, block: usize) -> Result<Vec<EntryCheck>> {
    let n = (4 * block).max(16);
    let cols = assemble_qd(map, n)?;
    let mut out = Vec::with_capacity(block * block);
    for row in 0..block {
        for col in 0..block {
            out.push(EntryCheck { row, col, entry: cols[col][row].to_f64(), bound: model.bound_layout(row, col) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
