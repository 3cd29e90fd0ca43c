//! Error of fixed-order solutions against a high-order reference.

use std::time::Instant;

use serde::Serialize;

use super::{acim_qd, Mode, Solver};
use crate::basis::{bv_norm_upper, BasisKind};
use crate::error::{Error, Result};
use crate::map::MarkovMap;
use crate::quad::Qd;
use crate::transfer::basis_for;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    Quad,
}

impl std::str::FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Precision> {
        match s {
            "double" | "53" | "64" => Ok(Precision::Double),
            "quad" | "quad-double" | "212" => Ok(Precision::Quad),
            _ => Err(Error::InvalidInput(format!("unknown precision '{s}' (expected double or quad)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergencePoint {
    pub order: usize,
    /// max_j |ρ_N,j - ρ_ref,j|
    pub linf_error: f64,
    /// Upper bound on the BV norm of ρ_N - ρ_ref.
    pub bv_error: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub map: String,
    pub basis: BasisKind,
    pub precision: Precision,
    pub reference_order: usize,
    pub points: Vec<ConvergencePoint>,
}

fn solve(map: &MarkovMap, n: usize, precision: Precision) -> Result<Vec<Qd>> {
    match precision {
        Precision::Double => {
            let r = Solver::new(map, Mode::Fixed { order: n })?.acim()?;
            Ok(r.solution.coeffs.into_iter().map(Qd::from_f64).collect())
        }
        Precision::Quad => acim_qd(map, n),
    }
}

/// Solves at each order and compares with the solution at
/// `reference_order` (default four times the largest order).
pub fn convergence_study(
    map: &MarkovMap,
    orders: &[usize],
    reference_order: Option<usize>,
    precision: Precision,
) -> Result<ConvergenceStudy> {
    let max = orders.iter().copied().max().ok_or_else(|| Error::InvalidInput("no orders given".into()))?;
    let reference_order = reference_order.unwrap_or(4 * max);
    if reference_order <= max {
        return Err(Error::InvalidInput(format!("reference order {reference_order} must exceed every listed order")));
    }
    let basis = basis_for(map);
    let reference = solve(map, reference_order, precision)?;
    let mut points = Vec::with_capacity(orders.len());
    for &n in orders {
        let start = Instant::now();
        let x = solve(map, n, precision)?;
        let seconds = start.elapsed().as_secs_f64();
        let diff: Vec<f64> = reference.iter().enumerate().map(|(j, &r)| (x.get(j).copied().unwrap_or(Qd::ZERO) - r).to_f64()).collect();
        points.push(ConvergencePoint {
            order: n,
            linf_error: diff.iter().fold(0.0, |m, v| m.max(v.abs())),
            bv_error: bv_norm_upper(basis, &diff),
            seconds,
        });
    }
    Ok(ConvergenceStudy { map: map.name.clone(), basis, precision, reference_order, points })
}

/// Least-squares line through (x, y): (slope, intercept, correlation r).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = x.map(|v| 3.0 - 2.0 * v);
        let (s, c, r) = linear_fit(&x, &y);
        assert!((s + 2.0).abs() < 1e-14 && (c - 3.0).abs() < 1e-14 && (r + 1.0).abs() < 1e-14);
    }

    #[test]
    fn precision_names() {
        assert_eq!("quad".parse::<Precision>().unwrap(), Precision::Quad);
        assert!("single".parse::<Precision>().is_err());
    }
}
