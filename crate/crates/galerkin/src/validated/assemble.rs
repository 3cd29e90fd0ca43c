//! Interval enclosure of the Galerkin matrix L^(N).
//!
//! Node values of every column are computed from the preimage enclosures on
//! 2N nodes, transformed by plain O(N²) sums with interval twiddle tables,
//! widened by the aliasing bound and finally intersected with the entry
//! bound. Interpolating on N nodes would leave aliasing errors near the
//! diagonal far above the rounding level.

use rayon::prelude::*;

use crate::basis::BasisKind;
use crate::bounds::{aliasing_bound, EntryBoundModel};
use crate::error::{Error, Result};
use crate::map::MarkovMap;
use crate::transfer::basis_for;

use super::enclose::enclose_preimages;
use super::IntervalScalar;

const OVERSAMPLING: usize = 2;

/// Interval matrix stored by columns: `cols[k][j]` encloses L_jk.
#[derive(Clone, Debug)]
pub struct IntervalMatrix<T> {
    pub basis: BasisKind,
    pub n: usize,
    pub cols: Vec<Vec<T>>,
}

impl<T: IntervalScalar> IntervalMatrix<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.cols[col][row]
    }

    pub fn max_width(&self) -> f64 {
        self.cols.iter().flatten().map(|e| e.width()).fold(0.0, f64::max)
    }
}

/// Interpolation nodes as intervals.
pub fn interval_nodes<T: IntervalScalar>(basis: BasisKind, n: usize) -> Vec<T> {
    let pi = T::pi();
    match basis {
        BasisKind::FourierReal => (0..n).map(|l| pi * T::cst(2.0 * l as f64) / T::cst(n as f64)).collect(),
        BasisKind::Chebyshev => (0..n).map(|l| (pi * T::cst((2 * l + 1) as f64) / T::cst(2.0 * n as f64)).cos()).collect(),
    }
}

/// Value of basis element `idx` at the preimage `x` (with `theta` = acos x
/// for Chebyshev).
fn element<T: IntervalScalar>(basis: BasisKind, idx: usize, x: T, theta: T) -> T {
    let m = T::cst(basis.mode(idx) as f64);
    match basis {
        BasisKind::Chebyshev => (m * theta).cos(),
        BasisKind::FourierReal if idx == 0 => T::cst(1.0),
        BasisKind::FourierReal if idx % 2 == 1 => (m * x).cos(),
        BasisKind::FourierReal => (m * x).sin(),
    }
}

pub(super) struct Transform<T> {
    basis: BasisKind,
    n: usize,
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: IntervalScalar> Transform<T> {
    pub(super) fn new(basis: BasisKind, n: usize) -> Self {
        let pi = T::pi();
        match basis {
            // cos(iπ/(2N)) for i < 4N
            BasisKind::Chebyshev => {
                let cos = (0..4 * n).map(|i| (pi * T::cst(i as f64) / T::cst(2.0 * n as f64)).cos()).collect();
                Transform { basis, n, cos, sin: Vec::new() }
            }
            BasisKind::FourierReal => {
                let arg = |i: usize| pi * T::cst(2.0 * i as f64) / T::cst(n as f64);
                Transform { basis, n, cos: (0..n).map(|i| arg(i).cos()).collect(), sin: (0..n).map(|i| arg(i).sin()).collect() }
            }
        }
    }

    /// Coefficient `row` of the interpolant of `values`.
    pub(super) fn coefficient(&self, values: &[T], row: usize) -> T {
        let n = self.n;
        let terms: Vec<T> = match self.basis {
            BasisKind::Chebyshev => values.iter().enumerate().map(|(l, &q)| q * self.cos[(row * (2 * l + 1)) % (4 * n)]).collect(),
            BasisKind::FourierReal => {
                let m = self.basis.mode(row);
                let table = if row == 0 || row % 2 == 1 { &self.cos } else { &self.sin };
                values.iter().enumerate().map(|(l, &q)| q * table[(m * l) % n]).collect()
            }
        };
        let single = match self.basis {
            BasisKind::Chebyshev => row == 0,
            BasisKind::FourierReal => row == 0 || (n.is_multiple_of(2) && row == n - 1),
        };
        let scale = if single { 1.0 } else { 2.0 };
        T::sum(&terms) * T::cst(scale) / T::cst(n as f64)
    }
}

/// Encloses the leading n×n block of L in the basis of `map`.
pub fn interval_assemble<T: IntervalScalar>(map: &MarkovMap, n: usize, model: &EntryBoundModel) -> Result<IntervalMatrix<T>> {
    let basis = basis_for(map);
    if model.basis != basis {
        return Err(Error::InvalidInput(format!("entry model is for {:?}, map uses {basis:?}", model.basis)));
    }
    if n < 4 {
        return Err(Error::InvalidInput(format!("order {n} is below the minimum of 4")));
    }
    let m = OVERSAMPLING * n;
    let nodes = interval_nodes::<T>(basis, m);
    let pre: Vec<Vec<(T, T, T)>> = nodes
        .par_iter()
        .map(|&y| {
            let e = enclose_preimages(map, y)?;
            Ok(e.into_iter().map(|(x, s)| (x, s, if basis == BasisKind::Chebyshev { x.acos() } else { x })).collect())
        })
        .collect::<Result<_>>()?;
    let tr = Transform::<T>::new(basis, m);
    let cols = (0..n)
        .into_par_iter()
        .map(|k| {
            let values: Vec<T> = pre
                .iter()
                .map(|branches| branches.iter().fold(T::cst(0.0), |acc, &(x, s, th)| acc + s * element(basis, k, x, th)))
                .collect();
            (0..n)
                .map(|j| {
                    let a = aliasing_bound(model, j, k, m);
                    let c = tr.coefficient(&values, j) + T::from_bounds(-a, a);
                    let b = model.bound_layout(j, k);
                    if !c.is_valid() {
                        return Err(Error::Validation(format!("entry ({j}, {k}) could not be enclosed")));
                    }
                    if !b.is_finite() {
                        return Ok(c);
                    }
                    c.intersect(&T::from_bounds(-b, b)).ok_or_else(|| {
                        Error::Validation(format!(
                            "entry ({j}, {k}) enclosure {c:?} misses its bound ±{b:e}: the bound model or map constants are inconsistent"
                        ))
                    })
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalMatrix { basis, n, cols })
}
