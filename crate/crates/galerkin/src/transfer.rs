//! Galerkin matrix of the transfer operator (Lφ)(y) = Σ_ι |v_ι'(y)| φ(v_ι(y)).
//!
//! Column k holds the interpolation coefficients of L b_k on N nodes. The
//! preimages of the nodes are computed once per grid size and shared by all
//! columns.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::basis::{self, BasisKind, SpectralFunction};
use crate::error::Result;
use crate::map::{DomainKind, MarkovMap};

/// Preimages of one grid: per node, (argument, weight) per branch, where
/// the argument is acos v (Chebyshev) or v (Fourier) and the weight |v'|.
struct NodeData {
    pre: Vec<Vec<(f64, f64)>>,
}

pub struct TransferOperator<'a> {
    pub map: &'a MarkovMap,
    pub basis: BasisKind,
    cache: Mutex<HashMap<usize, Arc<NodeData>>>,
}

pub fn basis_for(map: &MarkovMap) -> BasisKind {
    match map.kind() {
        DomainKind::Periodic => BasisKind::FourierReal,
        DomainKind::NonPeriodic => BasisKind::Chebyshev,
    }
}

impl<'a> TransferOperator<'a> {
    pub fn new(map: &'a MarkovMap) -> Self {
        TransferOperator { map, basis: basis_for(map), cache: Mutex::new(HashMap::new()) }
    }

    fn node_data(&self, n: usize) -> Result<Arc<NodeData>> {
        if let Some(d) = self.cache.lock().unwrap().get(&n) {
            return Ok(d.clone());
        }
        let cheb = self.basis == BasisKind::Chebyshev;
        let pre = basis::nodes(self.basis, n)
            .par_iter()
            .map(|&y| {
                let jets = self.map.preimages(y)?;
                Ok(jets
                    .into_iter()
                    .map(|j| {
                        let arg = if cheb { j.v.clamp(-1.0, 1.0).acos() } else { j.v };
                        (arg, j.d1.abs())
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let d = Arc::new(NodeData { pre });
        self.cache.lock().unwrap().insert(n, d.clone());
        Ok(d)
    }

    /// Values of L b_k at the n nodes.
    pub fn column_values(&self, k: usize, n: usize) -> Result<Vec<f64>> {
        let data = self.node_data(n)?;
        let m = self.basis.mode(k) as f64;
        let f = |arg: f64| -> f64 {
            match self.basis {
                BasisKind::Chebyshev => (k as f64 * arg).cos(),
                BasisKind::FourierReal if k == 0 => 1.0,
                BasisKind::FourierReal if k % 2 == 1 => (m * arg).cos(),
                BasisKind::FourierReal => (m * arg).sin(),
            }
        };
        Ok(data.pre.iter().map(|node| node.iter().map(|&(a, w)| w * f(a)).sum()).collect())
    }

    /// First n Galerkin coefficients of L b_k, by interpolation on n nodes.
    pub fn assemble_column(&self, k: usize, n: usize) -> Result<Vec<f64>> {
        Ok(basis::analyze(self.basis, &self.column_values(k, n)?))
    }

    /// The n×n block, column-major (`cols[k][j]` = L_jk).
    pub fn assemble(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        self.node_data(n)?;
        (0..n).into_par_iter().map(|k| self.assemble_column(k, n)).collect()
    }

    /// Interpolation coefficients on n nodes of L f.
    pub fn apply(&self, f: &SpectralFunction, n: usize) -> Result<SpectralFunction> {
        let vals = self.apply_values(f, n)?;
        Ok(SpectralFunction::new(self.basis, basis::analyze(self.basis, &vals)))
    }

    pub fn apply_values(&self, f: &SpectralFunction, n: usize) -> Result<Vec<f64>> {
        let data = self.node_data(n)?;
        let cheb = self.basis == BasisKind::Chebyshev;
        Ok(data.pre.par_iter().map(|node| node.iter().map(|&(a, w)| w * f.eval(if cheb { a.cos() } else { a })).sum()).collect())
    }

    /// Drops cached preimage grids.
    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }
}
