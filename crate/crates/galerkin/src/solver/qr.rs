//! Householder QR on an operator with infinitely many rows.
//!
//! Columns of K = id - L + u𝒮 are produced one at a time, each as a finite
//! vector whose length is whatever its interpolation needed. Reflectors are
//! stored with the offset of their first row and only their nonzero span.

use crate::basis::SpectralFunction;
use crate::error::{Error, Result};
use crate::transfer::TransferOperator;

struct Reflector {
    offset: usize,
    /// Unit vector; H = I - 2 v vᵀ on rows offset..offset+len.
    v: Vec<f64>,
}

impl Reflector {
    fn apply(&self, w: &mut Vec<f64>) {
        let end = self.offset + self.v.len();
        if w.len() < end {
            w.resize(end, 0.0);
        }
        let seg = &mut w[self.offset..end];
        let s: f64 = 2.0 * self.v.iter().zip(seg.iter()).map(|(a, b)| a * b).sum::<f64>();
        if s != 0.0 {
            for (x, a) in seg.iter_mut().zip(&self.v) {
                *x -= s * a;
            }
        }
    }
}

pub struct AdaptiveQr {
    tol: f64,
    u: Vec<f64>,
    reflectors: Vec<Reflector>,
    /// r[k] = first k+1 entries of column k of R.
    r: Vec<Vec<f64>>,
    /// Interpolation order used for each column.
    pub column_orders: Vec<usize>,
    pub column_cap: usize,
    /// Largest interpolation order tried before giving up on a column.
    pub interpolation_cap: usize,
}

impl AdaptiveQr {
    pub fn new(u: &SpectralFunction, tol: f64) -> AdaptiveQr {
        AdaptiveQr {
            tol,
            u: u.coeffs.clone(),
            reflectors: Vec::new(),
            r: Vec::new(),
            column_orders: Vec::new(),
            column_cap: 16384,
            interpolation_cap: 1 << 17,
        }
    }

    pub fn columns(&self) -> usize {
        self.r.len()
    }

    /// Coefficients of L b_k, interpolated until resolved at an order of at
    /// least 2(k+1) and confirmed by one more doubling.
    fn adaptive_column(&self, op: &TransferOperator, k: usize) -> Result<(Vec<f64>, usize)> {
        let min = (2 * (k + 1)).next_power_of_two().max(4);
        let mut m = 4;
        let mut candidate: Option<Vec<f64>> = None;
        while m <= self.interpolation_cap {
            let c = op.assemble_column(k, m)?;
            let f = SpectralFunction::new(op.basis, c);
            if m >= min && f.is_resolved(self.tol) {
                if let Some(prev) = &candidate {
                    let scale = f.coeffs.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
                    let agree = prev.iter().zip(&f.coeffs).all(|(a, b)| (a - b).abs() <= 10.0 * self.tol * scale);
                    if agree {
                        let mut c = f.coeffs;
                        let cut = 1e-3 * self.tol * scale;
                        while c.len() > k + 1 && c.last().is_some_and(|v| v.abs() <= cut) {
                            c.pop();
                        }
                        return Ok((c, m));
                    }
                }
                candidate = Some(f.coeffs);
            } else {
                candidate = None;
            }
            m *= 2;
        }
        Err(Error::NoConvergence(format!("column {k} of the transfer operator did not resolve by order {}", self.interpolation_cap)))
    }

    /// Computes, reduces and stores the next column.
    fn push_column(&mut self, op: &TransferOperator) -> Result<()> {
        let k = self.r.len();
        if k >= self.column_cap {
            return Err(Error::NoConvergence(format!("adaptive solve reached the column cap {}", self.column_cap)));
        }
        let (p, order) = self.adaptive_column(op, k)?;
        let s_k = op.basis.element_integral(k);
        let n = p.len().max(k + 1).max(self.u.len());
        let mut col = vec![0.0; n];
        for (c, v) in col.iter_mut().zip(&p) {
            *c = -v;
        }
        col[k] += 1.0;
        for (c, v) in col.iter_mut().zip(&self.u) {
            *c += s_k * v;
        }
        for h in &self.reflectors {
            h.apply(&mut col);
        }
        let x = &col[k..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical(format!("column {k} is dependent on earlier columns (rank deficient)")));
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for a in v.iter_mut() {
            *a /= vn;
        }
        while v.len() > 1 && v.last() == Some(&0.0) {
            v.pop();
        }
        let mut rk = col[..k].to_vec();
        rk.push(alpha);
        self.reflectors.push(Reflector { offset: k, v });
        self.r.push(rk);
        self.column_orders.push(order);
        Ok(())
    }

    /// Solves K x = b, adding columns until the part of Qᵀb below the
    /// current triangle is under the stopping threshold.
    pub fn solve(&mut self, op: &TransferOperator, b: &[f64]) -> Result<Vec<f64>> {
        let len = op.basis.domain_length();
        let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if bmax == 0.0 {
            return Ok(vec![0.0]);
        }
        let threshold = self.tol * len.max(1.0) * len * bmax;
        let mut w = b.to_vec();
        for h in &self.reflectors {
            h.apply(&mut w);
        }
        loop {
            let k = self.r.len();
            let tail = w.iter().skip(k).fold(0.0_f64, |m, v| m.max(v.abs()));
            if k > 0 && tail <= threshold {
                break;
            }
            self.push_column(op)?;
            self.reflectors.last().unwrap().apply(&mut w);
        }
        let n = self.r.len();
        w.resize(n.max(w.len()), 0.0);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.r[j][i] * x[j];
            }
            x[i] = s / self.r[i][i];
        }
        Ok(x)
    }

    /// Dense copy of the first `n` columns of R (row-major), for checks.
    pub fn r_dense(&self) -> Vec<Vec<f64>> {
        let n = self.r.len();
        let mut m = vec![vec![0.0; n]; n];
        for (j, col) in self.r.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[i][j] = v;
            }
        }
        m
    }

    /// Applies Q = H_0 H_1 ... to a vector.
    pub fn apply_q(&self, w: &mut Vec<f64>) {
        for h in self.reflectors.iter().rev() {
            h.apply(w);
        }
    }
}
