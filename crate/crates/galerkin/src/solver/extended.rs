//! Fixed-order solve for the acim in quad-double arithmetic.
//!
//! Everything is O(N²) or O(N³) with no FFTs: node values of L b_k by the
//! three-term recurrences, interpolation by explicit cosine sums, and LU
//! with partial pivoting. Meant for convergence studies past binary64
//! precision at orders of a few hundred.

use rayon::prelude::*;

use crate::basis::BasisKind;
use crate::error::{Error, Result};
use crate::map::MarkovMap;
use crate::quad::{Qd, QD_PI};
use crate::transfer::basis_for;

fn element_integral(basis: BasisKind, k: usize) -> Qd {
    match basis {
        BasisKind::FourierReal if k == 0 => QD_PI.ldexp(1),
        BasisKind::FourierReal => Qd::ZERO,
        BasisKind::Chebyshev if k % 2 == 1 => Qd::ZERO,
        BasisKind::Chebyshev => Qd::from_f64(2.0) / Qd::from_f64(1.0 - (k * k) as f64),
    }
}

/// Values of b_0..b_{n-1} at v.
fn elements(basis: BasisKind, n: usize, v: Qd) -> Vec<Qd> {
    let mut out = Vec::with_capacity(n);
    match basis {
        BasisKind::Chebyshev => {
            let (mut t0, mut t1) = (Qd::ONE, v);
            for _ in 0..n {
                out.push(t0);
                let t2 = (v * t1).ldexp(1) - t0;
                t0 = t1;
                t1 = t2;
            }
        }
        BasisKind::FourierReal => {
            let (s1, c1) = v.sin_cos();
            let (mut cm, mut sm) = (Qd::ONE, Qd::ZERO);
            let (mut cp, mut sp) = (c1, -s1);
            out.push(Qd::ONE);
            while out.len() < n {
                let cn = (c1 * cm).ldexp(1) - cp;
                let sn = (c1 * sm).ldexp(1) - sp;
                (cp, sp, cm, sm) = (cm, sm, cn, sn);
                out.push(cm);
                if out.len() < n {
                    out.push(sm);
                }
            }
        }
    }
    out
}

/// Row j of the interpolation map from n node values to coefficients.
fn analysis_matrix(basis: BasisKind, n: usize) -> Vec<Vec<Qd>> {
    match basis {
        BasisKind::Chebyshev => {
            // cos(jθ_l) with θ_l = (2l+1)π/2n is cos(qπ/2n), q = j(2l+1) mod 4n
            let table: Vec<Qd> =
                (0..4 * n).into_par_iter().map(|q| (QD_PI * Qd::from_f64(q as f64) / Qd::from_f64((2 * n) as f64)).cos()).collect();
            (0..n)
                .map(|j| {
                    let w = Qd::from_f64(if j == 0 { 1.0 } else { 2.0 }) / Qd::from_f64(n as f64);
                    (0..n).map(|l| w * table[(j * (2 * l + 1)) % (4 * n)]).collect()
                })
                .collect()
        }
        BasisKind::FourierReal => {
            let table: Vec<(Qd, Qd)> =
                (0..n).into_par_iter().map(|q| (QD_PI.ldexp(1) * Qd::from_f64(q as f64) / Qd::from_f64(n as f64)).sin_cos()).collect();
            (0..n)
                .map(|idx| {
                    let m = basis.mode(idx);
                    let w = if idx == 0 || 2 * m == n { 1.0 } else { 2.0 };
                    let w = Qd::from_f64(w) / Qd::from_f64(n as f64);
                    (0..n)
                        .map(|l| {
                            let (s, c) = table[(m * l) % n];
                            if idx == 0 {
                                w
                            } else if idx % 2 == 1 {
                                w * c
                            } else {
                                w * s
                            }
                        })
                        .collect()
                })
                .collect()
        }
    }
}

fn nodes(basis: BasisKind, n: usize) -> Vec<Qd> {
    match basis {
        BasisKind::Chebyshev => (0..n).map(|l| (QD_PI * Qd::from_f64((2 * l + 1) as f64) / Qd::from_f64((2 * n) as f64)).cos()).collect(),
        BasisKind::FourierReal => (0..n).map(|l| QD_PI.ldexp(1) * Qd::from_f64(l as f64) / Qd::from_f64(n as f64)).collect(),
    }
}

/// The n×n Galerkin matrix of L in quad-double, column-major.
pub fn assemble_qd(map: &MarkovMap, n: usize) -> Result<Vec<Vec<Qd>>> {
    let basis = basis_for(map);
    let ys = nodes(basis, n);
    // per node, Σ_ι |v'| b_k(v_ι) for all k
    let values: Vec<Vec<Qd>> = ys
        .par_iter()
        .map(|&y| {
            let mut acc = vec![Qd::ZERO; n];
            for (v, w) in map.preimages_t(y, y.to_f64())? {
                for (a, b) in acc.iter_mut().zip(elements(basis, n, v)) {
                    *a = *a + w * b;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let a = analysis_matrix(basis, n);
    Ok((0..n)
        .into_par_iter()
        .map(|k| (0..n).map(|j| a[j].iter().zip(&values).fold(Qd::ZERO, |s, (&ajl, vl)| s + ajl * vl[k])).collect())
        .collect())
}

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
fn lu_solve(mut a: Vec<Vec<Qd>>, mut b: Vec<Qd>) -> Result<Vec<Qd>> {
    let n = b.len();
    for p in 0..n {
        let piv = (p..n).max_by(|&i, &j| a[i][p].abs().partial_cmp(&a[j][p].abs()).unwrap()).unwrap();
        if a[piv][p].hi() == 0.0 {
            return Err(Error::Numerical(format!("K is singular at order {n}")));
        }
        a.swap(p, piv);
        b.swap(p, piv);
        let (top, rest) = a.split_at_mut(p + 1);
        let prow = &top[p];
        let inv = prow[p].recip();
        let bp = b[p];
        let updates: Vec<Qd> = rest
            .par_iter_mut()
            .map(|row| {
                let f = row[p] * inv;
                if f.hi() != 0.0 {
                    for c in p..n {
                        row[c] = row[c] - f * prow[c];
                    }
                }
                f
            })
            .collect();
        for (i, f) in updates.into_iter().enumerate() {
            b[p + 1 + i] = b[p + 1 + i] - f * bp;
        }
    }
    let mut x = vec![Qd::ZERO; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s = s - a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Ok(x)
}

/// Unit-integral acim coefficients at order n in quad-double.
pub fn acim_qd(map: &MarkovMap, n: usize) -> Result<Vec<Qd>> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("order {n} is below the minimum of 4")));
    }
    let basis = basis_for(map);
    let cols = assemble_qd(map, n)?;
    let u = Qd::ONE / element_integral(basis, 0);
    let s: Vec<Qd> = (0..n).map(|k| element_integral(basis, k)).collect();
    let mut k = vec![vec![Qd::ZERO; n]; n];
    for (c, col) in cols.iter().enumerate() {
        for (r, &l) in col.iter().enumerate() {
            k[r][c] = -l;
        }
        k[c][c] = k[c][c] + Qd::ONE;
        k[0][c] = k[0][c] + u * s[c];
    }
    let mut rhs = vec![Qd::ZERO; n];
    rhs[0] = u;
    let mut x = lu_solve(k, rhs)?;
    let total = x.iter().zip(&s).fold(Qd::ZERO, |a, (&xi, &si)| a + xi * si);
    for v in x.iter_mut() {
        *v = *v / total;
    }
    Ok(x)
}
