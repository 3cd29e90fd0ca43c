//! Fourier and Chebyshev bases on the canonical domains.
//!
//! Coefficient layout (0-based here, the CSV dumps are 1-based):
//!
//! * Fourier: `c[0]` constant, `c[2m-1]` cos(mθ), `c[2m]` sin(mθ). Under the
//!   complex correspondence this is the block order e₀, e₁, e₋₁, e₂, ...
//! * Chebyshev: `c[k]` multiplies T_k.
//!
//! Transforms. Fourier nodes are θ_l = 2πl/N and the analysis is a plain
//! FFT: with C_m = (1/N) Σ_l f_l e^{-imθ_l}, the coefficients are
//! a_0 = Re C_0, a_m = 2 Re C_m, b_m = -2 Im C_m, and for even N the last
//! coefficient cos(Nθ/2) gets Re C_{N/2} without the factor 2.
//!
//! Chebyshev nodes are x_n = cos θ_n, θ_n = (2n+1)π/(2N). Analysis is a
//! DCT-II computed from a length-2N FFT of the mirrored data
//! y = (f_0..f_{N-1}, f_{N-1}..f_0): e^{-iπk/(2N)} Y_k = 2 Σ_n f_n cos kθ_n,
//! and c_k = (t_k/N) Σ_n f_n cos kθ_n with t_0 = 1, t_k = 2. This makes the
//! values of T_k analyze to the k-th unit vector exactly.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    FourierReal,
    Chebyshev,
}

impl BasisKind {
    /// |Λ| of the canonical domain.
    pub fn domain_length(self) -> f64 {
        match self {
            BasisKind::FourierReal => TWO_PI,
            BasisKind::Chebyshev => 2.0,
        }
    }

    /// Frequency (Fourier) or degree (Chebyshev) of coefficient `idx`.
    pub fn mode(self, idx: usize) -> usize {
        match self {
            BasisKind::FourierReal => idx.div_ceil(2),
            BasisKind::Chebyshev => idx,
        }
    }

    /// Value of basis element `idx` at x.
    pub fn element(self, idx: usize, x: f64) -> f64 {
        match self {
            BasisKind::FourierReal => {
                let m = self.mode(idx) as f64;
                if idx == 0 {
                    1.0
                } else if idx % 2 == 1 {
                    (m * x).cos()
                } else {
                    (m * x).sin()
                }
            }
            BasisKind::Chebyshev => (idx as f64 * x.clamp(-1.0, 1.0).acos()).cos(),
        }
    }

    /// ∫_Λ b_idx.
    pub fn element_integral(self, idx: usize) -> f64 {
        match self {
            BasisKind::FourierReal => {
                if idx == 0 {
                    TWO_PI
                } else {
                    0.0
                }
            }
            BasisKind::Chebyshev => {
                if idx % 2 == 1 {
                    0.0
                } else {
                    let k = idx as f64;
                    2.0 / (1.0 - k * k)
                }
            }
        }
    }
}

/// Interpolation nodes for `n` coefficients.
pub fn nodes(basis: BasisKind, n: usize) -> Vec<f64> {
    match basis {
        BasisKind::FourierReal => (0..n).map(|l| TWO_PI * l as f64 / n as f64).collect(),
        BasisKind::Chebyshev => (0..n).map(|l| chebyshev_angle(l, n).cos()).collect(),
    }
}

/// θ_l with x_l = cos θ_l.
pub fn chebyshev_angle(l: usize, n: usize) -> f64 {
    (2 * l + 1) as f64 * PI / (2 * n) as f64
}

#[derive(Clone, Debug)]
pub struct NodeGrid {
    pub basis: BasisKind,
    pub nodes: Vec<f64>,
}

impl NodeGrid {
    pub fn new(basis: BasisKind, n: usize) -> NodeGrid {
        NodeGrid { basis, nodes: nodes(basis, n) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Coefficients of the interpolant through `values` at the basis nodes.
pub fn analyze(basis: BasisKind, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    match basis {
        BasisKind::FourierReal => {
            let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            plan(n, false).process(&mut buf);
            let inv_n = 1.0 / n as f64;
            let mut c = vec![0.0; n];
            c[0] = buf[0].re * inv_n;
            for idx in 1..n {
                let m = basis.mode(idx);
                let cm = buf[m] * inv_n;
                c[idx] = if idx % 2 == 1 {
                    if 2 * m == n {
                        cm.re
                    } else {
                        2.0 * cm.re
                    }
                } else {
                    -2.0 * cm.im
                };
            }
            c
        }
        BasisKind::Chebyshev => {
            let mut buf = Vec::with_capacity(2 * n);
            buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
            buf.extend(values.iter().rev().map(|&v| Complex64::new(v, 0.0)));
            plan(2 * n, false).process(&mut buf);
            (0..n)
                .map(|k| {
                    let tw = Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64);
                    let x = 0.5 * (tw * buf[k]).re;
                    let t = if k == 0 { 1.0 } else { 2.0 };
                    t * x / n as f64
                })
                .collect()
        }
    }
}

/// Values at the `n` basis nodes of the function with coefficients `c`.
/// Requires `c.len() <= n`.
pub fn synthesize(basis: BasisKind, c: &[f64], n: usize) -> Vec<f64> {
    assert!(c.len() <= n, "synthesize: {} coefficients on {n} nodes", c.len());
    if n == 0 {
        return Vec::new();
    }
    match basis {
        BasisKind::FourierReal => {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            if !c.is_empty() {
                buf[0] = Complex64::new(c[0], 0.0);
            }
            for (idx, &v) in c.iter().enumerate().skip(1) {
                let m = basis.mode(idx);
                if 2 * m == n {
                    // Nyquist cosine; its sine partner vanishes on the grid
                    if idx % 2 == 1 {
                        buf[m] += Complex64::new(v, 0.0);
                    }
                    continue;
                }
                let half = if idx % 2 == 1 { Complex64::new(0.5 * v, 0.0) } else { Complex64::new(0.0, -0.5 * v) };
                buf[m] += half;
                buf[n - m] += half.conj();
            }
            plan(n, true).process(&mut buf);
            buf.iter().map(|z| z.re).collect()
        }
        BasisKind::Chebyshev => {
            let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
            for (k, &v) in c.iter().enumerate() {
                buf[k] = Complex64::from_polar(v, PI * k as f64 / (2 * n) as f64);
            }
            plan(2 * n, true).process(&mut buf);
            buf[..n].iter().map(|z| z.re).collect()
        }
    }
}

/// Σ c_k b_k(x); Clenshaw for Chebyshev.
pub fn evaluate(basis: BasisKind, c: &[f64], x: f64) -> f64 {
    match basis {
        BasisKind::FourierReal => {
            let mut s = c.first().copied().unwrap_or(0.0);
            for (idx, &v) in c.iter().enumerate().skip(1) {
                let m = basis.mode(idx) as f64;
                s += if idx % 2 == 1 { v * (m * x).cos() } else { v * (m * x).sin() };
            }
            s
        }
        BasisKind::Chebyshev => {
            let (mut b1, mut b2) = (0.0, 0.0);
            for &v in c.iter().skip(1).rev() {
                let b0 = v + 2.0 * x * b1 - b2;
                b2 = b1;
                b1 = b0;
            }
            c.first().copied().unwrap_or(0.0) + x * b1 - b2
        }
    }
}

/// ∫_Λ f.
pub fn integrate(basis: BasisKind, c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(k, &v)| v * basis.element_integral(k)).sum()
}

fn trim_len(basis: BasisKind, modes: usize) -> usize {
    match basis {
        BasisKind::FourierReal => 2 * modes + 1,
        BasisKind::Chebyshev => modes + 1,
    }
}

/// Coefficients of the pointwise product, exact up to rounding.
pub fn multiply(basis: BasisKind, f: &[f64], g: &[f64]) -> Vec<f64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let top = |c: &[f64]| basis.mode(c.len() - 1);
    let modes = top(f) + top(g);
    let n = trim_len(basis, modes);
    let fv = synthesize(basis, f, n);
    let gv = synthesize(basis, g, n);
    let pv: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
    analyze(basis, &pv)
}

/// Upper bound on the total variation over Λ.
///
/// Each Fourier mode a cos mθ + b sin mθ has variation 4m√(a²+b²); T_k has
/// variation 2k.
pub fn bv_seminorm_upper(basis: BasisKind, c: &[f64]) -> f64 {
    match basis {
        BasisKind::FourierReal => fourier_pairs(c).map(|(m, r)| 4.0 * m as f64 * r).sum(),
        BasisKind::Chebyshev => c.iter().enumerate().map(|(k, v)| 2.0 * k as f64 * v.abs()).sum(),
    }
}

/// Upper bound on sup |f|.
pub fn sup_upper(basis: BasisKind, c: &[f64]) -> f64 {
    match basis {
        BasisKind::FourierReal => fourier_pairs(c).map(|(_, r)| r).sum(),
        BasisKind::Chebyshev => c.iter().map(|v| v.abs()).sum(),
    }
}

/// ‖f‖_BV = Var + sup, bounded above.
pub fn bv_norm_upper(basis: BasisKind, c: &[f64]) -> f64 {
    bv_seminorm_upper(basis, c) + sup_upper(basis, c)
}

/// (mode, amplitude) per Fourier mode, the constant as mode 0.
fn fourier_pairs(c: &[f64]) -> impl Iterator<Item = (usize, f64)> + '_ {
    let top = BasisKind::FourierReal.mode(c.len().saturating_sub(1));
    (0..=top).filter(move |_| !c.is_empty()).map(move |m| {
        if m == 0 {
            return (0, c[0].abs());
        }
        let a = c.get(2 * m - 1).copied().unwrap_or(0.0);
        let b = c.get(2 * m).copied().unwrap_or(0.0);
        (m, a.hypot(b))
    })
}

/// Upper bound on the BV operator norm of a coefficient block.
///
/// `rows`/`cols` label the block's rows and columns by signed complex mode
/// (Fourier) or degree (Chebyshev); `mag[r][c]` bounds the entry magnitude.
/// The ℓ² operator norms are bounded by Frobenius norms:
/// Fourier 2π(‖DF‖ + ‖F‖) with D = diag(j); Chebyshev the same after the
/// row scaling t_j^{-1/2} and column scaling t_k^{1/2}.
pub fn bv_norm_upper_matrix(basis: BasisKind, rows: &[i64], cols: &[i64], mag: &[Vec<f64>]) -> f64 {
    let t = |j: i64| if j == 0 { 1.0_f64 } else { 2.0 };
    let (mut d2, mut f2) = (0.0_f64, 0.0_f64);
    for (r, &j) in rows.iter().enumerate() {
        for (c, &k) in cols.iter().enumerate() {
            let mut e = mag[r][c].abs();
            if basis == BasisKind::Chebyshev {
                e *= (t(k) / t(j)).sqrt();
            }
            let w = j as f64 * e;
            d2 += w * w;
            f2 += e * e;
        }
    }
    TWO_PI * (d2.sqrt() + f2.sqrt())
}

/// A function on the canonical domain, stored by coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralFunction {
    pub basis: BasisKind,
    pub coeffs: Vec<f64>,
}

impl SpectralFunction {
    pub fn new(basis: BasisKind, coeffs: Vec<f64>) -> Self {
        SpectralFunction { basis, coeffs }
    }

    pub fn zero(basis: BasisKind, n: usize) -> Self {
        SpectralFunction { basis, coeffs: vec![0.0; n] }
    }

    pub fn constant(basis: BasisKind, v: f64) -> Self {
        SpectralFunction { basis, coeffs: vec![v] }
    }

    /// Interpolates `f` on `n` nodes.
    pub fn interpolate(basis: BasisKind, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let v: Vec<f64> = nodes(basis, n).into_iter().map(f).collect();
        SpectralFunction { basis, coeffs: analyze(basis, &v) }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        evaluate(self.basis, &self.coeffs, x)
    }

    pub fn integral(&self) -> f64 {
        integrate(self.basis, &self.coeffs)
    }

    pub fn times(&self, other: &SpectralFunction) -> SpectralFunction {
        assert_eq!(self.basis, other.basis);
        SpectralFunction { basis: self.basis, coeffs: multiply(self.basis, &self.coeffs, &other.coeffs) }
    }

    pub fn bv_norm_upper(&self) -> f64 {
        bv_norm_upper(self.basis, &self.coeffs)
    }

    /// Max magnitude over the last max(8, N/8) coefficients.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.coeffs.len();
        let w = (n / 8).max(8).min(n);
        self.coeffs[n - w..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_resolved(&self, tol: f64) -> bool {
        let max = self.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        self.tail_magnitude() < tol * max.max(1.0)
    }

    /// Linear combination a·self + b·other, padding the shorter one.
    pub fn axpby(&self, a: f64, other: &SpectralFunction, b: f64) -> SpectralFunction {
        let n = self.len().max(other.len());
        let get = |c: &[f64], i: usize| c.get(i).copied().unwrap_or(0.0);
        SpectralFunction { basis: self.basis, coeffs: (0..n).map(|i| a * get(&self.coeffs, i) + b * get(&other.coeffs, i)).collect() }
    }

    /// `index,coefficient` lines with 1-based indices and 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coefficient\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{},{:.16e}\n", i + 1, c));
        }
        out
    }

    pub fn resized(&self, n: usize) -> SpectralFunction {
        let mut c = self.coeffs.clone();
        c.resize(n, 0.0);
        SpectralFunction { basis: self.basis, coeffs: c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn csv_dump_is_one_based_and_round_trips() {
        let f = SpectralFunction::new(BasisKind::Chebyshev, vec![0.1, -1.0 / 3.0]);
        let csv = f.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,coefficient");
        assert!(lines[1].starts_with("1,"));
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, -1.0 / 3.0);
    }

    #[test]
    fn chebyshev_t2_analyzes_to_unit_vector() {
        let v: Vec<f64> = nodes(BasisKind::Chebyshev, 8).iter().map(|x| 2.0 * x * x - 1.0).collect();
        let mut e = vec![0.0; 8];
        e[2] = 1.0;
        assert!(close(&analyze(BasisKind::Chebyshev, &v), &e, 1e-15));
    }

    #[test]
    fn chebyshev_cube() {
        let v: Vec<f64> = nodes(BasisKind::Chebyshev, 8).iter().map(|x| x * x * x).collect();
        let expect = [0.0, 0.75, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0];
        assert!(close(&analyze(BasisKind::Chebyshev, &v), &expect, 1e-15));
    }

    #[test]
    fn fourier_sin3_lands_on_index_six() {
        let v: Vec<f64> = nodes(BasisKind::FourierReal, 16).iter().map(|t| (3.0 * t).sin()).collect();
        let c = analyze(BasisKind::FourierReal, &v);
        for (i, x) in c.iter().enumerate() {
            let want = if i == 6 { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-15, "{i}: {x}");
        }
    }

    #[test]
    fn nyquist_round_trip() {
        let c = vec![0.5, 1.0, -2.0, 0.25];
        let v = synthesize(BasisKind::FourierReal, &c, 4);
        assert!(close(&analyze(BasisKind::FourierReal, &v), &c, 1e-15));
    }

    #[test]
    fn evaluation() {
        assert!((evaluate(BasisKind::Chebyshev, &[0.0, 0.0, 0.0, 1.0], 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(evaluate(BasisKind::Chebyshev, &[1.0], 0.3), 1.0);
        assert!(evaluate(BasisKind::FourierReal, &[0.0, 0.0, 0.0, 1.0], PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn integrals() {
        assert_eq!(integrate(BasisKind::FourierReal, &[1.0]), TWO_PI);
        assert!((integrate(BasisKind::Chebyshev, &[0.0, 0.0, 1.0]) + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(integrate(BasisKind::Chebyshev, &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn products() {
        let p = multiply(BasisKind::Chebyshev, &[0.0, 1.0], &[0.0, 1.0]);
        assert!(close(&p, &[0.5, 0.0, 0.5], 1e-15));
        let f = [0.3, -1.0, 2.0];
        assert!(close(&multiply(BasisKind::Chebyshev, &f, &[1.0]), &f, 1e-15));
        let p = multiply(BasisKind::FourierReal, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]);
        let mut expect = vec![0.0; 5];
        expect[4] = 0.5;
        assert!(close(&p, &expect, 1e-15));
    }

    #[test]
    fn variation_bounds() {
        assert_eq!(bv_seminorm_upper(BasisKind::Chebyshev, &[3.0]), 0.0);
        assert_eq!(bv_seminorm_upper(BasisKind::Chebyshev, &[0.0, 0.0, 0.0, 1.0]), 6.0);
        assert_eq!(bv_seminorm_upper(BasisKind::FourierReal, &[0.0, 0.0, 0.0, 1.0]), 8.0);
    }

    #[test]
    fn matrix_bv_bound_examples() {
        assert_eq!(bv_norm_upper_matrix(BasisKind::FourierReal, &[0], &[0], &[vec![0.0]]), 0.0);
        assert!((bv_norm_upper_matrix(BasisKind::FourierReal, &[0], &[0], &[vec![1.0]]) - TWO_PI).abs() < 1e-15);
        let v = bv_norm_upper_matrix(BasisKind::FourierReal, &[3], &[1], &[vec![1.0]]);
        assert!((v - 8.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn tail_and_resolution() {
        let mut c = vec![1.0; 4];
        c.extend(vec![1e-17; 12]);
        let f = SpectralFunction::new(BasisKind::Chebyshev, c);
        assert!(f.is_resolved(1e-14));
        assert!(!SpectralFunction::new(BasisKind::Chebyshev, vec![1.0; 16]).is_resolved(1e-14));
    }
}
