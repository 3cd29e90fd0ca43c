use super::*;
use crate::jet::Jet;
use crate::map::catalog;

fn lanford_formula(j: i64, k: i64) -> f64 {
    let tj = if j == 0 { 1.0 } else { 2.0 };
    tj * (7.0 + 33.0_f64.sqrt() / 2.0).sqrt() * ((4.0 - 6.0_f64.sqrt()).acosh() * k as f64 - 1.75_f64.acosh() * j as f64).exp()
}

#[test]
fn lanford_model_is_the_explicit_formula() {
    let m = EntryBoundModel::lanford();
    for (j, k) in [(1, 0), (10, 3), (40, 20), (64, 64), (200, 5)] {
        assert!(m.in_region(j, k));
        let want = lanford_formula(j, k);
        assert!((m.model_value(j, k) - want).abs() <= 1e-12 * want, "({j},{k})");
    }
    assert!(!m.in_region(10, 20));
}

#[test]
fn exponential_decay_per_row() {
    let m = EntryBoundModel::lanford();
    let zeta = m.zeta().unwrap();
    for j in 1..30 {
        let ratio = m.model_value(j + 1, 0) / m.model_value(j, 0);
        assert!((ratio - (-zeta).exp()).abs() < 1e-13);
    }
}

#[test]
fn uniform_bounds() {
    assert_eq!(uniform_entry_bound(BasisKind::FourierReal, 3.0, 7), 1.0);
    assert_eq!(uniform_entry_bound(BasisKind::Chebyshev, 0.0, 0), 2.0);
    assert!((uniform_entry_bound(BasisKind::Chebyshev, 4.0 / 9.0, 5) - 68.0 / 9.0).abs() < 1e-15);
}

#[test]
fn lanford_entries_are_dominated() {
    let m = catalog("lanford").unwrap();
    let table = entry_table(&m, &EntryBoundModel::lanford(), 32).unwrap();
    let bad: Vec<_> = table.iter().filter(|e| e.violates(1.0 + 1e-8)).collect();
    assert!(bad.is_empty(), "{} violations, first {:?}", bad.len(), bad.first());
}

#[test]
fn doubling_analytic_model_dominates() {
    let m = catalog("doubling").unwrap();
    let inp = AnalyticInputs { upsilon: 0.0, h: 0.0, delta: 1.0, mu: (0.5, 0.5), p: (0.4, 0.6), c1: 0.0 };
    let model = entry_bound_analytic(BasisKind::FourierReal, &inp).unwrap();
    assert_eq!(model.zeta(), Some(1.0));
    assert!(model.bound(10, 1) >= 0.0 && model.bound(10, 1).is_finite());
    let table = entry_table(&m, &model, 24).unwrap();
    assert!(table.iter().all(|e| !e.violates(1.0 + 1e-8)));
}

#[test]
fn analytic_model_needs_a_margin() {
    let inp = AnalyticInputs { upsilon: 1.0, h: 0.0, delta: 1.0, mu: (0.3, 0.6), p: (0.3, 0.7), c1: 0.0 };
    assert!(entry_bound_analytic(BasisKind::FourierReal, &inp).is_err());
}

#[test]
fn truncation_bound_lanford() {
    let m = EntryBoundModel::lanford();
    let b: Vec<f64> = [256, 512, 1024, 2048].iter().map(|&n| truncation_bound(&m, n)).collect();
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
    assert!(b[3] <= 6.75e-131 && b[3] > 0.0, "{:e}", b[3]);
}

#[test]
fn truncation_bound_matches_brute_force_tail() {
    let m = EntryBoundModel::lanford();
    let n = 128_i64;
    // direct sums of the weighted squared bounds over 10⁶ rows
    let (mut le, mut ld) = (Vec::new(), Vec::new());
    for k in 0..n {
        let tk = if k == 0 { 1.0 } else { 2.0 };
        for j in n..n + 1_000_000 {
            let b = m.bound(j, k);
            if b == 0.0 {
                break;
            }
            let l = 2.0 * b.ln() + (tk / 2.0_f64).ln();
            le.push(l);
            ld.push(l + 2.0 * (j as f64).ln());
        }
    }
    let brute = 2.0 * PI * ((0.5 * log_sum_exp(&ld)).exp() + (0.5 * log_sum_exp(&le)).exp());
    let ours = truncation_bound(&m, n as usize);
    assert!(ours >= brute && ours <= 2.0 * brute, "{ours:e} vs {brute:e}");
}

#[test]
fn truncation_bound_decays_exponentially() {
    let m = EntryBoundModel::lanford();
    let zeta = m.zeta().unwrap();
    let rate = zeta * (1.0 - m.p.1);
    for n in [64, 128, 256] {
        let r = truncation_bound(&m, n) / truncation_bound(&m, n + 64);
        assert!(r >= (rate * 64.0 * 0.9).exp(), "N = {n}: ratio {r:e}");
    }
}

#[test]
fn aliasing_close_to_direct_sum() {
    let m = EntryBoundModel::lanford();
    let zeta = m.zeta().unwrap();
    let n = 32_i64;
    let (j, k) = (31_i64, 31_i64);
    let direct: f64 = (1..=1000).map(|q| m.bound(2 * q * n - j, k) + m.bound(2 * q * n + j, k)).sum();
    let a = aliasing_bound(&m, j as usize, k as usize, n as usize);
    assert!(a >= direct && a <= direct * (1.0 + 1e-9), "{a:e} vs {direct:e}");
    let first = m.bound(2 * n - j, k) + m.bound(2 * n + j, k);
    assert!(a <= first / (1.0 - (-2.0 * zeta * n as f64).exp()) * (1.0 + 1e-9));
}

#[test]
fn aliasing_decreases_with_order() {
    let m = EntryBoundModel::lanford();
    let a: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| aliasing_bound(&m, 5, 5, n)).collect();
    assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
}

#[test]
fn aliasing_bounds_the_interpolation_error() {
    // quad-double columns at N and 4N differ by the aliasing at N only
    let map = catalog("lanford").unwrap();
    let model = EntryBoundModel::lanford();
    let n = 16;
    let coarse = assemble_qd(&map, n).unwrap();
    let fine = assemble_qd(&map, 4 * n).unwrap();
    for k in 0..n {
        for j in 0..n {
            let diff = (coarse[k][j] - fine[k][j]).abs().to_f64();
            let a = aliasing_bound(&model, j, k, n) + aliasing_bound(&model, j, k, 4 * n);
            assert!(diff <= a + 1e-55, "({j},{k}): {diff:e} > {a:e}");
        }
    }
}

#[test]
fn fourier_aliasing_is_zero_for_the_doubling_map_columns() {
    let inp = AnalyticInputs { upsilon: 0.0, h: 0.0, delta: 1.0, mu: (0.5, 0.5), p: (0.4, 0.6), c1: 0.0 };
    let model = entry_bound_analytic(BasisKind::FourierReal, &inp).unwrap();
    let a = aliasing_bound(&model, 3, 4, 32);
    assert!((0.0..1e-5).contains(&a), "{a:e}");
}

/// g_{n+1} = [g_n/(j − k v′)]′ on Taylor jets; h_r is g_r up to a unit factor.
fn integrated_by_parts(v: impl Fn(Jet<12>) -> Jet<12>, h: impl Fn(Jet<12>) -> Jet<12>, x0: f64, j: f64, k: f64, r: usize) -> f64 {
    let x = Jet::<12>::variable(x0);
    let vp = {
        let vj = v(x);
        let mut c = [0.0; 12];
        for i in 0..11 {
            c[i] = (i + 1) as f64 * vj.c[i + 1];
        }
        Jet { c }
    };
    let denom = Jet::constant(j) - Jet::constant(k) * vp;
    let mut g = h(x);
    for _ in 0..r {
        let q = g / denom;
        let mut c = [0.0; 12];
        for i in 0..11 {
            c[i] = (i + 1) as f64 * q.c[i + 1];
        }
        g = Jet { c };
    }
    g.c[0]
}

#[test]
fn recurrence_matches_repeated_differentiation() {
    // v = x³/3 + x/5, h = x² + 1 at x0 = 0.7, j = 5, k = 2
    let (x0, j, k) = (0.7_f64, 5.0_f64, 2.0_f64);
    let vd = [x0.powi(3) / 3.0 + x0 / 5.0, x0 * x0 + 0.2, 2.0 * x0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let hd = [x0 * x0 + 1.0, 2.0 * x0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    for r in 1..=4 {
        let direct =
            integrated_by_parts(|x| x * x * x / Jet::constant(3.0) + x / Jet::constant(5.0), |x| x * x + Jet::constant(1.0), x0, j, k, r);
        let w = w_polynomials(r, Diagonal::Exact).unwrap();
        let d = j - k * vd[1];
        let sum: f64 = (0..=r)
            .map(|l| {
                let val = w[r][l].eval(&vd[2..], &hd).mid();
                k.powi(l as i32) * val / d.powi((r + l) as i32)
            })
            .sum();
        assert!((direct - sum).abs() <= 1e-10 * direct.abs().max(1.0), "r = {r}: {direct} vs {sum}");
    }
}

#[test]
fn conservative_weights_dominate_exact_ones() {
    for r in 1..=6 {
        let ex = w_polynomials(r, Diagonal::Exact).unwrap();
        let co = w_polynomials(r, Diagonal::Conservative).unwrap();
        for l in 0..=r {
            for (m, c) in &ex[r][l].terms {
                let d = co[r][l].terms.get(m).cloned().unwrap_or_default();
                assert!(d >= *c, "r={r} l={l} {m:?}");
            }
        }
    }
}

#[test]
fn nonanalytic_map_entries_are_dominated() {
    let m = catalog("nonanalytic-g").unwrap();
    let model = default_model(&m).unwrap();
    assert!(matches!(model.case, EntryCase::Differentiable { r: 2, .. }));
    let table = entry_table(&m, &model, 24).unwrap();
    let bad: Vec<_> = table.iter().filter(|e| e.violates(1.0 + 1e-8)).collect();
    assert!(bad.is_empty(), "{} violations, first {:?}", bad.len(), bad.first());
}

#[test]
fn differentiable_truncation_bound_is_finite_and_decreasing() {
    let m = catalog("nonanalytic-g").unwrap();
    let model = default_model(&m).unwrap();
    let b: Vec<f64> = [65, 129, 257].iter().map(|&n| truncation_bound(&model, n)).collect();
    assert!(b.iter().all(|x| x.is_finite()), "{b:?}");
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
}

#[test]
fn quad_entries_agree_with_double_assembly() {
    let m = catalog("lanford").unwrap();
    let table = entry_table(&m, &EntryBoundModel::lanford(), 8).unwrap();
    let op = crate::transfer::TransferOperator::new(&m);
    for e in &table {
        let d = op.assemble_column(e.col, 32).unwrap()[e.row];
        assert!((d - e.entry).abs() < 1e-13);
    }
}

#[test]
fn strip_model_from_conjugated_constants_dominates_lanford() {
    let m = catalog("lanford").unwrap();
    let zeta = 1.75_f64.acosh();
    let strip = chebyshev_conjugation_constants(&m, Some(zeta), 1, 1024).unwrap();
    let real = chebyshev_conjugation_constants(&m, None, 1, 1024).unwrap();
    let inp = AnalyticInputs { upsilon: strip.upsilon[0], h: strip.h[0], delta: zeta, mu: real.mu, p: (-0.95, 0.95), c1: 4.0 / 9.0 };
    let model = entry_bound_analytic(BasisKind::Chebyshev, &inp).unwrap();
    assert!(model.zeta().unwrap() > 0.0);
    let table = entry_table(&m, &model, 32).unwrap();
    assert!(table.iter().all(|e| !e.violates(1.0 + 1e-8)));
}

#[test]
fn conjugated_constants_are_stable_under_refinement() {
    for name in ["tupling(3)", "lanford"] {
        let m = catalog(name).unwrap();
        let coarse = chebyshev_conjugation_constants(&m, None, 2, 512).unwrap();
        let fine = chebyshev_conjugation_constants(&m, None, 2, 5120).unwrap();
        for (c, f) in coarse.h.iter().chain(&coarse.upsilon).zip(fine.h.iter().chain(&fine.upsilon)) {
            assert!(*c >= f / INFLATION * (1.0 - 1e-6) && *c <= f * INFLATION, "{name}: {c} vs {f}");
        }
    }
    let t = chebyshev_conjugation_constants(&catalog("tupling(3)").unwrap(), None, 1, 512).unwrap();
    assert!(t.h[0] < 1e-12);
}
