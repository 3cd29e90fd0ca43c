//! Invariants over randomized inputs.

use galerkin::basis::{analyze, evaluate, integrate, multiply, nodes, synthesize, BasisKind, SpectralFunction};
use galerkin::bounds::{truncation_bound, EntryBoundModel};
use galerkin::expr::Expr;
use galerkin::interval::Interval;
use galerkin::map::{catalog, parse_map_definition};
use galerkin::scalar::Scalar;
use galerkin::solver::{a_priori_solution_norm, Mode, Solver};
use galerkin::transfer::TransferOperator;
use proptest::prelude::*;

fn basis() -> impl Strategy<Value = BasisKind> {
    prop_oneof![Just(BasisKind::Chebyshev), Just(BasisKind::FourierReal)]
}

fn coeffs(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 1..max)
}

fn l1(c: &[f64]) -> f64 {
    c.iter().map(|v| v.abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_inverts_synthesis(b in basis(), c in coeffs(40)) {
        let n = 2 * c.len() + 1;
        let back = analyze(b, &synthesize(b, &c, n));
        for (i, v) in back.iter().enumerate() {
            let want = c.get(i).copied().unwrap_or(0.0);
            prop_assert!((v - want).abs() < 1e-13 * (1.0 + l1(&c)), "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn pointwise_evaluation_matches_synthesis(b in basis(), c in coeffs(30)) {
        let n = c.len() + 3;
        for (x, v) in nodes(b, n).into_iter().zip(synthesize(b, &c, n)) {
            prop_assert!((evaluate(b, &c, x) - v).abs() < 1e-13 * (1.0 + l1(&c)));
        }
    }

    #[test]
    fn products_commute_and_integrate_like_samples(b in basis(), f in coeffs(12), g in coeffs(12)) {
        let fg = multiply(b, &f, &g);
        let gf = multiply(b, &g, &f);
        prop_assert_eq!(fg.len(), gf.len());
        for (x, y) in fg.iter().zip(&gf) {
            prop_assert!((x - y).abs() < 1e-14 * (1.0 + l1(&f) * l1(&g)));
        }
        let x = 0.3;
        let at = evaluate(b, &fg, x);
        prop_assert!((at - evaluate(b, &f, x) * evaluate(b, &g, x)).abs() < 1e-13 * (1.0 + l1(&f) * l1(&g)));
        prop_assert!(integrate(b, &fg).is_finite());
    }

    #[test]
    fn rounded_results_lie_in_interval_results(a in -1e6..1e6f64, wa in 0.0..1e-3f64, b in -1e6..1e6f64, wb in 0.0..1e-3f64, s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let (x, y) = (Interval::new(a, a + wa), Interval::new(b, b + wb));
        let (p, q) = (a + s * wa, b + t * wb);
        let (p, q) = (p.min(x.hi), q.min(y.hi));
        prop_assert!((x + y).contains(p + q));
        prop_assert!((x - y).contains(p - q));
        prop_assert!((x * y).contains(p * q));
        if !y.contains_zero() {
            prop_assert!((x / y).contains(p / q));
        }
        if x.lo >= 0.0 {
            prop_assert!(x.sqrt().contains(p.sqrt()));
        }
    }

    #[test]
    fn a_priori_bound_is_monotone(l1_ in 1.05..6.0f64, dl in 0.0..3.0f64, c in 0.0..3.0f64, dc in 0.0..3.0f64) {
        let b = a_priori_solution_norm(l1_, c).unwrap();
        prop_assert!(a_priori_solution_norm(l1_ + dl, c).unwrap() <= b);
        prop_assert!(a_priori_solution_norm(l1_, c + dc).unwrap() >= b);
    }

    #[test]
    fn lanford_truncation_bound_decreases(n in 16usize..1024, dn in 1usize..512) {
        let m = EntryBoundModel::lanford();
        prop_assert!(truncation_bound(&m, n + dn) <= truncation_bound(&m, n));
    }

    #[test]
    fn polynomial_expressions_match_horner(c in prop::collection::vec(-5i32..5, 1..6), x in -2.0..2.0f64) {
        let text = c.iter().enumerate().map(|(k, a)| format!("({a})*x^{k}")).collect::<Vec<_>>().join(" + ");
        let e = Expr::parse(&text).unwrap();
        let want = c.iter().rev().fold(0.0, |acc, &a| acc * x + a as f64);
        prop_assert!((e.eval(x) - want).abs() < 1e-12 * (1.0 + want.abs()));
        prop_assert_eq!(e.polynomial_degree(), Some(c.len() as u32 - 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transfer_operator_preserves_integrals(name in prop_oneof![Just("lanford"), Just("doubling"), Just("tupling(3)")], c in coeffs(10)) {
        let m = catalog(name).unwrap();
        let op = TransferOperator::new(&m);
        let f = SpectralFunction::new(op.basis, c);
        let lf = op.apply(&f, 64).unwrap();
        prop_assert!((lf.integral() - f.integral()).abs() < 1e-12 * (1.0 + l1(&f.coeffs)), "{} vs {}", lf.integral(), f.integral());
    }

    #[test]
    fn perturbed_circle_maps_have_invariant_densities(a in -0.08..0.08f64) {
        let m = parse_map_definition(&format!("domain periodic 0 1\nlift 2*x + ({a})*sin(2*pi*x)\nconst lambda {}\nconst C1 1", 2.0 - 2.0 * std::f64::consts::PI * a.abs())).unwrap();
        let rho = Solver::new(&m, Mode::Adaptive { tol: 1e-13 }).unwrap().acim().unwrap().solution;
        prop_assert!((rho.integral() - 1.0).abs() < 1e-12);
        let op = TransferOperator::new(&m);
        let lrho = op.apply(&rho, 2 * rho.len() + 1).unwrap();
        let d = lrho.axpby(1.0, &rho.resized(lrho.len()), -1.0);
        prop_assert!(l1(&d.coeffs) < 1e-11, "{}", l1(&d.coeffs));
        prop_assert!(nodes(rho.basis, 64).into_iter().all(|x| rho.eval(x) > 0.0));
    }

    #[test]
    fn resolvent_inverts_id_minus_l(c in coeffs(8)) {
        let m = catalog("lanford").unwrap();
        let mut s = Solver::new(&m, Mode::Fixed { order: 48 }).unwrap();
        // remove the mean so the Neumann series converges
        let mut phi = SpectralFunction::new(BasisKind::Chebyshev, c);
        phi.coeffs[0] -= phi.integral() / 2.0;
        let chi = s.resolvent(&phi).unwrap().solution;
        let lchi = s.op.apply(&chi, 96).unwrap();
        let r = chi.resized(96).axpby(1.0, &lchi, -1.0).axpby(1.0, &phi.resized(96), -1.0);
        prop_assert!(l1(&r.coeffs) < 1e-12 * (1.0 + l1(&phi.coeffs)), "{}", l1(&r.coeffs));
    }
}
