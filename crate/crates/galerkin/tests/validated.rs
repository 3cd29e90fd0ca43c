//! Certified solves on catalog maps checked against the adaptive solver.

use galerkin::basis::BasisKind;
use galerkin::bounds::{
    chebyshev_conjugation_constants, default_model, entry_bound_analytic, entry_table, AnalyticInputs, EntryBoundModel,
};
use galerkin::error::Error;
use galerkin::expr::Expr;
use galerkin::map::{catalog, MarkovMap};
use galerkin::solver::{a_priori_solution_norm, Mode, Solver};
use galerkin::validated::*;

#[allow(clippy::excessive_precision)]
const LYAPUNOV: f64 = 0.657661780006597677;
#[allow(clippy::excessive_precision)]
const DIFFUSION: f64 = 0.360109486199160672;

fn adaptive(map: &MarkovMap) -> Vec<f64> {
    Solver::new(map, Mode::Adaptive { tol: 1e-14 }).unwrap().acim().unwrap().solution.coeffs
}

fn lanford(order: usize) -> (MarkovMap, Validated) {
    let m = catalog("lanford").unwrap();
    let v = validate(&m, &ValidationInputs { order, bsol: 9235.0, model: EntryBoundModel::lanford() }).unwrap();
    (m, v)
}

#[test]
fn lanford_certificate_at_192_encloses_the_statistics() {
    let (m, v) = lanford(192);
    let c = &v.certificate;
    assert!(c.gate < 1e-5, "{:e}", c.gate);
    // the truncation part dominates at this order
    assert_eq!(c.dominated_by, Budget::Truncation);
    assert!(v.contains(&adaptive(&m)));

    let l = validated_quantity(&v, &QuantityKind::Lyapunov, &m).unwrap();
    assert!(l.contains(LYAPUNOV), "{l:?}");
    let obs = Expr::parse("x^2").unwrap();
    let d = validated_quantity(&v, &QuantityKind::Diffusion { observable: obs }, &m).unwrap();
    assert!(d.contains(DIFFUSION), "{d:?}");
}

#[test]
fn lanford_certificate_at_320_is_narrow() {
    let (m, v) = lanford(320);
    let c = &v.certificate;
    assert!(c.eps_finite < 1e-9 && c.eps_total < 1e-7, "{c:?}");
    assert_eq!(c.dominated_by, Budget::Interval);
    assert!(v.contains(&adaptive(&m)));
    let l = validated_quantity(&v, &QuantityKind::Lyapunov, &m).unwrap();
    assert!(l.contains(LYAPUNOV) && l.width() < 1e-6, "{l:?}");
    let obs = Expr::parse("x^2").unwrap();
    let d = validated_quantity(&v, &QuantityKind::Diffusion { observable: obs }, &m).unwrap();
    assert!(d.contains(DIFFUSION) && d.width() < 0.1, "{d:?}");
}

#[test]
fn affine_circle_maps_are_certified_to_rounding_level() {
    for (name, k) in [("doubling", 2u32), ("circle k=3 linear", 3)] {
        let m = catalog(name).unwrap();
        let bsol = a_priori_solution_norm(k as f64, 0.0).unwrap();
        let v = validate(&m, &ValidationInputs { order: 16, bsol, model: affine_circle_model(k).unwrap() }).unwrap();
        assert!(v.certificate.eps_total < 1e-12, "{name}: {:?}", v.certificate);
        assert!(v.contains(&adaptive(&m)), "{name}");
        let l = validated_quantity(&v, &QuantityKind::Lyapunov, &m).unwrap();
        assert!(l.contains((k as f64).ln()) && l.width() < 1e-11, "{name}: {l:?}");
    }
}

#[test]
fn tupling_with_sampled_strip_model_contains_adaptive_solution() {
    let m = catalog("tupling(3)").unwrap();
    let zeta = 0.5;
    let strip = chebyshev_conjugation_constants(&m, Some(zeta), 1, 1024).unwrap();
    let real = chebyshev_conjugation_constants(&m, None, 1, 1024).unwrap();
    let inputs =
        AnalyticInputs { upsilon: strip.upsilon[0], h: strip.h[0], delta: zeta, mu: real.mu, p: (-0.7, 0.7), c1: m.constants.c1_canonical };
    let model = entry_bound_analytic(BasisKind::Chebyshev, &inputs).unwrap();
    assert!(entry_table(&m, &model, 32).unwrap().iter().all(|e| !e.violates(1.0 + 1e-8)));
    let bsol = a_priori_solution_norm(m.constants.lambda.value, m.constants.c1_canonical).unwrap();
    let v = validate(&m, &ValidationInputs { order: 192, bsol, model }).unwrap();
    assert!(v.contains(&adaptive(&m)), "{:?}", v.certificate);
    assert!(!v.contains(&[0.6]));
}

#[test]
fn nonanalytic_map_fails_the_gate() {
    // the differentiable model's truncation bound does not decay fast
    // enough to beat the a priori solution bound at any practical order
    let m = catalog("nonanalytic-g").unwrap();
    let model = default_model(&m).unwrap();
    let c1 = m.constants.c1.value.max(m.constants.c1_canonical);
    let bsol = a_priori_solution_norm(m.constants.lambda.value, c1).unwrap();
    let r = validate(&m, &ValidationInputs { order: 256, bsol, model });
    assert!(matches!(r, Err(Error::Validation(_))));
}
