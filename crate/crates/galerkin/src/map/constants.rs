use serde::Serialize;

use super::{DomainKind, MarkovMap};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    UserSupplied,
    GridEstimated { grid_size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    #[serde(flatten)]
    pub provenance: Provenance,
}

impl Constant {
    pub fn user(value: f64) -> Constant {
        Constant { value, provenance: Provenance::UserSupplied }
    }

    pub fn is_user_supplied(&self) -> bool {
        self.provenance == Provenance::UserSupplied
    }
}

/// Expansion and distortion constants. `c1` is in the user's coordinates;
/// `c1_canonical` is the same bound after rescaling to the canonical domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapConstants {
    pub lambda: Constant,
    pub lambda_check: Option<Constant>,
    pub c1: Constant,
    pub c1_canonical: f64,
    pub xi: Constant,
}

impl MapConstants {
    pub(super) fn placeholder() -> MapConstants {
        let z = Constant::user(0.0);
        MapConstants { lambda: z, lambda_check: None, c1: z, c1_canonical: 0.0, xi: z }
    }

    /// True when λ and C₁, which the a priori solution bound depends on,
    /// were supplied rather than sampled.
    pub fn all_user_supplied(&self) -> bool {
        self.lambda.is_user_supplied() && self.c1.is_user_supplied()
    }

    /// The expansion parameter the solvers require to exceed 1: λ for
    /// circle maps, λ̌ for interval maps.
    pub fn solver_expansion(&self) -> f64 {
        self.lambda_check.map_or(self.lambda.value, |c| c.value)
    }
}

/// Constants given in a definition document or by a catalog entry.
#[derive(Clone, Copy, Debug, Default)]
pub struct Supplied {
    pub lambda: Option<f64>,
    pub lambda_check: Option<f64>,
    pub c1: Option<f64>,
}

const MAX_GRID: usize = (1 << 14) + 1;
const ENDPOINT_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

struct Sample {
    lambda: f64,
    lambda_check: f64,
    c1: f64,
}

fn sample(map: &MarkovMap, n: usize) -> Sample {
    let (lo, hi) = map.domain.canonical_bounds();
    let periodic = map.kind() == DomainKind::Periodic;
    let mut s = Sample { lambda: f64::INFINITY, lambda_check: f64::INFINITY, c1: 0.0 };
    for i in 0..n {
        let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let endpoint = i == 0 || i == n - 1;
        for iota in 0..map.branch_count() {
            let Ok(j) = map.branch_inverse_derivatives(iota, y) else {
                s.lambda = 0.0;
                continue;
            };
            s.lambda = s.lambda.min(1.0 / j.d1.abs());
            s.c1 = s.c1.max((j.d2 / j.d1).abs());
            if periodic {
                continue;
            }
            let ratio = |y: f64, v: f64, d1: f64| ((1.0 - v * v) / (1.0 - y * y)).sqrt() / d1.abs();
            if !endpoint {
                s.lambda_check = s.lambda_check.min(ratio(y, j.v, j.d1));
            } else if (j.v.abs() - 1.0).abs() <= 1e-9 {
                // 0/0 at a fixed endpoint: quadratic extrapolation in the
                // distance to it
                let mut vals = [0.0; 3];
                for (k, h) in ENDPOINT_STEPS.iter().enumerate() {
                    let yy = y - y.signum() * h;
                    vals[k] = match map.branch_inverse_derivatives(iota, yy) {
                        Ok(jj) => ratio(yy, jj.v, jj.d1),
                        Err(_) => 0.0,
                    };
                }
                s.lambda_check = s.lambda_check.min(extrapolate_to_zero(&ENDPOINT_STEPS, &vals));
            }
        }
    }
    s
}

/// Value at 0 of the quadratic through (h_k, f_k).
fn extrapolate_to_zero(h: &[f64; 3], f: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - h[j]) / (h[i] - h[j]);
            }
        }
        acc += w * f[i];
    }
    acc
}

fn partition_spacing(map: &MarkovMap) -> f64 {
    let mut xi: f64 = 0.0;
    for b in map.branches() {
        for sigma in [-1.0_f64, 1.0] {
            if sigma >= b.lo - 1e-12 && sigma <= b.hi + 1e-12 {
                continue;
            }
            let d = (sigma - b.lo).abs().min((sigma - b.hi).abs());
            xi = xi.max((b.hi - b.lo) / d);
        }
    }
    xi
}

/// Grid estimates of λ, λ̌ and C₁, refining by nested doubling of the grid
/// until every estimate changes by less than 1e-6 relative.
pub fn estimate_constants(map: &MarkovMap, grid_size: usize) -> MapConstants {
    let mut n = grid_size.max(65);
    let mut cur = sample(map, n);
    while n < MAX_GRID {
        let m = 2 * n - 1;
        let next = sample(map, m);
        // minima and maxima only move one way on a nested grid
        let next =
            Sample { lambda: next.lambda.min(cur.lambda), lambda_check: next.lambda_check.min(cur.lambda_check), c1: next.c1.max(cur.c1) };
        let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        let change = rel(cur.lambda, next.lambda)
            .max(if map.kind() == DomainKind::NonPeriodic { rel(cur.lambda_check, next.lambda_check) } else { 0.0 })
            .max(rel(cur.c1, next.c1));
        cur = next;
        n = m;
        if change < 1e-6 {
            break;
        }
    }
    let g = |value| Constant { value, provenance: Provenance::GridEstimated { grid_size: n } };
    let scale = map.domain.scale();
    MapConstants {
        lambda: g(cur.lambda),
        lambda_check: (map.kind() == DomainKind::NonPeriodic).then(|| g(cur.lambda_check)),
        c1: g(cur.c1 * scale),
        c1_canonical: cur.c1,
        xi: Constant::user(partition_spacing(map)),
    }
}

pub(super) fn resolve(map: &MarkovMap, supplied: &Supplied, grid_size: usize) -> MapConstants {
    let mut c = estimate_constants(map, grid_size);
    if let Some(v) = supplied.lambda {
        c.lambda = Constant::user(v);
    }
    if let Some(v) = supplied.lambda_check {
        c.lambda_check = Some(Constant::user(v));
    }
    if let Some(v) = supplied.c1 {
        c.c1 = Constant::user(v);
        c.c1_canonical = v / map.domain.scale();
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{catalog, parse_map_definition};

    fn estimated(name: &str) -> MapConstants {
        estimate_constants(&catalog(name).unwrap(), 65)
    }

    #[test]
    fn lanford_constants() {
        let c = estimated("lanford");
        assert!((c.lambda.value - 1.5).abs() < 1e-9);
        assert!((c.c1.value - 4.0 / 9.0).abs() < 1e-9);
        assert!(matches!(c.lambda.provenance, Provenance::GridEstimated { .. }));
        let xs = (5.0 - 17f64.sqrt()) / 2.0;
        assert!((c.xi.value - (1.0 - xs) / xs).abs() < 1e-12);
    }

    #[test]
    fn tupling_c_expansion_is_root_k() {
        let c = estimated("tupling(4)");
        assert!((c.lambda_check.unwrap().value - 2.0).abs() < 1e-6);
        assert!((c.lambda.value - 4.0).abs() < 1e-12);
        assert!(c.c1.value.abs() < 1e-9);
    }

    #[test]
    fn doubling_constants() {
        let c = estimated("doubling");
        assert!((c.lambda.value - 2.0).abs() < 1e-12);
        assert!(c.c1.value.abs() < 1e-9);
        assert!(c.lambda_check.is_none());
    }

    #[test]
    fn grid_lambda_never_increases_with_refinement() {
        let map = parse_map_definition(
            "domain interval 0 1\nbranch [0, 0.5] expr 2*x + 0.1*sin(2*pi*x)\nbranch [0.5, 1] expr 2*x - 1 + 0.1*sin(2*pi*x)",
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for n in [65, 129, 257, 513] {
            let l = sample(&map, n).lambda;
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn extrapolation_is_exact_for_quadratics() {
        let h = ENDPOINT_STEPS;
        let f = h.map(|x| 3.0 + 2.0 * x - 5.0 * x * x);
        assert!((extrapolate_to_zero(&h, &f) - 3.0).abs() < 1e-9);
    }
}
