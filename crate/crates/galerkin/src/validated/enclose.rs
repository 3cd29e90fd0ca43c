//! Rigorous enclosures of inverse branches by interval Newton.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::map::{Definition, DomainKind, MarkovMap};

use super::IntervalScalar;

const TWO_PI: f64 = 2.0 * PI;
const ATTEMPTS: usize = 5;

/// One Newton operator N(X) = m − (F(m) − target)/F′(X) around the float
/// root `x0`, accepted only when it maps a box strictly into itself (which
/// proves a unique root inside), then refined twice.
fn newton<T: IntervalScalar>(f: impl Fn(T) -> (T, T), x0: f64, target: T) -> Result<T> {
    let mut r = 1e-12 * (1.0 + x0.abs()) + target.width();
    for _ in 0..ATTEMPTS {
        let x = T::from_bounds((x0 - r).next_down(), (x0 + r).next_up());
        let m = T::cst(x0);
        let n = m - (f(m).0 - target) / f(x).1;
        if n.is_valid() && n.lo() > x.lo() && n.hi() < x.hi() {
            let mut x = n;
            for _ in 0..2 {
                let m = T::cst(x.mid());
                let n = m - (f(m).0 - target) / f(x).1;
                if let Some(i) = n.intersect(&x) {
                    x = i;
                }
            }
            return Ok(x);
        }
        r *= 16.0;
    }
    Err(Error::Validation(format!("interval Newton did not contract around the preimage {x0}")))
}

/// (v_ι(Y), |v_ι′(Y)|) for every branch ι, enclosing the preimages of every
/// canonical point in `y`.
pub fn enclose_preimages<T: IntervalScalar>(map: &MarkovMap, y: T) -> Result<Vec<(T, T)>> {
    let two_pi = T::pi() * T::cst(2.0);
    let yf = y.mid();
    (0..map.branch_count())
        .map(|iota| {
            let (x, d) = match &map.definition {
                Definition::InverseLift { .. } => map.inverse_lift_t(y + two_pi * T::cst(iota as f64)).unwrap(),
                def => {
                    let x0 = map.branch_inverse(iota, yf)?;
                    let (target, fwd) = match def {
                        Definition::Lift { .. } => {
                            let f0 = map.forward_t(0, x0).unwrap();
                            let periods = ((f0 - (yf + TWO_PI * iota as f64)) / TWO_PI).round();
                            (y + two_pi * T::cst(iota as f64 + periods), 0)
                        }
                        _ => (y, iota),
                    };
                    let f = |x: T| map.forward_with_derivative_t(fwd, x).unwrap();
                    let x = newton(f, x0, target)?;
                    let d = f(x).1;
                    (x, T::cst(1.0) / d)
                }
            };
            let x = match map.kind() {
                DomainKind::NonPeriodic => x.intersect(&T::from_bounds(-1.0, 1.0)).unwrap_or(x),
                DomainKind::Periodic => x,
            };
            let s = d.abs();
            if !x.is_valid() || !s.is_valid() || s.lo() <= 0.0 {
                return Err(Error::Validation(format!("branch {iota} has no valid enclosure over {y:?}")));
            }
            Ok((x, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::map::catalog;

    #[test]
    fn lanford_preimages_contain_float_inverses() {
        let m = catalog("lanford").unwrap();
        for y in [-0.99, -0.3, 0.0, 0.41, 0.999] {
            let e = enclose_preimages(&m, Interval::point(y)).unwrap();
            for (iota, (x, s)) in e.iter().enumerate() {
                let v = m.branch_inverse_derivatives(iota, y).unwrap();
                assert!(x.contains(v.v) || (x.lo - v.v).abs().min((x.hi - v.v).abs()) < 1e-15, "{x:?} vs {}", v.v);
                assert!(x.width() < 1e-14, "{x:?}");
                assert!((s.mid() - v.d1.abs()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn doubling_preimages_are_exact_halves() {
        let m = catalog("doubling").unwrap();
        let y = Interval::new(1.0, 1.5);
        let e = enclose_preimages(&m, y).unwrap();
        assert_eq!(e.len(), 2);
        let mut lo: Vec<f64> = e.iter().map(|(x, _)| x.lo).collect();
        lo.sort_by(f64::total_cmp);
        assert!((lo[0] - 0.5).abs() < 1e-12 && (lo[1] - 0.5 - PI).abs() < 1e-12, "{e:?}");
        assert!(e.iter().all(|(_, s)| s.contains(0.5) && s.width() < 1e-15));
    }

    #[test]
    fn inverse_lift_maps_are_enclosed_directly() {
        let m = catalog("nonanalytic-g").unwrap();
        let e = enclose_preimages(&m, Interval::point(1.0)).unwrap();
        let f = m.preimages(1.0).unwrap();
        for ((x, _), v) in e.iter().zip(&f) {
            assert!((x.mid() - v.v).abs() < 1e-13);
        }
    }
}
