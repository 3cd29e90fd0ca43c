//! Sampled distortion constants feeding the entry-bound models.
//!
//! Circle maps use the inverse branches v directly. Interval maps use the
//! cosine-conjugated branches υ = acos∘v∘cos and weights h = v′∘cos. These
//! are estimates (sampled suprema inflated by 5%), not rigorous bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::map::{Definition, DomainKind, MarkovMap};
use crate::scalar::Scalar;

use super::recurrence::MAX_ORDER;

pub const INFLATION: f64 = 1.05;
pub const DEFAULT_SAMPLES: usize = 4096;

const J: usize = MAX_ORDER + 2;
// conjugated jets lose accuracy as v(cos θ) approaches ±1
const ENDPOINT_GAP: f64 = 1e-4;
const CONTINUATION_STEPS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionEstimate {
    /// Υ̂₁..Υ̂_r: sup |υ^{(n+1)}| (or |v^{(n+1)}| for circle maps).
    pub upsilon: Vec<f64>,
    /// Ĥ₁..Ĥ_r: sup |h^{(n)}/h|.
    pub h: Vec<f64>,
    /// Range of υ′ (or v′) over the real domain, widened by the inflation.
    pub mu: (f64, f64),
    /// Strip half-width for the analytic case.
    pub strip: Option<f64>,
    pub samples: usize,
}

fn check_order(r: usize) -> Result<()> {
    if r == 0 || r > MAX_ORDER {
        return Err(Error::InvalidInput(format!("differentiability order must be in 1..={MAX_ORDER}, got {r}")));
    }
    Ok(())
}

fn check_strip(map: &MarkovMap, width: f64) -> Result<()> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidInput(format!("strip width must be positive, got {width}")));
    }
    if !map.is_holomorphic() {
        return Err(Error::InvalidInput(format!(
            "map '{}' uses abs, which has no complex extension; use the differentiable model",
            map.name
        )));
    }
    Ok(())
}

/// Taylor jet of the branch-ι inverse at the canonical point y.
fn inverse_jet(map: &MarkovMap, iota: usize, y: f64) -> Result<Jet<J>> {
    if let Definition::InverseLift { .. } = map.definition {
        let t = Jet::<J>::variable(y + 2.0 * PI * iota as f64);
        return Ok(map.inverse_lift_t(t).unwrap().0);
    }
    let x = map.branch_inverse(iota, y)?;
    let fwd = match map.definition {
        Definition::Lift { .. } => 0,
        _ => iota,
    };
    let f = map.forward_t(fwd, Jet::<J>::variable(x)).unwrap();
    if !(f.c[1].abs() > 0.0) {
        return Err(Error::Numerical(format!("f' vanishes on branch {iota}")));
    }
    Ok(f.revert(x))
}

fn derivative_jet(j: &Jet<J>) -> Jet<J> {
    let mut c = [0.0; J];
    for i in 0..J - 1 {
        c[i] = (i + 1) as f64 * j.c[i + 1];
    }
    Jet { c }
}

fn inflate(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x * INFLATION).collect()
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    let pad = (INFLATION - 1.0) * (hi - lo).max(lo.abs().max(hi.abs()));
    (lo - pad, hi + pad)
}

/// Constants of a circle map: on the real line (`strip = None`, orders
/// 1..=r) or on the boundary of the strip |Im y| = δ (r = 1).
pub fn circle_distortion_constants(map: &MarkovMap, strip: Option<f64>, r: usize, samples: usize) -> Result<DistortionEstimate> {
    if map.kind() != DomainKind::Periodic {
        return Err(Error::InvalidInput(format!("map '{}' is not a circle map", map.name)));
    }
    check_order(r)?;
    let samples = samples.max(16);
    let (mut ups, mut hs) = (vec![0.0_f64; r], vec![0.0_f64; r]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for iota in 0..map.branch_count() {
        for s in 0..samples {
            let y = 2.0 * PI * (s as f64 + 0.5) / samples as f64;
            let v = inverse_jet(map, iota, y)?;
            let d1 = v.derivative(1);
            lo = lo.min(d1);
            hi = hi.max(d1);
            if strip.is_none() {
                for n in 1..=r {
                    let dn = v.derivative(n + 1);
                    ups[n - 1] = ups[n - 1].max(dn.abs());
                    hs[n - 1] = hs[n - 1].max((dn / d1).abs());
                }
            }
        }
    }
    if let Some(delta) = strip {
        if r != 1 {
            return Err(Error::InvalidInput("strip constants are first order only".into()));
        }
        check_strip(map, delta)?;
        for iota in 0..map.branch_count() {
            for s in 0..samples {
                let t = 2.0 * PI * (s as f64 + 0.5) / samples as f64;
                let (_, d1, d2) = map.branch_inverse_complex(iota, t, Complex64::new(t, delta), CONTINUATION_STEPS)?;
                ups[0] = ups[0].max(d2.norm());
                hs[0] = hs[0].max((d2 / d1).norm());
            }
        }
    }
    if ups.iter().chain(&hs).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("distortion constants are not finite".into()));
    }
    Ok(DistortionEstimate { upsilon: inflate(ups), h: inflate(hs), mu: widen(lo, hi), strip, samples })
}

/// Constants of the conjugated branches υ_ι = acos∘v_ι∘cos and
/// h_ι = v_ι′∘cos of an interval map, on a real grid in θ (`zeta = None`)
/// or on the strip boundary Im θ = ζ (r = 1).
pub fn chebyshev_conjugation_constants(map: &MarkovMap, zeta: Option<f64>, r: usize, samples: usize) -> Result<DistortionEstimate> {
    if map.kind() != DomainKind::NonPeriodic {
        return Err(Error::InvalidInput(format!("map '{}' is not an interval map", map.name)));
    }
    check_order(r)?;
    if let Some(z) = zeta {
        if r != 1 {
            return Err(Error::InvalidInput("strip constants are first order only".into()));
        }
        check_strip(map, z)?;
    }
    let samples = samples.max(16);
    let (mut ups, mut hs) = (vec![0.0_f64; r], vec![0.0_f64; r]);
    let mut speed = 0.0_f64;
    for iota in 0..map.branch_count() {
        for s in 0..samples {
            let theta = PI * (s as f64 + 0.5) / samples as f64;
            let x = Jet::<J>::variable(theta).cos();
            let v = inverse_jet(map, iota, x.c[0])?;
            let w = Jet::compose(&v.c, x);
            if 1.0 - w.c[0] * w.c[0] < ENDPOINT_GAP {
                continue;
            }
            let upsilon = w.acos();
            let h = Jet::compose(&derivative_jet(&v).c, x);
            speed = speed.max(upsilon.derivative(1).abs());
            if zeta.is_none() {
                for n in 1..=r {
                    ups[n - 1] = ups[n - 1].max(upsilon.derivative(n + 1).abs());
                    hs[n - 1] = hs[n - 1].max((h.derivative(n) / h.c[0]).abs());
                }
            }
        }
    }
    if let Some(z) = zeta {
        for iota in 0..map.branch_count() {
            for s in 0..2 * samples {
                let t = 2.0 * PI * (s as f64 + 0.5) / (2 * samples) as f64;
                let theta = Complex64::new(t, z);
                let (sn, x) = (theta.sin(), theta.cos());
                let anchor = x.re.clamp(-1.0, 1.0);
                let (w, d1, d2) = map.branch_inverse_complex(iota, anchor, x, CONTINUATION_STEPS)?;
                let g = (Complex64::new(1.0, 0.0) - w * w).sqrt();
                // υ″ = (x v′ − s² v″)/g − s² v′² w/g³ with s = sin θ, g = √(1 − w²)
                let u2 = (x * d1 - sn * sn * d2) / g - sn * sn * d1 * d1 * w / (g * g * g);
                ups[0] = ups[0].max(u2.norm());
                hs[0] = hs[0].max((sn * d2 / d1).norm());
            }
        }
    }
    if ups.iter().chain(&hs).chain([&speed]).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("conjugated distortion constants are not finite".into()));
    }
    let s = speed * INFLATION;
    Ok(DistortionEstimate { upsilon: inflate(ups), h: inflate(hs), mu: (-s, s), strip: zeta, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::catalog;

    #[test]
    fn tupling_conjugated_speed_is_inverse_root_k() {
        for k in [2u32, 3, 5] {
            let m = catalog(&format!("tupling({k})")).unwrap();
            let e = chebyshev_conjugation_constants(&m, None, 1, DEFAULT_SAMPLES).unwrap();
            let sup = e.mu.1 / INFLATION;
            let want = 1.0 / (k as f64).sqrt();
            assert!(sup <= want * (1.0 + 1e-9) && sup > want * (1.0 - 1e-3), "k={k}: {sup} vs {want}");
        }
    }

    #[test]
    fn lanford_strip_constants_are_finite() {
        let m = catalog("lanford").unwrap();
        let e = chebyshev_conjugation_constants(&m, Some((1.75_f64).acosh()), 1, 1024).unwrap();
        assert!(e.upsilon[0].is_finite() && e.upsilon[0] > 0.0);
        assert!(e.h[0].is_finite());
    }

    #[test]
    fn linear_circle_map_has_zero_distortion() {
        let m = catalog("doubling").unwrap();
        let e = circle_distortion_constants(&m, None, 3, 256).unwrap();
        assert!(e.upsilon.iter().chain(&e.h).all(|&x| x < 1e-12), "{e:?}");
        assert!((e.mu.0 - 0.5).abs() < 0.05 && (e.mu.1 - 0.5).abs() < 0.05);
        let s = circle_distortion_constants(&m, Some(0.5), 1, 256).unwrap();
        assert!(s.upsilon[0] < 1e-12);
    }

    #[test]
    fn abs_has_no_strip_constants() {
        let m = crate::map::parse_map_definition("domain periodic 0 2*pi\nlift 2*x + 0.1*abs(sin(x))").unwrap();
        assert!(circle_distortion_constants(&m, Some(0.1), 1, 64).is_err());
    }
}
