//! Tight enclosures of long interval sums.
//!
//! Midpoints are summed with the Sum2 cascade of Ogita, Rump and Oishi
//! (error-free TwoSum steps with the errors added at the end) and radii are
//! accumulated separately, so the result is wider than the exact sum of the
//! input intervals by only a few ulps of the largest partial sums.

use crate::interval::Interval;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Enclosure of Σ terms.
pub fn accurate_sum(terms: &[Interval]) -> Interval {
    if terms.iter().any(|t| !t.is_valid()) {
        return Interval::POISON;
    }
    if terms.iter().any(|t| !t.lo.is_finite() || !t.hi.is_finite()) {
        return Interval::new(f64::NEG_INFINITY, f64::INFINITY);
    }
    let n = terms.len() as f64;
    let (mut s, mut comp, mut abs_sum, mut rad) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for t in terms {
        let m = t.mid();
        rad += (t.hi - m).max(m - t.lo).next_up();
        abs_sum += m.abs();
        let (a, e) = two_sum(s, m);
        s = a;
        comp += e;
    }
    let res = s + comp;
    // |res − Σm| ≤ eps|res| + γ²_{n−1} Σ|m| for Sum2 (doubled for safety);
    // addition never loses accuracy to underflow.
    let eps = f64::EPSILON / 2.0;
    let g = n * eps / (1.0 - n * eps);
    let err = 2.0 * (eps * res.abs() + g * g * abs_sum * (1.0 + 2.0 * n * eps));
    let total = ((rad * (1.0 + 2.0 * n * eps)).next_up() + err) * (1.0 + 4.0 * eps);
    let total = total.next_up();
    if !total.is_finite() || !res.is_finite() {
        return Interval::new(f64::NEG_INFINITY, f64::INFINITY);
    }
    Interval::new((res - total).next_down(), (res + total).next_up())
}

/// Enclosure of Σ a_i b_i.
pub fn accurate_dot(a: &[Interval], b: &[Interval]) -> Interval {
    let p: Vec<Interval> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
    accurate_sum(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_keeps_width_small() {
        let t = [Interval::point(1e16), Interval::point(1.0), Interval::point(-1e16), Interval::point(1e-3)];
        let s = accurate_sum(&t);
        assert!(s.contains(1.001), "{s:?}");
        assert!(s.width() < 1e-12, "{s:?}");
    }

    #[test]
    fn radii_add() {
        let t = vec![Interval::new(0.9, 1.1); 10];
        let s = accurate_sum(&t);
        assert!(s.contains(9.0) && s.contains(11.0));
        assert!(s.width() < 2.0 + 1e-12);
    }

    #[test]
    fn poison_propagates() {
        assert!(!accurate_sum(&[Interval::point(1.0), Interval::POISON]).is_valid());
    }
}
