//! Randomized containment of interval operations against 320-bit
//! astro-float evaluations at points inside the input intervals.

use astro_float::{BigFloat, Consts, RoundingMode};
use galerkin::interval::Interval;
use galerkin::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;
pub const CASES: usize = 100_000;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn inside(i: Interval, want: &BigFloat) -> bool {
    i.is_valid() && big(i.lo).cmp(want).is_some_and(|c| c <= 0) && big(i.hi).cmp(want).is_some_and(|c| c >= 0)
}

/// A random interval in [lo, hi] (sometimes a point) and a point in it.
fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64, log_scale: bool) -> (Interval, f64) {
    let draw = |rng: &mut ChaCha8Rng| {
        if log_scale {
            let s = if lo < 0.0 && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            s * 2f64.powf(rng.gen_range(lo.abs().max(1e-30).log2().min(-30.0)..hi.abs().log2()))
        } else {
            rng.gen_range(lo..hi)
        }
    };
    let a = draw(rng);
    if rng.gen_bool(0.3) {
        return (Interval::point(a), a);
    }
    let w = a.abs().max(1e-300) * 10f64.powf(rng.gen_range(-16.0..-2.0));
    let b = (a + w).min(hi);
    let (a, b) = (a.min(b), a.max(b));
    let p = match rng.gen_range(0..3) {
        0 => a,
        1 => b,
        _ => a + (b - a) * rng.gen_range(0.0..1.0),
    };
    (Interval::new(a, b), p.clamp(a, b))
}

fn check_unary(
    name: &str,
    lo: f64,
    hi: f64,
    log_scale: bool,
    f: impl Fn(Interval) -> Interval,
    g: impl Fn(&BigFloat, &mut Consts) -> BigFloat,
) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(name.bytes().map(u64::from).sum());
    let mut cc = Consts::new().unwrap();
    for _ in 0..CASES {
        let (x, p) = sample(&mut rng, lo, hi, log_scale);
        let want = g(&big(p), &mut cc);
        let got = f(x);
        if !inside(got, &want) {
            return Err(format!("{name}({x:?}) = {got:?} misses the value at {p:e}"));
        }
    }
    Ok(())
}

fn check_binary(
    name: &str,
    f: impl Fn(Interval, Interval) -> Interval,
    g: impl Fn(&BigFloat, &BigFloat) -> BigFloat,
) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(name.bytes().map(u64::from).sum());
    for _ in 0..CASES {
        let (x, p) = sample(&mut rng, -1e40, 1e40, true);
        let (y, q) = sample(&mut rng, -1e40, 1e40, true);
        if name == "div" && y.contains_zero() {
            continue;
        }
        let want = g(&big(p), &big(q));
        let got = f(x, y);
        if !inside(got, &want) {
            return Err(format!("{x:?} {name} {y:?} = {got:?} misses the value at ({p:e}, {q:e})"));
        }
    }
    Ok(())
}

fn cancellation() -> Result<(), String> {
    // sums whose rounding error is exactly representable exercise the
    // directed-rounding corrections
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..CASES {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b = -a * (1.0 + rng.gen_range(-1e-15..1e-15)) + rng.gen_range(-1e-20..1e-20);
        if !inside(Interval::point(a) + Interval::point(b), &big(a).add(&big(b), P, RM)) {
            return Err(format!("{a:e} + {b:e} is not enclosed"));
        }
        if !inside(Interval::point(a) * Interval::point(b), &big(a).mul(&big(b), P, RM)) {
            return Err(format!("{a:e} * {b:e} is not enclosed"));
        }
    }
    Ok(())
}

pub const OPERATIONS: &[&str] =
    &["add", "sub", "mul", "div", "cancellation", "sqrt", "exp", "ln", "sin", "cos", "acos", "sin-small", "cos-small"];

/// Runs `CASES` random containment checks of one operation.
pub fn check(op: &str) -> Result<(), String> {
    match op {
        "add" => check_binary(op, |a, b| a + b, |a, b| a.add(b, P, RM)),
        "sub" => check_binary(op, |a, b| a - b, |a, b| a.sub(b, P, RM)),
        "mul" => check_binary(op, |a, b| a * b, |a, b| a.mul(b, P, RM)),
        "div" => check_binary(op, |a, b| a / b, |a, b| a.div(b, P, RM)),
        "cancellation" => cancellation(),
        "sqrt" => check_unary(op, 1e-30, 1e300, true, |x| x.sqrt(), |x, _| x.sqrt(P, RM)),
        "exp" => check_unary(op, -700.0, 700.0, false, |x| x.exp(), |x, cc| x.exp(P, RM, cc)),
        "ln" => check_unary(op, 1e-300, 1e300, true, |x| x.ln(), |x, cc| x.ln(P, RM, cc)),
        "sin" => check_unary(op, -100.0, 100.0, false, |x| x.sin(), |x, cc| x.sin(P, RM, cc)),
        "cos" => check_unary(op, -100.0, 100.0, false, |x| x.cos(), |x, cc| x.cos(P, RM, cc)),
        "acos" => check_unary(op, -1.0, 1.0, false, |x| x.acos(), |x, cc| x.acos(P, RM, cc)),
        "sin-small" => check_unary(op, -1e-3, 1e-3, false, |x| x.sin(), |x, cc| x.sin(P, RM, cc)),
        "cos-small" => check_unary(op, -1e-3, 1e-3, false, |x| x.cos(), |x, cc| x.cos(P, RM, cc)),
        _ => Err(format!("unknown operation {op}")),
    }
}
