use std::fmt::Write as _;
use std::time::Instant;

use galerkin::basis::SpectralFunction;
use galerkin::bounds::{
    chebyshev_conjugation_constants, circle_distortion_constants, default_model, entry_bound_analytic, entry_table, AnalyticInputs,
    EntryBoundModel, DEFAULT_SAMPLES, SUM_SLACK,
};
use galerkin::expr::Expr;
use galerkin::map::{catalog, parse_map_definition, DomainKind, MarkovMap};
use galerkin::solver::{self, a_priori_solution_norm, convergence_study, Mode, Precision, Solver};
use galerkin::transfer::basis_for;
use galerkin::validated::{validate as run_validation, validated_quantity, QuantityKind, ValidatedQuantity, ValidationInputs};
use serde_json::{json, Value};

use crate::output::{CliError, CliResult, Output};
use crate::{MapSource, ModelArgs, SolveArgs};

fn load_map(src: &MapSource) -> CliResult<MarkovMap> {
    match (&src.map, &src.map_file) {
        (Some(name), None) => Ok(catalog(name)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_map_definition(&text)?)
        }
        _ => Err(CliError::input("give either a catalog name or --map-file")),
    }
}

fn mode(args: &SolveArgs) -> CliResult<Mode> {
    if !(1e-15..=1e-2).contains(&args.tol) {
        return Err(CliError::input(format!("--tol {} outside [1e-15, 1e-2]", args.tol)));
    }
    Ok(match args.order {
        Some(order) => Mode::Fixed { order },
        None => Mode::Adaptive { tol: args.tol },
    })
}

fn map_summary(map: &MarkovMap) -> Value {
    json!({
        "name": map.name,
        "basis": basis_for(map),
        "branches": map.branch_count(),
        "constants": map.constants,
    })
}

fn solve_summary(r: &solver::SolveReport) -> Value {
    json!({
        "order": r.order,
        "converged": r.converged,
        "residual_l1": r.residual_l1,
        "residual_bv": r.residual_bv,
        "seconds": r.seconds,
    })
}

fn acim_report<'a>(map: &'a MarkovMap, args: &SolveArgs) -> CliResult<(Solver<'a>, solver::SolveReport)> {
    let mut s = Solver::new(map, mode(args)?)?;
    let r = s.acim()?;
    Ok((s, r))
}

pub fn acim(out: &Output, src: &MapSource, args: &SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let map = load_map(src)?;
    let (s, r) = acim_report(&map, args)?;
    let report = json!({
        "command": "acim",
        "map": map_summary(&map),
        "mode": s.mode,
        "solve": solve_summary(&r),
        "integral": r.solution.integral(),
        "density": r.solution.coeffs,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("density.csv", r.solution.to_csv())])
}

pub fn lyapunov(out: &Output, src: &MapSource, args: &SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let map = load_map(src)?;
    let (s, r) = acim_report(&map, args)?;
    let value = solver::lyapunov(&map, &r.solution)?;
    let report = json!({
        "command": "lyapunov",
        "map": map_summary(&map),
        "mode": s.mode,
        "solve": solve_summary(&r),
        "lyapunov": value,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("density.csv", r.solution.to_csv())])
}

pub fn diffusion(out: &Output, src: &MapSource, args: &SolveArgs, obs: &str) -> CliResult<()> {
    let start = Instant::now();
    let map = load_map(src)?;
    let expr = Expr::parse(obs)?;
    let (mut s, r) = acim_report(&map, args)?;
    let a = solver::observable(&map, &expr)?;
    let mean = r.solution.times(&a).integral();
    let (variance, chi) = solver::birkhoff_variance(&mut s, &r.solution, &a)?;
    let report = json!({
        "command": "diffusion",
        "map": map_summary(&map),
        "observable": obs,
        "mode": s.mode,
        "solve": solve_summary(&r),
        "resolvent": solve_summary(&chi),
        "mean": mean,
        "diffusion": variance,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("density.csv", r.solution.to_csv()), ("resolvent.csv", chi.solution.to_csv())])
}

pub fn resolvent(out: &Output, src: &MapSource, args: &SolveArgs, obs: &str) -> CliResult<()> {
    let start = Instant::now();
    let map = load_map(src)?;
    let expr = Expr::parse(obs)?;
    let phi = solver::observable(&map, &expr)?;
    let mut s = Solver::new(&map, mode(args)?)?;
    let r = s.resolvent(&phi)?;
    let report = json!({
        "command": "resolvent",
        "map": map_summary(&map),
        "observable": obs,
        "mode": s.mode,
        "solve": solve_summary(&r),
        "coefficients": r.solution.coeffs,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("resolvent.csv", r.solution.to_csv())])
}

fn padded(mu: (f64, f64)) -> (f64, f64) {
    let pad = 0.25 * (mu.1 - mu.0).max(0.05);
    (mu.0 - pad, mu.1 + pad)
}

fn c1_of(map: &MarkovMap, args: &ModelArgs) -> f64 {
    args.c1.unwrap_or(map.constants.c1.value.max(map.constants.c1_canonical))
}

/// The strip width flag matching the map's domain.
fn strip_width(map: &MarkovMap, args: &ModelArgs) -> CliResult<Option<f64>> {
    match (map.kind(), args.zeta, args.delta) {
        (DomainKind::NonPeriodic, _, Some(_)) => Err(CliError::input("--delta is for circle maps; use --zeta for interval maps")),
        (DomainKind::Periodic, Some(_), _) => Err(CliError::input("--zeta is for interval maps; use --delta for circle maps")),
        (_, z, d) => Ok(z.or(d)),
    }
}

fn mu_flag(args: &ModelArgs) -> CliResult<Option<(f64, f64)>> {
    match args.mu.as_deref() {
        None => Ok(None),
        Some([lo, hi]) => Ok(Some((*lo, *hi))),
        Some(_) => Err(CliError::input("--mu takes LO,HI")),
    }
}

/// Analytic model from user-supplied strip constants. Circle maps default
/// to μ̃ = ±1/λ; interval maps must give --mu.
fn user_model(map: &MarkovMap, args: &ModelArgs) -> CliResult<EntryBoundModel> {
    let width = strip_width(map, args)?;
    let (Some(width), Some(upsilon), Some(h)) = (width, args.upsilon, args.hbound) else {
        return Err(CliError::input("the entry-bound model needs --upsilon, --hbound and --zeta (interval maps) or --delta (circle maps)"));
    };
    let mu = match (mu_flag(args)?, map.kind()) {
        (Some(mu), _) => mu,
        (None, DomainKind::Periodic) => {
            let s = 1.0 / map.constants.lambda.value;
            (-s, s)
        }
        (None, DomainKind::NonPeriodic) => return Err(CliError::input("interval maps need --mu LO,HI for the conjugated branch slopes")),
    };
    let inputs = AnalyticInputs { upsilon, h, delta: width, mu, p: padded(mu), c1: c1_of(map, args) };
    Ok(entry_bound_analytic(basis_for(map), &inputs)?)
}

/// Analytic model from sampled strip constants, with flags overriding.
fn sampled_model(map: &MarkovMap, width: f64, args: &ModelArgs) -> CliResult<EntryBoundModel> {
    let est = match map.kind() {
        DomainKind::Periodic => circle_distortion_constants(map, Some(width), 1, DEFAULT_SAMPLES)?,
        DomainKind::NonPeriodic => chebyshev_conjugation_constants(map, Some(width), 1, DEFAULT_SAMPLES)?,
    };
    let mu = mu_flag(args)?.unwrap_or(est.mu);
    let inputs = AnalyticInputs {
        upsilon: args.upsilon.unwrap_or(est.upsilon[0]),
        h: args.hbound.unwrap_or(est.h[0]),
        delta: width,
        mu,
        p: padded(mu),
        c1: c1_of(map, args),
    };
    Ok(entry_bound_analytic(basis_for(map), &inputs)?)
}

pub fn bounds(out: &Output, src: &MapSource, block: usize, args: &ModelArgs) -> CliResult<()> {
    let start = Instant::now();
    if block == 0 {
        return Err(CliError::input("--block must be positive"));
    }
    let map = load_map(src)?;
    let model = match strip_width(&map, args)? {
        Some(w) => sampled_model(&map, w, args)?,
        None if args.is_empty() => default_model(&map)?,
        None => return Err(CliError::input("model flags need a strip width (--zeta or --delta)")),
    };
    let table = entry_table(&map, &model, block)?;
    let violations: Vec<Value> = table
        .iter()
        .filter(|e| e.violates(SUM_SLACK))
        .map(|e| json!({ "row": e.row, "col": e.col, "entry": e.entry, "bound": e.bound }))
        .collect();
    let worst = table.iter().filter(|e| e.bound > 0.0).map(|e| e.entry.abs() / e.bound).fold(0.0_f64, f64::max);
    let mut csv = String::from("j,k,entry,bound\n");
    for e in &table {
        let _ = writeln!(csv, "{},{},{:.16e},{:.16e}", e.row, e.col, e.entry, e.bound);
    }
    let report = json!({
        "command": "bounds",
        "map": map_summary(&map),
        "block": block,
        "model": model,
        "entries": table.len(),
        "violation_count": violations.len(),
        "violations": violations,
        "max_ratio": worst,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("bounds.csv", csv)])
}

pub fn convergence(out: &Output, src: &MapSource, orders: &[usize], reference: Option<usize>, precision: &str) -> CliResult<()> {
    let start = Instant::now();
    let precision: Precision = precision.parse()?;
    let map = load_map(src)?;
    let study = convergence_study(&map, orders, reference, precision)?;
    let mut csv = String::from(if out.deterministic { "order,linf_error,bv_error\n" } else { "order,linf_error,bv_error,seconds\n" });
    for p in &study.points {
        let _ = write!(csv, "{},{:.6e},{:.6e}", p.order, p.linf_error, p.bv_error);
        if !out.deterministic {
            let _ = write!(csv, ",{:.6e}", p.seconds);
        }
        csv.push('\n');
    }
    let report = json!({
        "command": "convergence",
        "map": map_summary(&map),
        "study": study,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("convergence.csv", csv)])
}

fn quantity_json(q: &ValidatedQuantity) -> Value {
    json!({ "lo": q.lo, "hi": q.hi, "mid": q.mid(), "width": q.width(), "density_error": q.density_error, "quadrature_error": q.quadrature_error })
}

#[allow(clippy::too_many_arguments)]
pub fn validate(
    out: &Output,
    src: &MapSource,
    order: usize,
    bsol: Option<f64>,
    args: &ModelArgs,
    precision: &str,
    lyapunov: bool,
    obs: Option<&str>,
) -> CliResult<()> {
    let start = Instant::now();
    if !matches!(precision, "binary64" | "double" | "53") {
        return Err(CliError::input(format!("validated precision '{precision}' is not implemented; only binary64 is available")));
    }
    let map = load_map(src)?;
    if !map.constants.all_user_supplied() {
        return Err(CliError::input(format!(
            "map '{}' has grid-estimated λ or C1; validation needs them stated in the definition (lambda, C1)",
            map.name
        )));
    }
    let model = if map.name == "lanford" && src.map_file.is_none() && args.is_empty() {
        EntryBoundModel::lanford()
    } else {
        user_model(&map, args)?
    };
    let bsol = match bsol {
        Some(b) if b.is_finite() && b >= 1.0 => b,
        Some(b) => return Err(CliError::input(format!("--bsol must be finite and at least 1, got {b}"))),
        None => a_priori_solution_norm(map.constants.lambda.value, c1_of(&map, args))?,
    };
    let expr = obs.map(Expr::parse).transpose()?;
    let v = run_validation(&map, &ValidationInputs { order, bsol, model })?;
    let mut quantities = serde_json::Map::new();
    if lyapunov {
        let q = validated_quantity(&v, &QuantityKind::Lyapunov, &map)?;
        quantities.insert("lyapunov".into(), quantity_json(&q));
    }
    if let Some(expr) = expr {
        let q = validated_quantity(&v, &QuantityKind::Diffusion { observable: expr }, &map)?;
        quantities.insert("diffusion".into(), quantity_json(&q));
    }
    let rho = SpectralFunction::new(v.certificate.basis, v.certificate.coefficients.clone());
    let report = json!({
        "command": "validate",
        "map": map_summary(&map),
        "precision": "binary64",
        "certificate": v.certificate,
        "quantities": quantities,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    out.emit(report, &[("density.csv", rho.to_csv())])
}
