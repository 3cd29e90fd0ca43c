//! `galerkin`: command-line front end.
//!
//! Every subcommand prints a JSON report on stdout. With `--out DIR` the
//! report is also written to `DIR/report.json` next to the CSV artifacts.
//! Exit status is 0 on success, 2 for bad input (including policy
//! refusals) and 3 for numerical failures.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "galerkin", version, about = "Spectral Galerkin statistics of expanding Markov maps")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave timings out of the report so identical runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Directory for report.json and CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct MapSource {
    /// Catalog name: lanford, doubling, tupling(k), "circle k=K linear", nonanalytic-g.
    pub map: Option<String>,
    /// Map definition document.
    #[arg(long = "map-file")]
    pub map_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Adaptive tolerance, in [1e-15, 1e-2].
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    /// Solve at this fixed order instead of adaptively.
    #[arg(long)]
    pub order: Option<usize>,
}

/// Inputs of the analytic entry-bound model.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Strip half-width for the cosine-conjugated branches (interval maps).
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Strip half-width for the inverse branches (circle maps).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Distortion constant C₁ (default: the map's).
    #[arg(long = "C1")]
    pub c1: Option<f64>,
    /// Υ: bound on the second derivative of the branches on the strip.
    #[arg(long)]
    pub upsilon: Option<f64>,
    /// H: bound on |h′/h| on the strip.
    #[arg(long)]
    pub hbound: Option<f64>,
    /// Range LO,HI of the branch slopes.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub mu: Option<Vec<f64>>,
}

impl ModelArgs {
    pub fn is_empty(&self) -> bool {
        self.zeta.is_none() && self.delta.is_none() && self.upsilon.is_none() && self.hbound.is_none() && self.mu.is_none()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariant density.
    Acim {
        #[command(flatten)]
        map: MapSource,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Lyapunov exponent ∫ log|F′| ρ.
    Lyapunov {
        #[command(flatten)]
        map: MapSource,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Diffusion coefficient (CLT variance) of an observable.
    Diffusion {
        #[command(flatten)]
        map: MapSource,
        #[command(flatten)]
        solve: SolveArgs,
        /// Observable in the map's coordinate, e.g. "x^2".
        #[arg(long)]
        obs: String,
    },
    /// Σ Lⁿφ for a zero-integral φ.
    Resolvent {
        #[command(flatten)]
        map: MapSource,
        #[command(flatten)]
        solve: SolveArgs,
        /// φ in the map's coordinate.
        #[arg(long)]
        obs: String,
    },
    /// Matrix entries next to their bounds (CSV j,k,entry,bound).
    Bounds {
        #[command(flatten)]
        map: MapSource,
        #[arg(long, default_value_t = 64)]
        block: usize,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Errors of fixed-order solutions against a high-order reference.
    Convergence {
        #[command(flatten)]
        map: MapSource,
        /// Orders to solve at, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<usize>,
        /// Reference order (default 4× the largest order).
        #[arg(long)]
        reference: Option<usize>,
        /// double or quad.
        #[arg(long, default_value = "double")]
        precision: String,
    },
    /// Certified enclosure of the invariant density.
    Validate {
        #[command(flatten)]
        map: MapSource,
        #[arg(long)]
        order: usize,
        /// Bound on the solution operator norm (default: the a priori bound).
        #[arg(long)]
        bsol: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
        /// Interval precision; only binary64 is implemented.
        #[arg(long, default_value = "binary64")]
        precision: String,
        /// Also enclose the Lyapunov exponent.
        #[arg(long)]
        lyapunov: bool,
        /// Also enclose the diffusion coefficient of this polynomial observable.
        #[arg(long)]
        obs: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not start the thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    let out = output::Output { dir: cli.out.clone(), deterministic: cli.deterministic };
    let result = match cli.command {
        Command::Acim { map, solve } => commands::acim(&out, &map, &solve),
        Command::Lyapunov { map, solve } => commands::lyapunov(&out, &map, &solve),
        Command::Diffusion { map, solve, obs } => commands::diffusion(&out, &map, &solve, &obs),
        Command::Resolvent { map, solve, obs } => commands::resolvent(&out, &map, &solve, &obs),
        Command::Bounds { map, block, model } => commands::bounds(&out, &map, block, &model),
        Command::Convergence { map, orders, reference, precision } => commands::convergence(&out, &map, &orders, reference, &precision),
        Command::Validate { map, order, bsol, model, precision, lyapunov, obs } => {
            commands::validate(&out, &map, order, bsol, &model, &precision, lyapunov, obs.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
