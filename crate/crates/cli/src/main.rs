//! `hermcurv`: curvature of explicit Hermitian metrics from the command line.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hermcurv::certify::Budget;
use hermcurv::Tolerances;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "hermcurv", version, about = "Chern curvature, bisectional curvature certificates and Schwarz checks for Hermitian metrics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random samples for certification and Monte Carlo.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: usize,
    /// Optimizer starts.
    #[arg(long, global = true, default_value_t = 32)]
    starts: usize,
    /// Optimizer convergence tolerance.
    #[arg(long, global = true, default_value_t = 1e-14)]
    tol_opt: f64,
    #[arg(long, global = true)]
    tol_algebraic: Option<f64>,
    #[arg(long, global = true)]
    tol_decomposition: Option<f64>,
    #[arg(long, global = true)]
    tol_symmetry: Option<f64>,
    #[arg(long, global = true)]
    tol_fd: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FailOn::None)]
    fail_on: FailOn,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FailOn {
    None,
    Refuted,
    Inconclusive,
}

/// Metric parameters shared by the subcommands.
#[derive(Args, Debug, Clone, Default)]
struct MetricParams {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    /// Extra `key=value` parameters.
    #[arg(long = "param")]
    extra: Vec<String>,
}

/// Sample points: a single `--point`, or `--points` in a ball of `--radius`.
#[derive(Args, Debug, Clone)]
struct PointArgs {
    /// Comma-separated complex coordinates, e.g. `0.1,0.2-0.1i`.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Use a deterministic grid instead of random points.
    #[arg(long)]
    grid: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature data of a metric at a point.
    Eval {
        metric: String,
        #[command(flatten)]
        params: MetricParams,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Number of random directions for holomorphic sectional curvature.
        #[arg(long, default_value_t = 0)]
        directions: usize,
        /// Explicit direction (repeatable).
        #[arg(long = "direction", allow_hyphen_values = true)]
        direction: Vec<String>,
        /// Include the full coordinate-frame tensor.
        #[arg(long)]
        tensor: bool,
    },
    /// Certify a sign condition on the real bisectional curvature.
    Certify {
        metric: String,
        #[command(flatten)]
        params: MetricParams,
        #[command(flatten)]
        points: PointArgs,
        /// pos, nonneg, neg, nonpos, gt:c, ge:c, lt:c, le:c
        #[arg(long, default_value = "nonneg", allow_hyphen_values = true)]
        cond: String,
        /// Also check the constant-RBC identities for this constant.
        #[arg(long, allow_hyphen_values = true)]
        constant_rbc: Option<f64>,
    },
    /// Bochner identity and Schwarz inequality checks for a holomorphic map.
    Schwarz {
        /// Domain metric.
        g: String,
        /// Target metric.
        h: String,
        /// `identity`, `constant`, a map JSON file, or `;`-separated components.
        map: String,
        #[command(flatten)]
        params: MetricParams,
        /// Parameters for the domain metric only (`key=value`).
        #[arg(long = "g-param")]
        g_param: Vec<String>,
        /// Parameters for the target metric only (`key=value`).
        #[arg(long = "h-param")]
        h_param: Vec<String>,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[arg(long)]
        rank: Option<usize>,
        /// Compare sampled u with the sup bound.
        #[arg(long)]
        sup_bound: bool,
    },
    /// Monte Carlo checks.
    Mc {
        #[command(subcommand)]
        which: McCommand,
    },
    /// List or show catalog metrics.
    Catalog {
        #[command(subcommand)]
        which: CatalogCommand,
    },
}

#[derive(Subcommand, Debug)]
enum McCommand {
    /// Fourth moment E[w_i conj(w_j) w_k conj(w_l)] on the unit sphere.
    FsMoment {
        #[arg(long)]
        n: usize,
        /// 1-based indices `i,j,k,l`.
        #[arg(long)]
        idx: String,
    },
    /// Sphere average of the curvature form against its closed form.
    Berger {
        #[arg(long)]
        metric: String,
        #[command(flatten)]
        params: MetricParams,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// `uniform` or comma-separated weights.
        #[arg(long = "weights", default_value = "uniform")]
        weights: String,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    List,
    Show { name: String },
}

/// What the command found, for `--fail-on`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Outcome {
    pub refuted: bool,
    pub inconclusive: bool,
}

impl Global {
    fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            algebraic: self.tol_algebraic.unwrap_or(d.algebraic),
            decomposition: self.tol_decomposition.unwrap_or(d.decomposition),
            symmetry: self.tol_symmetry.unwrap_or(d.symmetry),
            finite_difference: self.tol_fd.unwrap_or(d.finite_difference),
        }
    }

    fn budget(&self) -> Budget {
        Budget {
            samples: self.samples,
            starts: self.starts,
            tol: self.tol_opt,
            seed: self.seed,
            ..Budget::default()
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.starts == 0 {
            anyhow::bail!("--starts must be positive");
        }
        if !(self.tol_opt > 0.0) {
            anyhow::bail!("--tol-opt must be positive");
        }
        let t = self.tolerances();
        for (name, v) in [
            ("algebraic", t.algebraic),
            ("decomposition", t.decomposition),
            ("symmetry", t.symmetry),
            ("fd", t.finite_difference),
        ] {
            if !(v > 0.0) {
                anyhow::bail!("--tol-{name} must be positive");
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> anyhow::Result<(report::Report, Outcome)> {
    cli.global.validate()?;
    let start = Instant::now();
    let (mut rep, outcome) = commands::dispatch(cli.command, &cli.global)?;
    if cli.global.timings {
        rep.timings = Some(json!({ "total_seconds": start.elapsed().as_secs_f64() }));
    }
    Ok((rep, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let global = cli.global.clone();
    let (rep, outcome) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = match rep.to_json() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match &global.out {
        Some(path) => {
            if let Err(e) = report::write_atomic(path, &text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    let failed = match global.fail_on {
        FailOn::None => false,
        FailOn::Refuted => outcome.refuted,
        FailOn::Inconclusive => outcome.refuted || outcome.inconclusive,
    };
    if failed {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}
