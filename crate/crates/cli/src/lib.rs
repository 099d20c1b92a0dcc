//! Command-line frontend: file in, verdicts or densities out.
//!
//! Exit codes form a stable contract for CI consumption: 0 on success,
//! 1 when a check or precondition fails on well-formed input, 2 on
//! usage or parse errors.  All floating-point output is printed at 17
//! significant digits so files round-trip exactly.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use igeo_core::{
    parallel_volume, random_spec, run_suite, DiagnosticsError, ManifoldSpec, PriorError,
    SamplePlan, SuiteConfig,
};

const SUCCESS: i32 = 0;
const FAILURE: i32 = 1;
const USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "igeo",
    version,
    about = "Dual-connection diagnostics and parallel priors for expression-defined manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a manifold file and sample-check that the metric stays SPD
    Validate(ValidateArgs),
    /// Run the identity and theorem check suite, text or JSON
    Check(CheckArgs),
    /// Integrate an alpha-parallel prior density over a lattice, CSV out
    Prior(PriorArgs),
    /// Write a deterministic random manifold file for a seed
    Random(RandomArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Manifold file
    file: PathBuf,
    /// Number of sample points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Manifold file
    file: PathBuf,
    /// Pass/fail tolerance for every check
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Number of sample points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Connection parameter to probe; repeatable, defaults to -1, 0, 1
    #[arg(long = "alpha")]
    alpha: Vec<f64>,
    /// Emit the report as JSON instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PriorArgs {
    /// Manifold file
    file: PathBuf,
    /// Connection parameter of the parallel volume form
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Per-axis lattice counts, comma separated; defaults to 20 each
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Base point with log-density zero, comma separated; defaults to
    /// the domain box center
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base: Option<Vec<f64>>,
    /// Output CSV path; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Closedness tolerance gating the integration
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Rescale the density to unit trapezoid-rule mass over the lattice
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct RandomArgs {
    /// Chart dimension, 1 through 5
    #[arg(long)]
    dim: usize,
    /// Generator seed
    #[arg(long)]
    seed: u64,
    /// Maximum total degree of the generated polynomial entries
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Coefficient amplitude; 0 degenerates to the Euclidean spec
    #[arg(long, default_value_t = 0.5)]
    amplitude: f64,
    /// Output manifold file path
    #[arg(short, long)]
    output: PathBuf,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version arrive here too; clap encodes the
            // distinction in the exit code it suggests.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Prior(args) => cmd_prior(&args),
        Command::Random(args) => cmd_random(&args),
    }
}

fn load_spec(path: &Path) -> Result<ManifoldSpec, i32> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(USAGE);
        }
    };
    ManifoldSpec::parse_str(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        USAGE
    })
}

fn usage_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    USAGE
}

/// Writes to stdout.  A closed pipe downstream is an ordinary early
/// exit, not a failure; anything else is a real write error.
fn emit(text: &str) -> i32 {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Ok(()) => SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write to stdout: {e}");
            FAILURE
        }
    }
}

fn cmd_validate(args: &ValidateArgs) -> i32 {
    if args.points == 0 {
        return usage_error("--points must be at least 1");
    }
    let spec = match load_spec(&args.file) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let report = spec.validate(SamplePlan::new(args.points, args.seed));
    let wrote = emit(&report.render_text());
    if wrote != SUCCESS {
        return wrote;
    }
    if report.passed() {
        SUCCESS
    } else {
        FAILURE
    }
}

fn cmd_check(args: &CheckArgs) -> i32 {
    if args.points == 0 {
        return usage_error("--points must be at least 1");
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return usage_error("--tol must be positive and finite");
    }
    let spec = match load_spec(&args.file) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    // Validation gates the suite: curvature on a degenerate or
    // inevaluable metric would only produce noise.
    let validation = spec.validate(SamplePlan::new(args.points, args.seed));
    if !validation.passed() {
        eprint!("{}", validation.render_text());
        return FAILURE;
    }
    let mut cfg = SuiteConfig {
        tolerance: args.tol,
        points: args.points,
        seed: args.seed,
        ..SuiteConfig::default()
    };
    if !args.alpha.is_empty() {
        cfg.alphas = args.alpha.clone();
    }
    let report = match run_suite(&spec, &cfg) {
        Ok(report) => report,
        Err(e @ DiagnosticsError::NonFiniteAlpha { .. }) => {
            eprintln!("error: {e}");
            return USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return FAILURE;
        }
    };
    let rendered = if args.json {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        json
    } else {
        report.render_text()
    };
    let wrote = emit(&rendered);
    if wrote != SUCCESS {
        return wrote;
    }
    report.exit_code()
}

fn cmd_prior(args: &PriorArgs) -> i32 {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return usage_error("--tol must be positive and finite");
    }
    if !args.alpha.is_finite() {
        return usage_error("--alpha must be finite");
    }
    let spec = match load_spec(&args.file) {
        Ok(spec) => spec,
        Err(code) => return code,
    };
    let n = spec.dim();
    let counts = args.grid.clone().unwrap_or_else(|| vec![20; n]);
    if counts.len() != n {
        return usage_error(&format!(
            "--grid lists {} counts for a {n}-dimensional chart",
            counts.len()
        ));
    }
    if counts.iter().any(|&c| c < 2) {
        return usage_error("every --grid count must be at least 2");
    }
    if let Some(base) = &args.base {
        if base.len() != n {
            return usage_error(&format!(
                "--base lists {} coordinates for a {n}-dimensional chart",
                base.len()
            ));
        }
    }
    let mut grid = match parallel_volume(&spec, args.alpha, args.base.as_deref(), &counts, args.tol)
    {
        Ok(grid) => grid,
        Err(PriorError::NotEquiaffine {
            alpha,
            residual,
            point,
            tol,
        }) => {
            eprintln!(
                "error: not equiaffine at alpha={alpha}: closedness residual {residual:.3e} \
                 at {point:?} exceeds {tol:.3e}"
            );
            return FAILURE;
        }
        Err(e @ PriorError::OutsideDomain { .. }) => {
            eprintln!("error: {e}");
            return USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return FAILURE;
        }
    };
    if args.normalize {
        let shift = grid.log_normalizer();
        for v in &mut grid.log_f {
            *v -= shift;
        }
    }
    let csv = grid.to_csv();
    match &args.output {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return FAILURE;
            }
            SUCCESS
        }
        None => emit(&csv),
    }
}

fn cmd_random(args: &RandomArgs) -> i32 {
    if !(1..=5).contains(&args.dim) {
        return usage_error("--dim must be between 1 and 5");
    }
    if args.degree > 8 {
        return usage_error("--degree must be at most 8");
    }
    if !(args.amplitude >= 0.0 && args.amplitude.is_finite()) {
        return usage_error("--amplitude must be nonnegative and finite");
    }
    let spec = random_spec(args.dim, args.seed, args.degree, args.amplitude);
    if let Err(e) = fs::write(&args.output, spec.to_file_string()) {
        eprintln!("error: cannot write {}: {e}", args.output.display());
        return FAILURE;
    }
    SUCCESS
}
