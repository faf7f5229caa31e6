//! `tgeom`: runs world-function experiments described by a TOML record.
//!
//! Exit codes: 0 success, 2 config error, 3 evaluation error, 4 empty
//! result. `TGEOM_THREADS` caps the worker threads; results do not depend
//! on it.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};
use report::{Failure, Outcome};

#[derive(Debug, Parser)]
#[command(name = "tgeom", version, about = "World-function geometry experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `[output] path`. Without one the report
    /// goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[output] format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate σ(P, Q).
    Sigma(Common),
    /// Scalar product, parallelism and collinearity of two vectors.
    Parallel(Common),
    /// Sample a tube and classify its local dimension.
    Tube(Common),
    /// Check the four Euclidean conditions on a point cloud.
    Conditions(Common),
    /// Parallel transport of a covector along polyline routes.
    Transport(Common),
    /// Compare the tube with the line cut out by auxiliary surfaces.
    CompareDefs(Common),
}

type Runner = fn(&RunConfig) -> Result<Outcome, Failure>;

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    let mut cfg = config::parse(&text).map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(format) = common.format {
        cfg.output.format = format;
    }
    Ok(cfg)
}

fn threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("TGEOM_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("TGEOM_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn run(name: &str, common: &Common, runner: Runner) -> Result<(), Failure> {
    threads()?;
    let cfg = load(common)?;
    let outcome = runner(&cfg)?;
    report::emit(name, &cfg, outcome, cfg.output.path.as_ref(), cfg.output.format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, runner): (&str, &Common, Runner) = match &cli.command {
        Command::Sigma(c) => ("sigma", c, commands::sigma),
        Command::Parallel(c) => ("parallel", c, commands::parallel),
        Command::Tube(c) => ("tube", c, commands::tube),
        Command::Conditions(c) => ("conditions", c, commands::conditions),
        Command::Transport(c) => ("transport", c, commands::transport),
        Command::CompareDefs(c) => ("compare-defs", c, commands::compare),
    };
    match run(name, common, runner) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tgeom {name}: {}", f.message());
            f.exit_code()
        }
    }
}
