//! Command-line front end: parses flags (optionally seeded from a `key=value`
//! config file), runs one experiment on a worker pool and writes a CSV table
//! plus a JSON summary.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

pub use commands::Outcome;

/// Exit status for flagged non-convergence under `--strict`.
pub const EXIT_NOT_CONVERGED: i32 = 3;
/// Exit status for invalid flags or parameters.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] oscillax::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not converged: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(oscillax::Error::InvalidParameter(_)) | CliError::Core(oscillax::Error::Domain(_)) => {
                EXIT_USAGE
            }
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            _ => 1,
        }
    }
}

const CSV_HELP: &str = "\
CSV columns (header row, comma separated, values as {:.15e}):
  eval, eval-grid   r,t,re,im,abs
  transform         rho,hankel[,oracle,rel_err]
  oracle-compare    r,t,radial_re,radial_im,oracle_re,oracle_im,abs_err
  sweep             family,N,s,range,range_norm,sobolev_norm,Q,A,converged
  kernel            x,K
  split-check       sample,recompose_residual,split_residual,remainder_ratio,bound
  bessel-check      rho,j,main_term,scaled_remainder

With --out-dir the table goes to <dir>/<command>.csv and the summary to
<dir>/<command>.json; otherwise the table goes to stdout and the summary to
stderr. A config file holds one key=value per line, keys being flag names
without the leading dashes; flags given on the command line take precedence.
OSCILLAX_WORKERS sets the worker count when --workers is absent.";

#[derive(Debug, Parser)]
#[command(name = "oscillax", version, about = "Maximal oscillatory integrals of radial functions", after_help = CSV_HELP)]
pub struct Cli {
    /// key=value file whose entries are read as flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize, Clone)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// Directory for <command>.csv and <command>.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Exit with status 3 when any result is flagged as not converged.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads.
    #[arg(long, env = "OSCILLAX_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S^a f at one point (r, t).
    #[command(args_override_self = true)]
    Eval(commands::EvalArgs),
    /// S^a f on a grid of radii and times.
    #[command(args_override_self = true)]
    EvalGrid(commands::EvalGridArgs),
    /// Radial Fourier transform, optionally against the Cartesian oracle.
    #[command(args_override_self = true)]
    Transform(commands::TransformArgs),
    /// Ratio sweep over scales N and regularities s with fitted exponents.
    #[command(args_override_self = true)]
    Sweep(commands::SweepArgs),
    /// Samples of the kernel K_{mμ} and its L¹ estimate.
    #[command(args_override_self = true)]
    Kernel(commands::KernelArgs),
    /// Recomposition residuals and the explicit remainder bound on random inputs.
    #[command(args_override_self = true)]
    SplitCheck(commands::SplitCheckArgs),
    /// Asymptotic certificate for J_λ.
    #[command(args_override_self = true)]
    BesselCheck(commands::BesselCheckArgs),
    /// Bessel-reduced S^a f against two-dimensional Cartesian quadrature.
    #[command(args_override_self = true)]
    OracleCompare(commands::OracleCompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::EvalGrid(_) => "eval-grid",
            Command::Transform(_) => "transform",
            Command::Sweep(_) => "sweep",
            Command::Kernel(_) => "kernel",
            Command::SplitCheck(_) => "split-check",
            Command::BesselCheck(_) => "bessel-check",
            Command::OracleCompare(_) => "oracle-compare",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Eval(a) => &a.common,
            Command::EvalGrid(a) => &a.common,
            Command::Transform(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Kernel(a) => &a.common,
            Command::SplitCheck(a) => &a.common,
            Command::BesselCheck(a) => &a.common,
            Command::OracleCompare(a) => &a.common,
        }
    }

    fn config_echo(&self) -> Value {
        let v = match self {
            Command::Eval(a) => serde_json::to_value(a),
            Command::EvalGrid(a) => serde_json::to_value(a),
            Command::Transform(a) => serde_json::to_value(a),
            Command::Sweep(a) => serde_json::to_value(a),
            Command::Kernel(a) => serde_json::to_value(a),
            Command::SplitCheck(a) => serde_json::to_value(a),
            Command::BesselCheck(a) => serde_json::to_value(a),
            Command::OracleCompare(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }

    fn execute(&self) -> Result<Outcome, CliError> {
        match self {
            Command::Eval(a) => commands::eval(a),
            Command::EvalGrid(a) => commands::eval_grid(a),
            Command::Transform(a) => commands::transform(a),
            Command::Sweep(a) => commands::sweep(a),
            Command::Kernel(a) => commands::kernel(a),
            Command::SplitCheck(a) => commands::split_check(a),
            Command::BesselCheck(a) => commands::bessel_check(a),
            Command::OracleCompare(a) => commands::oracle_compare(a),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run(args: Vec<String>) -> i32 {
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_command(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = common.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start workers: {e}")))?;
    let outcome = pool.install(|| cmd.execute())?;

    let mut summary = Map::new();
    summary.insert("command".into(), Value::from(cmd.name()));
    summary.insert("version".into(), Value::from(oscillax::VERSION));
    summary.insert("config".into(), cmd.config_echo());
    summary.insert("converged".into(), Value::from(outcome.converged));
    summary.insert("results".into(), outcome.results);
    let json = serde_json::to_string_pretty(&Value::Object(summary)).expect("summary serializes");

    match &common.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.csv", cmd.name())), &outcome.csv)?;
            std::fs::write(dir.join(format!("{}.json", cmd.name())), json + "\n")?;
        }
        None => {
            std::io::stdout().write_all(outcome.csv.as_bytes())?;
            eprintln!("{json}");
        }
    }
    if common.strict && !outcome.converged {
        return Err(CliError::NotConverged(format!("{} reported unconverged results", cmd.name())));
    }
    Ok(())
}
