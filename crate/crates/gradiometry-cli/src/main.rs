//! Batch front-end: parse a run configuration, execute the sweep (or the
//! validation suite), and emit curve data as CSV or JSON.
//!
//! Exit codes: 0 on success, 1 on validation or computation failure, 2 on
//! configuration errors.

mod config;
mod output;
mod report;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Mode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gradiometry",
    version,
    about = "Collective-spin moment dynamics and gradient-estimation precision for singlet states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the analytic chain-singlet moments over Θ
    Chain(RunArgs),
    /// Sweep the density-profile moments over Θ
    Profile(RunArgs),
    /// Sweep the locally depolarized moments over Θ
    Noise(RunArgs),
    /// Sweep the spin-j second moment and Gaussian-assumption precision
    Spinj(RunArgs),
    /// Run the exact-simulation validation suite
    Validate(ValidateArgs),
    /// Compare two emitted CSV curves pointwise
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (INI-style key = value sections)
    #[arg(long)]
    config: PathBuf,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Worker threads for the Θ sweep; defaults to the available cores
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    /// First curve file
    #[arg(long)]
    a: PathBuf,
    /// Second curve file
    #[arg(long)]
    b: PathBuf,
    /// Maximum absolute deviation accepted per column
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Chain(args) => sweep(Mode::Chain, args),
        Command::Profile(args) => sweep(Mode::Profile, args),
        Command::Noise(args) => sweep(Mode::Noise, args),
        Command::Spinj(args) => sweep(Mode::Spinj, args),
        Command::Validate(args) => validate(args),
        Command::Compare(args) => compare(args),
    }
}

fn sweep(mode: Mode, args: RunArgs) -> Result<i32, CliError> {
    let config = config::load_config(&args.config, mode)?;
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    let result = run::execute(&config, threads)?;
    let write = |w: &mut dyn std::io::Write| match args.format {
        Format::Csv => output::write_csv(w, &config.echo, &result),
        Format::Json => output::write_json(w, &config.echo, &result),
    };
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut buffered = std::io::BufWriter::new(file);
            write(&mut buffered)?;
        }
        None => {
            let stdout = std::io::stdout();
            write(&mut stdout.lock())?;
        }
    }
    Ok(0)
}

fn validate(args: ValidateArgs) -> Result<i32, CliError> {
    let config = config::load_config(&args.config, Mode::OracleValidate)?;
    let report = report::oracle_validation(config.particles, args.seed)?;
    println!("{report}");
    Ok(if report.passed() { 0 } else { 1 })
}

fn compare(args: CompareArgs) -> Result<i32, CliError> {
    let a = output::read_csv_file(&args.a)?;
    let b = output::read_csv_file(&args.b)?;
    let report = report::compare_curves(&a, &b, args.tol)?;
    println!("{report}");
    Ok(if report.passed() { 0 } else { 1 })
}
