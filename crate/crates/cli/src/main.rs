#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helmwave::io::write_atomic;
use helmwave::validation::Suite;
use helmwave::{Error, Result};

use commands::Outcome;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "helmwave",
    version,
    about = "Meshfree series solutions of transient scalar PDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output.path`. Data goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Helmholtz eigenvalues and eigenfunctions of the geometry.
    Eigs(Common),
    /// Radial wavelet expansion of a function or of samples.
    Expand(Common),
    /// Solve the transient problem and tabulate u(x, t).
    Solve(Common),
    /// Forward continuous transform of a function.
    Transform(Common),
    /// Run the built-in validation criteria.
    Validate {
        /// `fast` or `full`.
        #[arg(long, default_value = "fast")]
        suite: String,
        /// Random seed; overrides the config `seed` (default 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Optional run configuration supplying `seed`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::EmptySpectrum => 3,
        Error::Parse { .. }
        | Error::Parameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidNode { .. }
        | Error::InvalidGeometry(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn fail(code: &str, field: &str, message: &str) {
    eprintln!("error: {code}: {field}");
    eprintln!("{message}");
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("HELMWAVE_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::param("HELMWAVE_THREADS", format!("expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::param("HELMWAVE_THREADS", e.to_string()))
}

fn run(command: Command) -> Result<Outcome> {
    init_threads()?;
    let (common, f): (Common, fn(&RunConfig) -> Result<Outcome>) = match command {
        Command::Validate {
            suite,
            seed,
            config,
            out,
        } => {
            let suite: Suite = suite.parse()?;
            let seed = match (seed, config) {
                (Some(s), _) => s,
                (None, Some(path)) => RunConfig::load(&path)?.seed().unwrap_or(42),
                (None, None) => 42,
            };
            let mut outcome = commands::validate(suite, seed)?;
            outcome.default_path = out.map(|p| p.to_string_lossy().into_owned());
            return Ok(outcome);
        }
        Command::Eigs(c) => (c, commands::eigs),
        Command::Expand(c) => (c, commands::expand),
        Command::Solve(c) => (c, commands::solve),
        Command::Transform(c) => (c, commands::transform),
    };
    let cfg = RunConfig::load(&common.config)?;
    let mut outcome = f(&cfg)?;
    outcome.default_path = match common.out {
        Some(p) => Some(p.to_string_lossy().into_owned()),
        None => outcome
            .default_path
            .map(|p| cfg.resolve(&p).to_string_lossy().into_owned()),
    };
    Ok(outcome)
}

fn emit(outcome: &Outcome) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match &outcome.default_path {
        Some(path) => {
            write_atomic(path.as_ref(), outcome.data.as_bytes())?;
            stdout.write_all(outcome.report.as_bytes())?;
        }
        None => {
            stdout.write_all(outcome.data.as_bytes())?;
            if !outcome.data.is_empty() && !outcome.data.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            eprint!("{}", outcome.report);
        }
    }
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            fail("usage", "-", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    let result = run(cli.command).and_then(|outcome| emit(&outcome).map(|_| outcome.status));
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(3) => {
            fail(
                "empty-spectrum",
                "eigensolver.lambda_range",
                "no eigenvalues found in the requested range",
            );
            ExitCode::from(3)
        }
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            fail(e.code(), &e.field(), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
    }
}
