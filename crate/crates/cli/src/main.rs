mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use prandtl4_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "prandtl4",
    version,
    about = "Clamped biharmonic heat kernel and blow-up solver"
)]
struct Cli {
    /// Flat JSON configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `outputDir` from the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for operator assembly and application.
    #[arg(long, global = true, env = "RAYON_NUM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate kernel values and scaled row L1 norms.
    KernelTable,
    /// Check the semigroup properties numerically and write a JSON report.
    Verify,
    /// Evolve a datum and write snapshots, diagnostics and a plot.
    Evolve,
    /// Reproduce the blow-up figure for the default bump.
    Figure1,
}

/// A numerical property check that did not hold.
#[derive(Debug)]
pub struct PropertyFailure(pub String);

impl std::fmt::Display for PropertyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "property check failed: {}", self.0)
    }
}

impl std::error::Error for PropertyFailure {}

const EXIT_PROPERTY: u8 = 1;
const EXIT_QUADRATURE: u8 = 2;
const EXIT_COMPATIBILITY: u8 = 3;
const EXIT_INVALID: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<PropertyFailure>().is_some() {
            return EXIT_PROPERTY;
        }
        match cause.downcast_ref::<Error>() {
            Some(Error::QuadratureNotConverged { .. } | Error::TailNotNegligible { .. }) => return EXIT_QUADRATURE,
            Some(Error::CompatibilityViolated { .. }) => return EXIT_COMPATIBILITY,
            _ => {}
        }
    }
    EXIT_INVALID
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = cli.output {
        cfg.output_dir = dir;
    }
    output::ensure_dir(&cfg.output_dir)?;
    match cli.command {
        Command::KernelTable => commands::kernel_table(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Figure1 => commands::figure1(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
