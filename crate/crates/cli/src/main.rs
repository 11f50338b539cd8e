//! `seslab`: reproducible experiments on scale-equivariant steerable convolutions.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
const THREADS_ENV: &str = "SESLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "seslab", version, about = "Scale-equivariant steerable convolution experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed; overrides seeds in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for outputs and the echoed effective config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Report format for tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// JSON config for the subcommand; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a multi-scale Hermite-Gaussian basis and write it as a tensor with a JSON sidecar.
    Basis(commands::basis::BasisArgs),
    /// Warp a PGM image by a planar projective map, its scale approximation, or a log-polar transform.
    Warp(commands::warp::WarpArgs),
    /// Log-polar round-trip SSIM over image heights and upscaling factors.
    SsimSweep(commands::sweep::SweepArgs),
    /// Scale-equivariance error of SES and vanilla stacks per block and scale factor.
    Equiv(commands::equiv::EquivArgs),
    /// Run the fast invariant checks.
    Selftest(commands::selftest::SelftestArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::runtime(format!("cannot configure {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Basis(args) => commands::basis::run(&cli.global, args),
        Command::Warp(args) => commands::warp::run(&cli.global, args),
        Command::SsimSweep(args) => commands::sweep::run(&cli.global, args),
        Command::Equiv(args) => commands::equiv::run(&cli.global, args),
        Command::Selftest(args) => commands::selftest::run(&cli.global, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print and succeed; real parse errors exit 2.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
