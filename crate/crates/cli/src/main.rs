//! `dpplab`: sampling, curve estimation, extraction and verification from the
//! command line.
//!
//! Exit codes: 0 pass, 1 failed verification or runtime error, 2 usage error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpplab::samplers::{DecorationSpec, ShiftSpec};
use dpplab::suite::Matrix;
use dpplab::{Error, TestFunction};

use config::{
    parse_decoration, parse_function, parse_grid, parse_shift, GridSpec, OutputOptions, RunConfig,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::UnknownCheck(_)
            | Error::Domain { .. }
            | Error::Faithfulness { .. }
            | Error::ParticleBudgetExceeded { .. }
            | Error::BudgetExceeded(_)
            | Error::TooFewSamples { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Run(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

#[derive(Parser)]
#[command(
    name = "dpplab",
    version,
    about = "Decorated Poisson point processes: sampling, Laplace curves, extraction and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replicates per curve or check.
    #[arg(long, global = true)]
    n_reps: Option<usize>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replace existing output files.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Args, Default)]
struct ProcessArgs {
    /// Intensity rate of `e^{-cx} dx`.
    #[arg(long)]
    c: Option<f64>,
    /// dirac | finite:0,-0.7 | geometric:p,rate,radius | JSON.
    #[arg(long, value_parser = parse_decoration)]
    decoration: Option<DecorationSpec>,
    /// none | constant:z | gumbel:c | normal:mean,sd | JSON.
    #[arg(long, value_parser = parse_shift)]
    shift: Option<ShiftSpec>,
    /// Lowest observed position.
    #[arg(long, allow_hyphen_values = true)]
    observe_low: Option<f64>,
}

#[derive(Args, Default)]
struct CurveArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// max | exp:beta | indicator:lo,hi[,level] | bump:center,half_width,height | JSON.
    #[arg(long, value_parser = parse_function, allow_hyphen_values = true)]
    f: Option<TestFunction>,
    /// lo,hi,n
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<GridSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Write configurations as newline-delimited JSON.
    Sample {
        #[command(flatten)]
        process: ProcessArgs,
        /// Number of configurations.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimate a Laplace curve `y -> E exp(-sum f(x - y))` as CSV.
    Curve(CurveArgs),
    /// Fit a Laplace curve to a Gumbel translate.
    TauFit(CurveArgs),
    /// Extract `(overshoot, decoration)` pairs above a level.
    Extract {
        #[command(flatten)]
        process: ProcessArgs,
        /// Conditioning level.
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        /// Retained depth below the maximum.
        #[arg(long)]
        window_depth: Option<f64>,
        /// Accepted samples.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a named check, or `all`.
    Verify {
        check: String,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        /// default | small
        #[arg(long, value_parser = parse_matrix)]
        matrix: Option<Matrix>,
    },
    /// Branching Brownian motion.
    Bbm {
        #[command(subcommand)]
        command: BbmCommand,
    },
}

#[derive(Subcommand)]
enum BbmCommand {
    /// Median-centered partition-function waves as CSV.
    Wave {
        /// Terminal time.
        #[arg(long)]
        t: Option<f64>,
        /// Inverse temperatures, comma separated.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// lo,hi,n
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Option<GridSpec>,
    },
}

fn parse_matrix(s: &str) -> Result<Matrix, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl ProcessArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            c: self.c,
            decoration: self.decoration,
            shift: self.shift,
            observe_low: self.observe_low,
            ..Default::default()
        }
    }
}

impl CurveArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            f: self.f,
            grid: self.grid,
            ..self.process.into_config()
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(k) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set workers: {e}")))?;
    }
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let globals = RunConfig {
        seed: cli.seed,
        n_reps: cli.n_reps,
        ..Default::default()
    };
    let out = OutputOptions {
        out: cli.out,
        force: cli.force,
    };
    let (name, flags) = match cli.command {
        Command::Sample { process, n } => (
            "sample",
            RunConfig {
                n,
                ..process.into_config()
            },
        ),
        Command::Curve(a) => ("curve", a.into_config()),
        Command::TauFit(a) => ("tau-fit", a.into_config()),
        Command::Extract {
            process,
            y,
            window_depth,
            n,
        } => (
            "extract",
            RunConfig {
                y,
                window_depth,
                n,
                ..process.into_config()
            },
        ),
        Command::Verify {
            ref check,
            c,
            y,
            matrix,
        } => {
            let flags = RunConfig {
                c,
                y,
                matrix,
                ..Default::default()
            };
            file.check_command("verify")?;
            let cfg = file.overlay(globals).overlay(flags);
            return commands::verify(check, cfg, &out);
        }
        Command::Bbm {
            command: BbmCommand::Wave { t, betas, grid },
        } => (
            "bbm wave",
            RunConfig {
                t,
                betas,
                grid,
                ..Default::default()
            },
        ),
    };
    file.check_command(name)?;
    let cfg = file.overlay(globals).overlay(flags);
    match name {
        "sample" => commands::sample(cfg, &out),
        "curve" => commands::curve(cfg, &out),
        "tau-fit" => commands::tau_fit(cfg, &out),
        "extract" => commands::extract(cfg, &out),
        _ => commands::bbm_wave(cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
