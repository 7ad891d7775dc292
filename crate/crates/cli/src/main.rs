//! `amoeba-lab`: Newton polygons, real amoeba tracing, Gauss fibers, total
//! curvature, Harnack classification and amoeba rasters from the command line.
//!
//! Results go to stdout (or `--out`) as JSON; diagnostics go to stderr as one
//! JSON object. Exit codes are listed in [`failure`].

mod commands;
mod config;
mod failure;
mod json;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommonArgs, Format, RunConfig};
use failure::{Failure, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "amoeba-lab", version, about = "Real amoebas and simple Harnack curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Newton polygon, area, interior and boundary lattice points.
    Newton(CommonArgs),
    /// Real amoeba arcs in the log window (json, csv or svg).
    Trace(CommonArgs),
    /// Total absolute curvature of the traced arcs against 2 pi vol.
    Curvature(CommonArgs),
    /// Logarithmic Gauss map fibers over sampled directions.
    Fibers {
        #[command(flatten)]
        common: CommonArgs,
        /// Solve only the fiber over this direction.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
    },
    /// Simple Harnack verdict; exit 0 Harnack, 1 not Harnack, 2 inconclusive.
    Classify(CommonArgs),
    /// Amoeba raster over the log window (json or svg).
    Raster(CommonArgs),
    /// Consolidated JSON report of every stage.
    Report(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Newton(c)
            | Command::Trace(c)
            | Command::Curvature(c)
            | Command::Classify(c)
            | Command::Raster(c)
            | Command::Report(c) => c,
            Command::Fibers { common, .. } => common,
        }
    }
}

fn init_pool(threads: Option<usize>) -> Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build_global().map_err(|e| Failure::pipeline("thread pool", e))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let cfg = RunConfig::resolve(cli.command.common(), Format::Json)?;
    init_pool(cfg.threads)?;
    match &cli.command {
        Command::Newton(_) => commands::newton(&cfg),
        Command::Trace(_) => commands::trace(&cfg),
        Command::Curvature(_) => commands::curvature(&cfg),
        Command::Fibers { theta, .. } => commands::fibers(&cfg, *theta),
        Command::Classify(_) => commands::classify(&cfg),
        Command::Raster(_) => commands::raster(&cfg),
        Command::Report(_) => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", Failure::usage(e.to_string().trim_end()).diagnostic());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("{}", f.diagnostic());
            ExitCode::from(f.code as u8)
        }
    }
}
