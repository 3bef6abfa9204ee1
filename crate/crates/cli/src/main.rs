//! `polyknot`: thickness, tube, HOMFLY and perturbation experiments on
//! polygonal knots from the command line.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "polyknot", version, about = "Thickness and local knotting of polygonal knots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct HostArgs {
    /// Knot file to perturb.
    #[arg(long)]
    pub host: Option<std::path::PathBuf>,
    /// Use the regular n-gon with circumradius 1.
    #[arg(long)]
    pub ngon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a regular n-gon knot file.
    GenNgon {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, conflicts_with = "edge")]
        circumradius: f64,
        /// Scale so that every edge has this length.
        #[arg(long)]
        edge: Option<f64>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// MinRad, critical self-distances, thickness radius and ropelength.
    Thickness {
        knot: std::path::PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Coalescence thresholds of an equilateral polygon.
    Thresholds {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Decide whether the radius-r tube is embedded.
    TubeCheck {
        knot: std::path::PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Also write boundary samples of the tube cells as CSV.
        #[arg(long)]
        boundary: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 64)]
        per_cell: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// HOMFLY polynomial and knot class of a polygon.
    Homfly {
        knot: std::path::PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tally knot types of random vertex perturbations.
    Perturb {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Perturbation tallies over a list of radii.
    ScanRadius {
        #[command(flatten)]
        host: HostArgs,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Perturbation tallies of several hosts, each at its own thickness.
    ScanEdges {
        /// Regular n-gons, comma-separated.
        #[arg(long, value_delimiter = ',', required_unless_present = "hosts")]
        ngons: Vec<usize>,
        /// Knot files, comma-separated.
        #[arg(long, value_delimiter = ',')]
        hosts: Vec<std::path::PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Reduce the ropelength of an equilateral polygon.
    Anneal {
        #[arg(long)]
        input: std::path::PathBuf,
        #[arg(long, default_value_t = 150)]
        epochs: usize,
        #[arg(long, default_value_t = 400)]
        moves: usize,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 0.95)]
        cooling: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent chains with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        chains: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: std::path::PathBuf,
        /// Progress log as CSV.
        #[arg(long)]
        log: Option<std::path::PathBuf>,
    },
    /// Fit decay curves to an edge-scan CSV.
    Fit {
        #[arg(long)]
        input: std::path::PathBuf,
        /// Knot label whose frequency is fitted.
        #[arg(long, default_value = "Unknot")]
        label: String,
        /// Also map this label's series onto the fitted one by equal
        /// probability and fit the correspondence with a line.
        #[arg(long)]
        against: Option<String>,
        /// Fitted-curve samples as CSV.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
