//! `kdiff`: generate apertures, propagate scalar or spinor fields, and analyse
//! the resulting field-grid files.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use commands::{Analysis, AnalyzeOptions};
use config::{ApertureKind, ApertureParams};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "kdiff", version, about = "Scalar and Dirac-spinor Kirchhoff diffraction")]
struct Cli {
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an aperture mask and save it as a field-grid file.
    Aperture(ApertureArgs),
    /// Run the propagation described by a config file.
    Propagate {
        config: PathBuf,
    },
    /// Derive observables or metrics from a field-grid file.
    Analyze(AnalyzeArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum KindArg {
    Circular,
    Slit,
    DoubleSlit,
    Fork,
}

#[derive(clap::Args, Debug)]
struct ApertureArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Pixels per side.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Side length of the square grid.
    #[arg(long, default_value_t = 4.0)]
    extent: f64,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    /// Slit height; the full grid when omitted.
    #[arg(long)]
    height: Option<f64>,
    /// Centre-to-centre slit separation.
    #[arg(long)]
    separation: Option<f64>,
    /// Topological charge of the fork.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    charge: i32,
    /// Fork grating period; 16 pixels when omitted.
    #[arg(long)]
    period: Option<f64>,
    #[arg(short, long, default_value = "aperture.fgrid")]
    output: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum AnalysisArg {
    Intensity,
    Phase,
    Spin,
    Winding,
    Compare,
}

#[derive(clap::Args, Debug)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    analysis: AnalysisArg,
    /// Write the derived grid here (intensity, phase, spin).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Loop centre in pixel coordinates `ix,iy`; the grid centre by default.
    #[arg(long, value_parser = parse_pair)]
    center: Option<(f64, f64)>,
    /// Loop radius in pixels.
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    /// Reference file for compare; several are averaged.
    #[arg(long = "with")]
    with: Vec<PathBuf>,
    /// Fit a global complex scale before comparing.
    #[arg(long)]
    align: bool,
    /// Spinor component used by phase and winding.
    #[arg(long, default_value_t = 0)]
    component: usize,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected 'x,y'")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Aperture(a) => {
            let kind = match a.kind {
                KindArg::Circular => ApertureKind::Circular,
                KindArg::Slit => ApertureKind::Slit,
                KindArg::DoubleSlit => ApertureKind::DoubleSlit,
                KindArg::Fork => ApertureKind::Fork,
            };
            let params = ApertureParams {
                kind,
                nx: a.grid,
                ny: a.grid,
                extent: a.extent,
                radius: a.radius,
                width: a.width,
                height: a.height,
                separation: a.separation,
                charge: a.charge,
                period: a.period,
            };
            commands::cmd_aperture(&params, &a.output)
        }
        Command::Propagate { config } => commands::cmd_propagate(&config),
        Command::Analyze(a) => {
            let analysis = match a.analysis {
                AnalysisArg::Intensity => Analysis::Intensity,
                AnalysisArg::Phase => Analysis::Phase,
                AnalysisArg::Spin => Analysis::Spin,
                AnalysisArg::Winding => Analysis::Winding,
                AnalysisArg::Compare => Analysis::Compare,
            };
            let opts = AnalyzeOptions {
                analysis,
                output: a.output,
                center: a.center,
                radius: a.radius,
                with: a.with,
                align: a.align,
                component: a.component,
            };
            commands::cmd_analyze(&a.input, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { LevelFilter::Info } else { LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
