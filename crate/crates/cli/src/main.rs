use clap::Parser;
use cli::{execute, Overrides, Precision};
use std::path::PathBuf;

/// Batch verifications of Stokes data: classical, Poisson, order-ħ quantum
/// and isomonodromic. Exit 0 = all residuals in tolerance, 1 = tolerance
/// failure, 2 = invalid input.
#[derive(Parser, Debug)]
#[command(name = "stokeslab", version)]
struct Args {
    /// One of: stokes, factors, monodromy, stokes-map, poisson-verify,
    /// twist-order1, quantum-stokes-order1, scl-check, iso-flow, pde-check,
    /// duality. Falls back to the config's "command".
    command: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json, plot.csv and command-specific CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies every tolerance and the integrator tolerances.
    #[arg(long)]
    tol_scale: Option<f64>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
}

fn main() {
    let a = Args::parse();
    let code = execute(&Overrides { command: a.command, config: a.config, out: a.out, seed: a.seed, tol_scale: a.tol_scale, precision: a.precision });
    std::process::exit(code);
}
