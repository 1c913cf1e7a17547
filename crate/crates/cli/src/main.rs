//! nmch: a single qubit under competing Markovian (Kossakowski) noise and an
//! Ising-coupled spin environment. Computes the exact reduced dynamics, the
//! BLP/LPP/RHP/LFS non-Markovianity rates and measures, Markovianity
//! thresholds, positivity windows, phase-diagram scans and an independent
//! brute-force verification of the analytic maps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nmch_cli::{commands, CommonArgs};

#[derive(Parser)]
#[command(
    name = "nmch",
    version,
    about = "Non-Markovianity of a qubit under competing decoherence channels (J = 1 units)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial state and emit Bloch coordinates.
    Evolve(CommonArgs),
    /// Emit the four non-Markovianity rates on a time grid.
    Rates(CommonArgs),
    /// Integrate the selected non-Markovianity measures.
    Measure(CommonArgs),
    /// Emit the positivity windows of the selected measures.
    Windows(CommonArgs),
    /// Markovianity thresholds (analytic where available, plus bisection).
    Threshold(CommonArgs),
    /// Two-axis parameter sweep producing phase-diagram CSV.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Optional CSV path for the traced Markovianity boundary polyline.
        #[arg(long)]
        boundary_out: Option<PathBuf>,
    },
    /// Validate the analytic maps against the brute-force integrator.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-point trace-distance tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("NMCH_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve(a) => commands::evolve(a),
        Command::Rates(a) => commands::rates(a),
        Command::Measure(a) => commands::measure(a),
        Command::Windows(a) => commands::windows(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Scan {
            common,
            boundary_out,
        } => commands::scan(common, boundary_out.as_deref()),
        Command::Verify { common, tolerance } => commands::verify(common, *tolerance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nmch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
