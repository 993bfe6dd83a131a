use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collab_incentives::bench::{load_scenario, run, BenchError, Experiment, RunOptions};

/// Experiment runner for collaborative-learning incentive mechanisms.
#[derive(Parser)]
#[command(name = "collab-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full-information contribution scheme
    Scheme(Common),
    /// Pure Nash enumeration and best-response dynamics of the naive game
    Game(Common),
    /// VCG transfers and the positive-payment witness
    Vcg(Common),
    /// Monte Carlo check of the verification mechanism
    Verify(Common),
    /// Type-estimation coverage on synthetic classification data
    Estimate(Common),
    /// Parameter sweep over J, eta or q
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory
    #[arg(long, env = "COLLAB_BENCH_OUT", default_value = "bench-out")]
    out: PathBuf,
    /// Overrides `mc.seed`
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    workers: Option<usize>,
}

fn execute(experiment: Experiment, args: &Common) -> Result<Vec<PathBuf>, BenchError> {
    let scenario = load_scenario(&args.scenario)?;
    let report = run(&scenario, experiment, RunOptions { seed: args.seed, workers: args.workers })?;
    report.write_to(&args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Scheme(a) => (Experiment::Scheme, a),
        Command::Game(a) => (Experiment::Game, a),
        Command::Vcg(a) => (Experiment::Vcg, a),
        Command::Verify(a) => (Experiment::Verify, a),
        Command::Estimate(a) => (Experiment::Estimate, a),
        Command::Sweep(a) => (Experiment::Sweep, a),
    };
    match execute(experiment, args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("collab-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
