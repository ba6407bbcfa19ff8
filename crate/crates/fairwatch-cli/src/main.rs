use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fairwatch_cli::{run, Invocation};

/// Batch experiment harness for runtime fairness monitoring and
/// enforcement over biased coin-toss processes.
#[derive(Debug, Parser)]
#[command(name = "fairwatch", version, about)]
struct Args {
    /// Experiment config file (flat `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel trials.
    #[arg(long, env = "FAIRWATCH_JOBS")]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let invocation = Invocation {
        config_path: args.config,
        seed_override: args.seed,
        out_override: args.out,
        jobs: args.jobs,
    };
    match run(&invocation) {
        Ok(summary) => {
            println!(
                "wrote {} ({} rows, config {})",
                summary.out_path.display(),
                summary.rows,
                summary.config_hash
            );
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("{error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
