use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbv_cli::{run, RunOptions, Task};

#[derive(Parser)]
#[command(name = "gbv", version, about = "Prüfer, phase-set and spectral experiments for GBV recursion coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical set A_p and exceptional set S.
    PhaseSets(Common),
    /// Prüfer trajectories as CSV.
    PruferRun(Common),
    /// Bernstein–Szegő density probe and interval masses.
    Density(Common),
    /// Tail oscillation of log r_n on intervals.
    Convergence(Common),
    /// Growth slopes at candidate and control phases.
    Resonance(Common),
    /// Combinatorial and functional identities of the expansion coefficients.
    VerifyIdentities(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, c) = match cli.command {
        Command::PhaseSets(c) => (Task::PhaseSets, c),
        Command::PruferRun(c) => (Task::PruferRun, c),
        Command::Density(c) => (Task::Density, c),
        Command::Convergence(c) => (Task::Convergence, c),
        Command::Resonance(c) => (Task::Resonance, c),
        Command::VerifyIdentities(c) => (Task::VerifyIdentities, c),
    };
    let opts = RunOptions { config: c.config, out: c.out, seed: c.seed, threads: c.threads };
    match run(task, &opts) {
        Ok(m) => {
            println!("{} finished in {:.2} s; artifacts in {}", m.task, m.wall_time_s, opts.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
