use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nonlocal_lab::runner::{main_entry, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "nonlocal-lab",
    version,
    about = "Config-driven experiments for nonlocal parabolic equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: ./out, or output.dir from the config].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Global seed [default: the config's seed, else 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Solve the scenario and write the solution and diagnostics.
    Run,
    /// Solve and evaluate the listed measurements.
    Verify,
    /// Harnack-type measurements over a cartesian sweep of bump data.
    Sweep,
    /// Certify the non-Hölder solution driven by an L¹ but not L^{1+γ} tail.
    Counterexample,
    /// Shrinking far-ball family for the axes measure.
    Axes,
}

fn main() {
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config PATH is required");
        std::process::exit(2);
    };
    let cmd = match cli.command {
        Cmd::Run => Command::Run,
        Cmd::Verify => Command::Verify,
        Cmd::Sweep => Command::Sweep,
        Cmd::Counterexample => Command::Counterexample,
        Cmd::Axes => Command::Axes,
    };
    let opts = RunOptions {
        config,
        out: cli.out,
        threads: cli.threads,
        seed: cli.seed,
    };
    std::process::exit(main_entry(cmd, &opts));
}
