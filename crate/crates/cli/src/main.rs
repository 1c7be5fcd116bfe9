use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use chemo_cli::{execute, load_config, Scenario};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chemo", version, about = "Nonlocal Keller-Segel simulator and verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single PDE run.
    Simulate(RunArgs),
    /// PDE run with the comparison pair integrated alongside.
    Sandwich(RunArgs),
    /// Comparison ODE only.
    Ode(RunArgs),
    /// Regime classification over a parameter grid.
    Sweep(RunArgs),
    /// Blow-up probe over one or more λ values.
    Probe(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let (scenario, args) = match cli.command {
        Command::Simulate(a) => (Scenario::Simulate, a),
        Command::Sandwich(a) => (Scenario::Sandwich, a),
        Command::Ode(a) => (Scenario::Ode, a),
        Command::Sweep(a) => (Scenario::Sweep, a),
        Command::Probe(a) => (Scenario::Probe, a),
    };
    let mut cfg = load_config(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if cfg.scenario != scenario {
        bail!(
            "config scenario is `{}` but the `{}` subcommand was used",
            cfg.scenario.name(),
            scenario.name()
        );
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let ex = execute(&cfg, &args.out)?;
    for path in &ex.csv {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", ex.json.display());
    Ok(ex.outcome.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
