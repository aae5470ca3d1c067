use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cqed_cli::{cmd_budget, cmd_design, cmd_fit, cmd_simulate, cmd_verify, CliError, Options};

/// Design, budget, simulate and fit multilayer circuit-QED devices.
#[derive(Parser, Debug)]
#[command(name = "cqed", version)]
struct Cli {
    /// Run configuration (TOML); the bundled device config when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Base noise seed; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads for independent protocols (0 = all cores).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coupling, transmon spectrum and dispersive shifts from the circuit section.
    Design,
    /// Seam and channel lifetime budget as JSON.
    Budget,
    /// Simulate a configured protocol (or `all`) and fit its trace.
    Simulate { name: String },
    /// Fit a model to a trace CSV.
    Fit { file: PathBuf, model: String },
    /// Run the acceptance checks.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let opts = Options { config: cli.config, out: cli.out, seed: cli.seed, jobs: cli.jobs };
    match cli.command {
        Command::Design => cmd_design(&opts).map(drop),
        Command::Budget => cmd_budget(&opts).map(drop),
        Command::Simulate { name } => cmd_simulate(&opts, &name).map(drop),
        Command::Fit { file, model } => cmd_fit(&opts, &file, &model).map(drop),
        Command::Verify => cmd_verify(&opts).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
