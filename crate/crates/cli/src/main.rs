use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};
use tubeplan_cli::commands::SimulateArgs;
use tubeplan_cli::{cmd_abstract, cmd_simulate, cmd_verify};

#[derive(Parser)]
#[command(name = "tubeplan", version, about = "Tube-based LTL planning with event-triggered communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or reuse) the transition system and tube library.
    Abstract {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan for a formula and simulate the closed loop.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to runtime.steps from the config.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a logged run against its plan and formula.
    Verify {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        formula: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Abstract { config, out } => cmd_abstract(&config, &out).map(|s| {
            print!("{}", s.text);
            0
        }),
        Command::Simulate { config, cache, formula, seed, steps, out } => {
            let args = SimulateArgs { config: &config, cache: &cache, formula: &formula, seed, steps, out_dir: &out };
            cmd_simulate(&args).map(|s| {
                print!("{}", s.text);
                0
            })
        }
        Command::Verify { run, config, formula } => cmd_verify(&run, &config, &formula).map(|v| {
            println!("{v}");
            if v.passed() {
                0
            } else {
                4
            }
        }),
    };
    match result {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code());
        }
    }
}
