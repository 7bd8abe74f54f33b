use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use strongchain::harness::{
    cmd_analyze, cmd_demo_mine, cmd_reproduce, cmd_simulate, AnalyzeOptions, DemoOptions,
    HarnessError, PresetOptions,
};

#[derive(Parser)]
#[command(
    name = "strongchain",
    version,
    about = "Weak-header proof-of-work simulator and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML config and write a CSV row.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reward-variance curves and the pool-size table.
    Analyze {
        #[arg(long, default_value_t = 1024.0)]
        ratio: f64,
        #[arg(long, default_value_t = 10.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-4)]
        alpha_min: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Output directory; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset experiment (or `all`) and check it against reference values.
    Reproduce {
        preset: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Larger horizons and parameter grids.
        #[arg(long)]
        full: bool,
    },
    /// Mine a toy chain with real hashing and validate every block.
    DemoMine {
        #[arg(long, default_value_t = 12)]
        bits: u32,
        #[arg(long, default_value_t = 3)]
        blocks: u32,
        #[arg(long, default_value_t = 8)]
        ratio: u64,
        #[arg(long, default_value_t = 3)]
        gamma: u64,
        #[arg(long, default_value_t = 1 << 26)]
        budget: u64,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            cmd_simulate(&config, seed, out.as_deref())?;
        }
        Command::Analyze {
            ratio,
            gamma,
            alpha_min,
            alpha_max,
            points,
            out,
        } => {
            let opts = AnalyzeOptions {
                ratio,
                gamma,
                alpha_min,
                alpha_max,
                points,
            };
            let (cov, pools) = cmd_analyze(&opts, out.as_deref())?;
            if out.is_none() {
                // A closed pipe (e.g. `| head`) is not an error.
                let _ = write!(std::io::stdout(), "{cov}\n{pools}");
            }
        }
        Command::Reproduce {
            preset,
            out,
            seed,
            full,
        } => {
            let opts = PresetOptions { seed, full };
            let result = cmd_reproduce(&preset, &out, &opts);
            // Reports are written either way; print them from disk so a
            // tolerance failure still shows every line.
            let names: Vec<String> = if preset == "all" {
                strongchain::harness::PRESETS
                    .iter()
                    .map(|s| s.to_string())
                    .collect()
            } else {
                vec![preset]
            };
            for n in names {
                if let Ok(text) = std::fs::read_to_string(out.join(&n).join("report.txt")) {
                    let _ = write!(std::io::stdout(), "{text}");
                }
            }
            result?;
        }
        Command::DemoMine {
            bits,
            blocks,
            ratio,
            gamma,
            budget,
        } => {
            let opts = DemoOptions {
                difficulty_bits: bits,
                blocks,
                ratio,
                gamma,
                nonce_budget: budget,
                ..DemoOptions::default()
            };
            cmd_demo_mine(&opts, &mut std::io::stdout())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
