use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rlqaoa::checkpoint::Checkpoint;
use rlqaoa::run::run_experiment;
use rlqaoa::sweep::{default_workers, run_scan, run_sweep};
use rlqaoa::verify::{render, run_verify, Faults};
use rlqaoa::{CliError, CliResult, ExperimentConfig};

/// Log verbosity, in `env_logger` filter syntax.
const LOG_ENV: &str = "RLQAOA_LOG";

#[derive(Parser)]
#[command(name = "rlqaoa", version, about = "Ground-state preparation with RL-QAOA and its baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// TOML experiment file; built-in defaults fill everything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory, replacing `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(self.config.as_deref(), &self.overrides)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured algorithm once.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the cross product of the sweep axes; completed cells are skipped.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Concurrent cells; defaults to the number of available cores.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Adiabatic, QAOA and CD-QAOA ratios against protocol duration.
    AdiabaticScan {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Greedy protocol and noise-free ratio of a checkpoint, as JSON.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run the self-check suite.
    Verify {
        /// Plant a fault to confirm it is caught.
        #[arg(long, value_parser = ["mask"])]
        inject_fault: Option<String>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { cfg, seed } => {
            let mut cfg = cfg.load()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let s = run_experiment(&cfg, &cfg.output_dir)?;
            println!("{} seed {}: best clean ratio {:.6}, final {:.6}", s.algorithm, s.seed, s.best_clean_ratio, s.final_greedy_ratio);
        }
        Command::Sweep { cfg, workers } => {
            let cfg = cfg.load()?;
            let rows = run_sweep(&cfg, &cfg.output_dir, workers.unwrap_or_else(default_workers))?;
            println!("{} cells written to {}", rows.len(), cfg.output_dir.join(rlqaoa::sweep::RESULTS_FILE).display());
        }
        Command::AdiabaticScan { cfg } => {
            let cfg = cfg.load()?;
            for r in run_scan(&cfg, &cfg.output_dir)? {
                println!("{:<10} T={:<6} {:.6}", r.method, r.total_t, r.ratio);
            }
        }
        Command::Evaluate { checkpoint } => {
            let e = Checkpoint::load(&checkpoint)?.evaluate()?;
            println!("{}", serde_json::to_string_pretty(&e).map_err(|e| CliError::Run(e.to_string()))?);
        }
        Command::Verify { inject_fault } => {
            let results = run_verify(Faults { broken_mask: inject_fault.is_some() });
            print!("{}", render(&results));
            if results.iter().any(|r| !r.passed) {
                return Err(CliError::Verify("see the table above".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
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
