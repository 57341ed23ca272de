//! Experiment harness around `rlqaoa-core`: TOML configuration, CSV and
//! JSON artifacts, sweeps, the protocol-duration scan and self-checks.
//!
//! Files written by a run directory:
//! - `config.toml`: the effective configuration.
//! - `train_log.csv`: one row per iteration, see [`logs::LogRow`].
//! - `checkpoint_best.json`, `checkpoint_latest.json`: see [`checkpoint::Checkpoint`].
//! - `summary.json`: see [`run::Summary`].

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod logs;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{Algorithm, ExperimentConfig};
pub use error::{CliError, CliResult};
