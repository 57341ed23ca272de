//! CSV time series. Every file starts with a `schema_version` column so
//! readers can reject layouts they do not know.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rlqaoa_core::ppo::IterationRecord;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const LOG_SCHEMA_VERSION: u32 = 1;
pub const RESULTS_SCHEMA_VERSION: u32 = 1;
pub const SCAN_SCHEMA_VERSION: u32 = 1;

/// One row of `train_log.csv`. Wall time lives in `summary.json`, so logs
/// of identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub schema_version: u32,
    pub algorithm: String,
    pub iteration: usize,
    pub lr: f64,
    pub temp: f64,
    pub mean_clean_ratio: f64,
    pub max_clean_ratio: f64,
    pub history_best_ratio: f64,
    pub mean_noisy_return: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub baseline: f64,
    pub greedy_ratio: Option<f64>,
}

impl LogRow {
    pub fn new(algorithm: &str, r: &IterationRecord) -> Self {
        Self {
            schema_version: LOG_SCHEMA_VERSION,
            algorithm: algorithm.to_string(),
            iteration: r.iteration,
            lr: r.lr,
            temp: r.temp,
            mean_clean_ratio: r.mean_clean_ratio,
            max_clean_ratio: r.max_clean_ratio,
            history_best_ratio: r.history_best_ratio,
            mean_noisy_return: r.mean_noisy_return,
            entropy: r.entropy,
            approx_kl: r.approx_kl,
            baseline: r.baseline,
            greedy_ratio: r.greedy_ratio,
        }
    }
}

/// One cell of a sweep in `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub algorithm: String,
    pub n_sites: usize,
    pub total_t: f64,
    pub noise_kind: String,
    pub noise_strength: f64,
    pub seed: u64,
    pub best_clean_ratio: Option<f64>,
    pub final_greedy_ratio: Option<f64>,
    /// `ok`, or `failed` with the message in the cell's `error.txt`.
    pub status: String,
}

/// One point of `adiabatic_scan.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub schema_version: u32,
    pub method: String,
    pub n_sites: usize,
    pub total_t: f64,
    pub ratio: f64,
}

/// Row-at-a-time CSV writer, flushed after each row so an interrupted run
/// leaves a readable prefix.
pub struct CsvLog {
    writer: csv::Writer<BufWriter<File>>,
    path: std::path::PathBuf,
}

impl CsvLog {
    pub fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(CliError::io(path))?;
        Ok(Self { writer: csv::Writer::from_writer(BufWriter::new(file)), path: path.to_path_buf() })
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> CliResult<()> {
        self.writer.serialize(row).map_err(|e| CliError::Run(format!("{}: {e}", self.path.display())))?;
        self.writer.flush().map_err(CliError::io(&self.path))
    }
}

/// Writes all rows at once; with no rows only the header is written.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> CliResult<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    let err = |e: csv::Error| CliError::Run(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
}

pub const LOG_HEADER: [&str; 13] = [
    "schema_version",
    "algorithm",
    "iteration",
    "lr",
    "temp",
    "mean_clean_ratio",
    "max_clean_ratio",
    "history_best_ratio",
    "mean_noisy_return",
    "entropy",
    "approx_kl",
    "baseline",
    "greedy_ratio",
];

pub const RESULTS_HEADER: [&str; 10] = [
    "schema_version",
    "algorithm",
    "n_sites",
    "total_t",
    "noise_kind",
    "noise_strength",
    "seed",
    "best_clean_ratio",
    "final_greedy_ratio",
    "status",
];

pub const SCAN_HEADER: [&str; 5] = ["schema_version", "method", "n_sites", "total_t", "ratio"];
