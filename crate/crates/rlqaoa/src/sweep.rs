//! Grid sweeps over a work queue, and the protocol-duration scan.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{error, info};
use rlqaoa_core::baselines::{cd_qaoa_train, qaoa_optimize};
use rlqaoa_core::env::NoiseConfig;

use crate::config::{noise_kind_str, Algorithm, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::logs::{write_csv, ResultRow, ScanRow, RESULTS_HEADER, RESULTS_SCHEMA_VERSION, SCAN_HEADER, SCAN_SCHEMA_VERSION};
use crate::run::{adiabatic_ratio, run_experiment, Summary, SUMMARY_FILE};

pub const RESULTS_FILE: &str = "results.csv";
pub const SCAN_FILE: &str = "adiabatic_scan.csv";

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub n_sites: usize,
    pub total_t: f64,
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl Cell {
    pub fn name(&self) -> String {
        format!(
            "{}_n{}_t{}_{}_{}_s{}",
            self.algorithm,
            self.n_sites,
            self.total_t,
            noise_kind_str(self.noise.kind),
            self.noise.strength,
            self.seed
        )
    }

    pub fn config(&self, base: &ExperimentConfig, dir: &Path) -> ExperimentConfig {
        let mut cfg = base.clone();
        cfg.algorithm = self.algorithm;
        cfg.seed = self.seed;
        cfg.env.ising.n_sites = self.n_sites;
        cfg.env.total_t = self.total_t;
        cfg.env.noise = self.noise;
        cfg.output_dir = dir.to_path_buf();
        cfg
    }
}

/// Cross product of the sweep axes, in a fixed order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let s = &cfg.sweep;
    let mut out = Vec::new();
    for &algorithm in &s.algorithms {
        for &n_sites in &s.n_sites {
            for &total_t in &s.total_t {
                for noise in s.noise_points() {
                    for &seed in &s.seeds {
                        out.push(Cell { algorithm, n_sites, total_t, noise, seed });
                    }
                }
            }
        }
    }
    out
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every cell without a `summary.json` under `out/cells/`, then
/// rewrites `results.csv` from all cells. Returns the rows; failed cells are
/// recorded and the sweep carries on.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize) -> CliResult<Vec<ResultRow>> {
    let grid = cells(cfg);
    if grid.is_empty() {
        return Err(CliError::Config("sweep axes produce no cells".into()));
    }
    let root = out.join("cells");
    std::fs::create_dir_all(&root).map_err(CliError::io(&root))?;
    let dirs: Vec<PathBuf> = grid.iter().map(|c| root.join(c.name())).collect();
    let pending: Vec<usize> = (0..grid.len()).filter(|&i| !dirs[i].join(SUMMARY_FILE).exists()).collect();
    info!("sweep: {} cells, {} to run, {} workers", grid.len(), pending.len(), workers.max(1));

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<(usize, String)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(pending.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = pending.get(k) else { break };
                let cell_cfg = grid[i].config(cfg, &dirs[i]);
                let res = cell_cfg.validate().and_then(|_| run_experiment(&cell_cfg, &dirs[i]));
                if let Err(e) = res {
                    error!("cell {} failed: {e}", grid[i].name());
                    let _ = std::fs::create_dir_all(&dirs[i]);
                    let _ = std::fs::write(dirs[i].join("error.txt"), e.to_string());
                    failures.lock().expect("no poisoned workers").push((i, e.to_string()));
                }
            });
        }
    });

    let rows: Vec<ResultRow> = grid
        .iter()
        .zip(&dirs)
        .map(|(c, d)| {
            let summary = Summary::load(&d.join(SUMMARY_FILE)).ok();
            ResultRow {
                schema_version: RESULTS_SCHEMA_VERSION,
                algorithm: c.algorithm.to_string(),
                n_sites: c.n_sites,
                total_t: c.total_t,
                noise_kind: noise_kind_str(c.noise.kind).to_string(),
                noise_strength: c.noise.strength,
                seed: c.seed,
                best_clean_ratio: summary.as_ref().map(|s| s.best_clean_ratio),
                final_greedy_ratio: summary.as_ref().map(|s| s.final_greedy_ratio),
                status: if summary.is_some() { "ok" } else { "failed" }.to_string(),
            }
        })
        .collect();
    write_csv(&out.join(RESULTS_FILE), &RESULTS_HEADER, &rows)?;
    let failed = failures.into_inner().expect("no poisoned workers");
    if !failed.is_empty() {
        return Err(CliError::Run(format!("{} of {} sweep cells failed; see error.txt in each", failed.len(), grid.len())));
    }
    Ok(rows)
}

/// Ratio against protocol duration for the adiabatic sweep, QAOA and
/// CD-QAOA, written to `adiabatic_scan.csv`.
pub fn run_scan(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<ScanRow>> {
    if cfg.adiabatic.scan_t.is_empty() {
        return Err(CliError::Config("adiabatic.scan_t is empty".into()));
    }
    std::fs::create_dir_all(out).map_err(CliError::io(out))?;
    let n = cfg.env.ising.n_sites;
    let row = |method: &str, total_t: f64, ratio: f64| ScanRow {
        schema_version: SCAN_SCHEMA_VERSION,
        method: method.to_string(),
        n_sites: n,
        total_t,
        ratio,
    };
    let mut rows = Vec::new();
    for &t in &cfg.adiabatic.scan_t {
        let mut at = cfg.clone();
        at.env.total_t = t;
        at.validate()?;
        rows.push(row("adiabatic", t, adiabatic_ratio(&at, t)?));
        rows.push(row("qaoa", t, qaoa_optimize(&at.env, at.qaoa_depth(), &at.qaoa.search, at.seed)?.clean_ratio));
        let cd = cd_qaoa_train(&at.env, &at.cd.search, &at.cd.ppo, at.seed, &mut ())?;
        let best = cd.train.best.map_or(cd.train.final_eval.reward.clean_energy_ratio, |b| b.1.reward.clean_energy_ratio);
        rows.push(row("cd_qaoa", t, best));
        info!("T = {t}: {:?}", rows[rows.len() - 3..].iter().map(|r| r.ratio).collect::<Vec<_>>());
    }
    write_csv(&out.join(SCAN_FILE), &SCAN_HEADER, &rows)?;
    Ok(rows)
}
