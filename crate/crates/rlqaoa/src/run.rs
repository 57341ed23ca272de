//! One training run: the selected algorithm, its log, checkpoints and summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info, warn};
use rlqaoa_core::baselines::{cd_qaoa_train, pg_qaoa_train, qaoa_env, qaoa_optimize};
use rlqaoa_core::env::Environment;
use rlqaoa_core::policy::PolicyDims;
use rlqaoa_core::ppo::{train, Evaluation, HybridTask, IterationRecord, Observer, TrainOutcome, TrainerState};
use rlqaoa_core::quantum::{adiabatic_evolve, energy_density};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{protocol, write_atomic, Checkpoint, Model, ProtocolStep, CHECKPOINT_FORMAT};
use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::logs::{write_csv, CsvLog, LogRow, LOG_HEADER};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const GIT_HASH: &str = env!("RLQAOA_GIT_HASH");

pub const LOG_FILE: &str = "train_log.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const BEST_CHECKPOINT: &str = "checkpoint_best.json";
pub const LATEST_CHECKPOINT: &str = "checkpoint_latest.json";
pub const ABORT_CHECKPOINT: &str = "checkpoint_abort.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Best noise-free ratio over the greedy evaluations.
    pub best_clean_ratio: f64,
    pub best_protocol: Vec<ProtocolStep>,
    /// Noise-free ratio of the greedy protocol after the last update.
    pub final_greedy_ratio: f64,
    pub final_protocol: Vec<ProtocolStep>,
    /// Best sampled protocol by clean ratio, for the sampling learners.
    pub history_best_ratio: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub git_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Run(format!("{}: {e}", path.display())))
    }
}

/// Streams log rows and writes checkpoints as training proceeds. Observer
/// hooks cannot fail, so the first IO error is kept and reported afterwards.
struct RunObserver<'a> {
    cfg: &'a ExperimentConfig,
    dir: PathBuf,
    log: CsvLog,
    sequence_only: bool,
    error: Option<CliError>,
}

impl<'a> RunObserver<'a> {
    fn new(cfg: &'a ExperimentConfig, dir: &Path, sequence_only: bool) -> CliResult<Self> {
        let log = CsvLog::create(&dir.join(LOG_FILE))?;
        Ok(Self { cfg, dir: dir.to_path_buf(), log, sequence_only, error: None })
    }

    fn checkpoint(&self, state: &TrainerState<'_>) -> Checkpoint {
        let dims = state.policy.dims().clone();
        let params = state.policy.params().to_vec();
        let model = if self.sequence_only {
            Model::Sequence { dims, params, search: self.cfg.cd.search.clone() }
        } else {
            Model::Hybrid { dims, params }
        };
        Checkpoint {
            format_version: CHECKPOINT_FORMAT,
            algorithm: self.cfg.algorithm,
            seed: self.cfg.seed,
            iteration: Some(state.iteration),
            env: self.cfg.env.clone(),
            model,
            adam: Some(state.adam.clone()),
            baseline: Some(*state.baseline),
        }
    }

    fn keep(&mut self, r: CliResult<()>) {
        if let Err(e) = r {
            self.error.get_or_insert(e);
        }
    }

    fn finish(self) -> CliResult<()> {
        self.error.map_or(Ok(()), Err)
    }
}

impl Observer for RunObserver<'_> {
    fn on_iteration(&mut self, record: &IterationRecord, state: TrainerState<'_>) {
        let r = self.log.write(&LogRow::new(self.cfg.algorithm.as_str(), record));
        self.keep(r);
        if let Some(g) = record.greedy_ratio {
            debug!("iteration {}: mean {:.4} greedy {g:.4}", record.iteration, record.mean_clean_ratio);
            let r = self.checkpoint(&state).save(&self.dir.join(LATEST_CHECKPOINT));
            self.keep(r);
        }
    }

    fn on_new_best(&mut self, eval: &Evaluation, state: TrainerState<'_>) {
        debug!("new best greedy ratio {:.6} at iteration {}", eval.reward.clean_energy_ratio, state.iteration);
        let r = self.checkpoint(&state).save(&self.dir.join(BEST_CHECKPOINT));
        self.keep(r);
    }

    fn on_abort(&mut self, tensor: &str, state: TrainerState<'_>) {
        warn!("non-finite value in {tensor}; saving {ABORT_CHECKPOINT}");
        let r = self.checkpoint(&state).save(&self.dir.join(ABORT_CHECKPOINT));
        self.keep(r);
    }
}

struct Finished {
    best: (f64, Vec<ProtocolStep>),
    last: (f64, Vec<ProtocolStep>),
    history_best: Option<f64>,
    iterations: usize,
}

fn from_outcome(cfg: &ExperimentConfig, out: &TrainOutcome) -> Finished {
    let steps = |e: &Evaluation| protocol(&cfg.env, &e.indices, &e.durations);
    let last = (out.final_eval.reward.clean_energy_ratio, steps(&out.final_eval));
    let best = out.best.as_ref().map_or_else(|| last.clone(), |(_, e)| (e.reward.clean_energy_ratio, steps(e)));
    Finished { best, last, history_best: out.history_best.as_ref().map(|h| h.0), iterations: out.records.len() }
}

/// Runs `cfg.algorithm` and writes its artifacts into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> CliResult<Summary> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    write_atomic(&dir.join(CONFIG_FILE), cfg.to_toml().as_bytes())?;
    let started = Instant::now();
    info!("{} seed {} -> {}", cfg.algorithm, cfg.seed, dir.display());
    let done = match cfg.algorithm {
        Algorithm::RlQaoa => {
            let env = Environment::new(cfg.env.clone())?;
            let dims = PolicyDims::new(cfg.env.steps, env.n_actions(), cfg.rl.hidden.clone(), Some(cfg.rl.family));
            let mut obs = RunObserver::new(cfg, dir, false)?;
            let res = train(&mut HybridTask::new(env, cfg.seed), dims, &cfg.rl, cfg.seed, &mut obs);
            obs.finish()?;
            from_outcome(cfg, &res?)
        }
        Algorithm::CdQaoa => {
            let mut obs = RunObserver::new(cfg, dir, true)?;
            let res = cd_qaoa_train(&cfg.env, &cfg.cd.search, &cfg.cd.ppo, cfg.seed, &mut obs);
            obs.finish()?;
            let out = res?;
            debug!("cd-qaoa: {} inner evaluations, {} sequences solved", out.inner_evals, out.solved);
            from_outcome(cfg, &out.train)
        }
        Algorithm::PgQaoa => {
            let depth = cfg.qaoa_depth();
            let out = pg_qaoa_train(&cfg.env, depth, cfg.pg.family, &cfg.pg, cfg.seed)?;
            let run = out.best;
            let rows: Vec<LogRow> = run.records.iter().map(|r| LogRow::new(cfg.algorithm.as_str(), r)).collect();
            write_csv(&dir.join(LOG_FILE), &LOG_HEADER, &rows)?;
            let env = qaoa_env(&cfg.env, depth)?.config().clone();
            let steps = protocol(&env, &run.policy.sequence, &run.durations);
            Checkpoint {
                format_version: CHECKPOINT_FORMAT,
                algorithm: cfg.algorithm,
                seed: cfg.seed,
                iteration: run.records.last().map(|r| r.iteration),
                env,
                model: Model::Durations { policy: run.policy },
                adam: None,
                baseline: None,
            }
            .save(&dir.join(BEST_CHECKPOINT))?;
            let history_best = run.records.last().map(|r| r.history_best_ratio);
            let ratio = run.clean_ratio;
            Finished { best: (ratio, steps.clone()), last: (ratio, steps), history_best, iterations: run.records.len() }
        }
        Algorithm::Qaoa => {
            let depth = cfg.qaoa_depth();
            let r = qaoa_optimize(&cfg.env, depth, &cfg.qaoa.search, cfg.seed)?;
            write_csv::<LogRow>(&dir.join(LOG_FILE), &LOG_HEADER, &[])?;
            let env = qaoa_env(&cfg.env, depth)?.config().clone();
            let indices: Vec<usize> = r.labels.iter().map(|l| if *l == "H1" { 0 } else { 1 }).collect();
            let steps = protocol(&env, &indices, &r.durations);
            if depth > 0 {
                Checkpoint {
                    format_version: CHECKPOINT_FORMAT,
                    algorithm: cfg.algorithm,
                    seed: cfg.seed,
                    iteration: None,
                    env,
                    model: Model::Fixed { indices, durations: r.durations.clone() },
                    adam: None,
                    baseline: None,
                }
                .save(&dir.join(BEST_CHECKPOINT))?;
            }
            Finished { best: (r.clean_ratio, steps.clone()), last: (r.clean_ratio, steps), history_best: None, iterations: 0 }
        }
        Algorithm::Adiabatic => {
            let ratio = adiabatic_ratio(cfg, cfg.env.total_t)?;
            write_csv::<LogRow>(&dir.join(LOG_FILE), &LOG_HEADER, &[])?;
            Finished { best: (ratio, vec![]), last: (ratio, vec![]), history_best: None, iterations: 0 }
        }
    };
    let summary = Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        algorithm: cfg.algorithm,
        seed: cfg.seed,
        best_clean_ratio: done.best.0,
        best_protocol: done.best.1,
        final_greedy_ratio: done.last.0,
        final_protocol: done.last.1,
        history_best_ratio: done.history_best,
        iterations: done.iterations,
        wall_time_s: started.elapsed().as_secs_f64(),
        git_hash: GIT_HASH.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Run(e.to_string()))?;
    write_atomic(&dir.join(SUMMARY_FILE), text.as_bytes())?;
    info!("{} seed {}: best {:.6}, final {:.6}", cfg.algorithm, cfg.seed, summary.best_clean_ratio, summary.final_greedy_ratio);
    Ok(summary)
}

/// `E/E_GS` after the adiabatic sweep of duration `total_t`.
pub fn adiabatic_ratio(cfg: &ExperimentConfig, total_t: f64) -> CliResult<f64> {
    let env = Environment::new(cfg.env.clone())?;
    let state = adiabatic_evolve(&cfg.env.ising, total_t, cfg.adiabatic.dt)?;
    Ok(energy_density(&state, &env.hamiltonian().h, env.n_sites())? / env.ground_energy_density())
}
