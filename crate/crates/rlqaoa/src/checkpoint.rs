//! JSON checkpoints. Floats are written in shortest round-trip form and read
//! back exactly, so `load(save(c)) == c`.

use std::path::Path;

use rlqaoa_core::baselines::{optimize_durations, DurationSearch, PgQaoaPolicy};
use rlqaoa_core::env::{normalize_durations, EnvConfig, Environment, NoiseConfig};
use rlqaoa_core::policy::{Adam, AutoregressivePolicy, PolicyDims};
use rlqaoa_core::ppo::EmaBaseline;
use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::error::{CliError, CliResult};

pub const CHECKPOINT_FORMAT: u32 = 1;

/// Restart tag for the inner solve done when evaluating a sequence policy.
const EVALUATE_TAG: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// RL-QAOA: both heads of the autoregressive policy.
    Hybrid { dims: PolicyDims, params: Vec<f64> },
    /// CD-QAOA: a discrete-only policy whose durations come from Powell.
    Sequence { dims: PolicyDims, params: Vec<f64>, search: DurationSearch },
    /// PG-QAOA: per-step distributions over a fixed alternation.
    Durations { policy: PgQaoaPolicy },
    /// QAOA: an optimized protocol.
    Fixed { indices: Vec<usize>, durations: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Iteration of the last completed update, if the model is trained.
    pub iteration: Option<usize>,
    /// Environment the model acts in. Generator indices refer to `env.actions`.
    pub env: EnvConfig,
    pub model: Model,
    pub adam: Option<Adam>,
    pub baseline: Option<EmaBaseline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStep {
    pub label: String,
    pub duration: f64,
}

pub fn protocol(env: &EnvConfig, indices: &[usize], durations: &[f64]) -> Vec<ProtocolStep> {
    indices.iter().zip(durations).map(|(&i, &d)| ProtocolStep { label: env.actions[i].clone(), duration: d }).collect()
}

/// Greedy protocol of a checkpoint and its noise-free ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub algorithm: Algorithm,
    pub clean_ratio: f64,
    pub protocol: Vec<ProtocolStep>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Run(e.to_string()))?;
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let c: Checkpoint =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if c.format_version != CHECKPOINT_FORMAT {
            return Err(CliError::Config(format!(
                "{}: checkpoint format {} is not supported (expected {CHECKPOINT_FORMAT})",
                path.display(),
                c.format_version
            )));
        }
        Ok(c)
    }

    /// Rebuilds the model and scores its greedy protocol without noise.
    pub fn evaluate(&self) -> CliResult<Evaluated> {
        let env = Environment::new(self.env.clone())?.with_noise(NoiseConfig::NONE);
        let (indices, durations, clean_ratio) = match &self.model {
            Model::Hybrid { dims, params } => {
                let policy = AutoregressivePolicy::from_params(dims.clone(), params.clone())?;
                let actions = policy.greedy_actions()?;
                let indices: Vec<usize> = actions.iter().map(|a| a.discrete).collect();
                let raw: Vec<f64> = actions.iter().map(|a| a.continuous).collect();
                let ratio = env.clean_ratio(&indices, &raw)?;
                (indices, normalize_durations(&raw, self.env.total_t)?, ratio)
            }
            Model::Sequence { dims, params, search } => {
                let policy = AutoregressivePolicy::from_params(dims.clone(), params.clone())?;
                let indices: Vec<usize> = policy.greedy_actions()?.iter().map(|a| a.discrete).collect();
                let r = optimize_durations(&env, &indices, search, self.seed, EVALUATE_TAG)?;
                (indices, r.durations, r.clean_ratio)
            }
            Model::Durations { policy } => {
                let raw = policy.greedy()?;
                let ratio = env.clean_ratio(&policy.sequence, &raw)?;
                (policy.sequence.clone(), normalize_durations(&raw, self.env.total_t)?, ratio)
            }
            Model::Fixed { indices, durations } => {
                let ratio = env.clean_ratio(indices, durations)?;
                (indices.clone(), durations.clone(), ratio)
            }
        };
        Ok(Evaluated { algorithm: self.algorithm, clean_ratio, protocol: protocol(&self.env, &indices, &durations) })
    }
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
    std::fs::rename(&tmp, path).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rlqaoa_core::rng::StreamRng;

    #[test]
    fn save_load_is_exact() {
        let env = EnvConfig::studied(4);
        let dims = PolicyDims::new(8, 5, vec![6, 6], Some(Default::default()));
        let mut rng = StreamRng::seed_from_u64(3);
        let mut p = AutoregressivePolicy::new(dims.clone(), &mut rng).unwrap();
        p.randomize(0.37, &mut rng);
        let mut adam = Adam::new(p.n_params());
        let g: Vec<f64> = p.params().iter().map(|x| x.sin() / 3.0).collect();
        let mut params = p.params().to_vec();
        adam.step(&mut params, &g, 1e-3).unwrap();
        let c = Checkpoint {
            format_version: CHECKPOINT_FORMAT,
            algorithm: Algorithm::RlQaoa,
            seed: 9,
            iteration: Some(41),
            env,
            model: Model::Hybrid { dims, params },
            adam: Some(adam),
            baseline: Some(EmaBaseline { value: -0.1 / 3.0, m: 0.95 }),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        c.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), c);
        let e = c.evaluate().unwrap();
        assert_eq!(e.protocol.len(), 8);
        assert!((e.protocol.iter().map(|s| s.duration).sum::<f64>() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_format_is_rejected() {
        let c = Checkpoint {
            format_version: CHECKPOINT_FORMAT + 1,
            algorithm: Algorithm::Qaoa,
            seed: 0,
            iteration: None,
            env: EnvConfig::studied(2),
            model: Model::Fixed { indices: vec![0, 1], durations: vec![5.0, 5.0] },
            adam: None,
            baseline: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        c.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap_err().exit_code(), 1);
    }
}
