//! Experiment configuration: a TOML file layered over built-in defaults,
//! then `key.path=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use rlqaoa_core::baselines::{cd_default_hyperparams, cd_default_search, DurationSearch};
use rlqaoa_core::env::{EnvConfig, Environment, NoiseConfig, NoiseKind};
use rlqaoa_core::ppo::PpoHyperparams;
use rlqaoa_core::quantum::ADIABATIC_DT;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    RlQaoa,
    CdQaoa,
    PgQaoa,
    Qaoa,
    Adiabatic,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::RlQaoa => "rl_qaoa",
            Algorithm::CdQaoa => "cd_qaoa",
            Algorithm::PgQaoa => "pg_qaoa",
            Algorithm::Qaoa => "qaoa",
            Algorithm::Adiabatic => "adiabatic",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn noise_kind_str(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::None => "none",
        NoiseKind::ClassicalGaussian => "classical_gaussian",
        NoiseKind::Quantum => "quantum",
        NoiseKind::GateRotation => "gate_rotation",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdSection {
    pub ppo: PpoHyperparams,
    pub search: DurationSearch,
}

impl Default for CdSection {
    fn default() -> Self {
        Self { ppo: cd_default_hyperparams(), search: cd_default_search() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaSection {
    /// Circuit depth `p`; half the episode length when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub search: DurationSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdiabaticSection {
    pub dt: f64,
    /// Protocol durations visited by `adiabatic-scan`.
    pub scan_t: Vec<f64>,
}

impl Default for AdiabaticSection {
    fn default() -> Self {
        Self { dt: ADIABATIC_DT, scan_t: vec![2.0, 5.0, 10.0, 20.0, 50.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseAxis {
    pub kind: NoiseKind,
    pub strengths: Vec<f64>,
}

impl Default for NoiseAxis {
    fn default() -> Self {
        Self { kind: NoiseKind::None, strengths: vec![0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub algorithms: Vec<Algorithm>,
    pub n_sites: Vec<usize>,
    pub total_t: Vec<f64>,
    pub noise: Vec<NoiseAxis>,
    pub seeds: Vec<u64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::RlQaoa, Algorithm::CdQaoa, Algorithm::PgQaoa, Algorithm::Qaoa],
            n_sites: vec![4],
            total_t: vec![10.0],
            noise: vec![
                NoiseAxis::default(),
                NoiseAxis { kind: NoiseKind::ClassicalGaussian, strengths: vec![0.1, 0.3] },
                NoiseAxis { kind: NoiseKind::Quantum, strengths: vec![1.0] },
            ],
            seeds: vec![0, 1, 2],
        }
    }
}

impl SweepSection {
    /// Flattened `(kind, strength)` pairs in file order.
    pub fn noise_points(&self) -> Vec<NoiseConfig> {
        self.noise.iter().flat_map(|a| a.strengths.iter().map(|&s| NoiseConfig { kind: a.kind, strength: s })).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub env: EnvConfig,
    /// Hybrid PPO for RL-QAOA.
    pub rl: PpoHyperparams,
    /// PG-QAOA; `family` picks the duration distribution.
    pub pg: PpoHyperparams,
    pub cd: CdSection,
    pub qaoa: QaoaSection,
    pub adiabatic: AdiabaticSection,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::RlQaoa,
            seed: 0,
            output_dir: PathBuf::from("runs"),
            env: EnvConfig::studied(4),
            rl: PpoHyperparams::default(),
            pg: PpoHyperparams::default(),
            cd: CdSection::default(),
            qaoa: QaoaSection::default(),
            adiabatic: AdiabaticSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn qaoa_depth(&self) -> usize {
        self.qaoa.depth.unwrap_or(self.env.steps / 2)
    }

    /// Parses `text` over the defaults and applies `overrides` in order.
    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        // A direct parse first, only for its line-precise error messages.
        toml::from_str::<ExperimentConfig>(text).map_err(|e| CliError::Config(e.to_string()))?;
        let user: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let mut merged = Table::try_from(ExperimentConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut merged, user);
        for o in overrides {
            apply_override(&mut merged, o)?;
        }
        let cfg: ExperimentConfig =
            Value::Table(merged).try_into().map_err(|e: toml::de::Error| CliError::Config(format!("after overrides: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(CliError::io(p))?,
            None => String::new(),
        };
        Self::parse(&text, overrides).map_err(|e| match (e, path) {
            (CliError::Config(msg), Some(p)) => CliError::Config(format!("{}: {msg}", p.display())),
            (e, _) => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |what: &str, e: rlqaoa_core::Error| CliError::Config(format!("{what}: {e}"));
        Environment::new(self.env.clone()).map_err(|e| bad("env", e))?;
        self.rl.validate().map_err(|e| bad("rl", e))?;
        self.pg.validate().map_err(|e| bad("pg", e))?;
        self.cd.ppo.validate().map_err(|e| bad("cd.ppo", e))?;
        self.cd.search.powell.validate().map_err(|e| bad("cd.search.powell", e))?;
        self.qaoa.search.powell.validate().map_err(|e| bad("qaoa.search.powell", e))?;
        if !(self.adiabatic.dt > 0.0) {
            return Err(CliError::Config("adiabatic.dt must be positive".into()));
        }
        for p in self.sweep.noise_points() {
            NoiseConfig::new(p.kind, p.strength).map_err(|e| bad("sweep.noise", e))?;
        }
        Ok(())
    }
}

/// Recursively overlays `top` onto `base`; tables merge, anything else replaces.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Sets `a.b.c=value`; the value is read as TOML, or as a bare string when
/// that fails.
fn apply_override(root: &mut Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override `{spec}` has an empty key")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let (last, parents) = keys.split_last().expect("nonempty");
    let mut table = root;
    for k in parents {
        let entry = table.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry.as_table_mut().ok_or_else(|| CliError::Config(format!("override `{spec}`: `{k}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
