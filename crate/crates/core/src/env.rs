//! The episodic environment: hybrid actions in, (noisy) negative energy
//! density out.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::policy::{AutoregressivePolicy, HybridAction};
use crate::quantum::{
    apply_steps, build_ising, energy_density, energy_variance_density, ground_state, GeneratorSet, IsingHamiltonian,
    IsingParams, QuantumState,
};
use crate::{Error, Result};

/// Smallest admissible sum of raw durations.
pub const MIN_RAW_SUM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseKind {
    #[default]
    None,
    /// Reward noise with standard deviation `strength·|E_GS/N|`.
    ClassicalGaussian,
    /// Reward noise with the final-state energy spread per site.
    Quantum,
    /// Each applied duration is shifted by noise of standard deviation `strength·T/q`.
    GateRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub strength: f64,
}

impl NoiseConfig {
    pub const NONE: Self = Self { kind: NoiseKind::None, strength: 0.0 };

    pub fn new(kind: NoiseKind, strength: f64) -> Result<Self> {
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::InvalidParameter("noise strength must be finite and nonnegative"));
        }
        Ok(Self { kind, strength })
    }

    /// True when rewards are exactly the clean returns.
    pub fn is_clean(&self) -> bool {
        match self.kind {
            NoiseKind::None => true,
            NoiseKind::Quantum => false,
            NoiseKind::ClassicalGaussian | NoiseKind::GateRotation => self.strength == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnvConfig {
    pub ising: IsingParams,
    pub total_t: f64,
    /// Episode length `q`.
    pub steps: usize,
    /// Generator labels, a subset of `H1, H2, Y, X|Y, Y|Z`.
    pub actions: Vec<String>,
    pub noise: NoiseConfig,
}

/// The studied setting at `N = 4`.
impl Default for EnvConfig {
    fn default() -> Self {
        Self::studied(4)
    }
}

impl EnvConfig {
    /// `JT = 10`, `q = 8`, the five-generator set, no noise.
    pub fn studied(n_sites: usize) -> Self {
        Self {
            ising: IsingParams::studied(n_sites),
            total_t: 10.0,
            steps: 8,
            actions: GeneratorSet::CD_LABELS.iter().map(|s| s.to_string()).collect(),
            noise: NoiseConfig::NONE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ising.validate()?;
        if !(self.total_t > 0.0) || !self.total_t.is_finite() {
            return Err(Error::InvalidParameter("total time must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("episode needs at least one step"));
        }
        NoiseConfig::new(self.noise.kind, self.noise.strength)?;
        Ok(())
    }
}

/// Terminal reward of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Reward {
    /// Negative energy density including noise.
    pub noisy_return: f64,
    /// Negative energy density of the nominal protocol.
    pub clean_return: f64,
    /// `E/E_GS` of the nominal protocol.
    pub clean_energy_ratio: f64,
}

/// `raw_j·T/Σ raw`, with the rounding residual moved into the last entry.
pub fn normalize_durations(raw: &[f64], total_t: f64) -> Result<Vec<f64>> {
    let sum: f64 = raw.iter().sum();
    if raw.is_empty() || !(sum >= MIN_RAW_SUM) || raw.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::DegenerateDurations(sum));
    }
    let mut out: Vec<f64> = raw.iter().map(|&r| r * total_t / sum).collect();
    let head: f64 = out[..out.len() - 1].iter().sum();
    if let Some(last) = out.last_mut() {
        *last = (total_t - head).max(0.0);
    }
    Ok(out)
}

/// A built Hamiltonian, its generator set and ground-state energy.
#[derive(Debug, Clone)]
pub struct Environment {
    cfg: EnvConfig,
    ham: IsingHamiltonian,
    gens: GeneratorSet,
    e_gs: f64,
    initial: QuantumState,
}

impl Environment {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let ham = build_ising(&cfg.ising)?;
        let gens = GeneratorSet::from_labels(&ham, &cfg.actions)?;
        if cfg.steps > 1 && gens.len() < 2 {
            return Err(Error::InvalidParameter("repeat constraint needs at least two generators"));
        }
        gens.warm();
        let (e_total, _) = ground_state(&ham.h, cfg.ising.n_sites)?;
        let initial = QuantumState::all_up(cfg.ising.n_sites);
        Ok(Self { e_gs: e_total / cfg.ising.n_sites as f64, cfg, ham, gens, initial })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn hamiltonian(&self) -> &IsingHamiltonian {
        &self.ham
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn n_actions(&self) -> usize {
        self.gens.len()
    }

    /// Ground-state energy density `E_GS/N`.
    pub fn ground_energy_density(&self) -> f64 {
        self.e_gs
    }

    pub fn n_sites(&self) -> usize {
        self.cfg.ising.n_sites
    }

    /// Copy of this environment with different noise.
    pub fn with_noise(&self, noise: NoiseConfig) -> Self {
        let mut env = self.clone();
        env.cfg.noise = noise;
        env
    }

    /// `E/E_GS` of the initial product state.
    pub fn initial_ratio(&self) -> Result<f64> {
        Ok(energy_density(&self.initial, &self.ham.h, self.n_sites())? / self.e_gs)
    }

    /// Final state after applying `durations` verbatim.
    pub fn final_state(&self, indices: &[usize], durations: &[f64]) -> Result<QuantumState> {
        if indices.len() != durations.len() {
            return Err(Error::ShapeMismatch("indices vs durations"));
        }
        let steps: Vec<(usize, f64)> = indices.iter().copied().zip(durations.iter().copied()).collect();
        apply_steps(&self.initial, &steps, &self.gens)
    }

    /// Clean energy density of the protocol built from raw durations.
    pub fn clean_energy(&self, indices: &[usize], raw: &[f64]) -> Result<f64> {
        let durations = normalize_durations(raw, self.cfg.total_t)?;
        energy_density(&self.final_state(indices, &durations)?, &self.ham.h, self.n_sites())
    }

    /// Clean `E/E_GS` of the protocol built from raw durations.
    pub fn clean_ratio(&self, indices: &[usize], raw: &[f64]) -> Result<f64> {
        Ok(self.clean_energy(indices, raw)? / self.e_gs)
    }

    fn check_sequence(&self, indices: &[usize]) -> Result<()> {
        for (j, &d) in indices.iter().enumerate() {
            if d >= self.gens.len() {
                return Err(Error::InvalidGenerator { index: d, len: self.gens.len() });
            }
            if j > 0 && indices[j - 1] == d {
                return Err(Error::RepeatedAction { step: j - 1, action: d });
            }
        }
        Ok(())
    }

    /// Evaluates the protocol `(indices, normalize(raw))` under the
    /// configured noise, drawing noise from `rng`.
    pub fn rollout_parts<R: Rng + ?Sized>(&self, indices: &[usize], raw: &[f64], rng: &mut R) -> Result<Reward> {
        self.check_sequence(indices)?;
        let n = self.n_sites();
        let durations = normalize_durations(raw, self.cfg.total_t)?;
        let state = self.final_state(indices, &durations)?;
        let clean = energy_density(&state, &self.ham.h, n)?;
        let noise = self.cfg.noise;
        let noisy = match noise.kind {
            NoiseKind::None => clean,
            NoiseKind::ClassicalGaussian => {
                let z: f64 = StandardNormal.sample(rng);
                clean + z * noise.strength * self.e_gs.abs()
            }
            NoiseKind::Quantum => {
                let z: f64 = StandardNormal.sample(rng);
                clean + z * energy_variance_density(&state, &self.ham.h, n)?
            }
            NoiseKind::GateRotation => {
                let sigma = noise.strength * self.cfg.total_t / indices.len().max(1) as f64;
                let shifted: Vec<f64> = durations
                    .iter()
                    .map(|&d| {
                        let z: f64 = StandardNormal.sample(rng);
                        d + sigma * z
                    })
                    .collect();
                energy_density(&self.final_state(indices, &shifted)?, &self.ham.h, n)?
            }
        };
        Ok(Reward { noisy_return: -noisy, clean_return: -clean, clean_energy_ratio: clean / self.e_gs })
    }

    pub fn rollout<R: Rng + ?Sized>(&self, actions: &[HybridAction], rng: &mut R) -> Result<Reward> {
        if actions.len() != self.cfg.steps {
            return Err(Error::ShapeMismatch("trajectory length differs from the episode length"));
        }
        let indices: Vec<usize> = actions.iter().map(|a| a.discrete).collect();
        let raw: Vec<f64> = actions.iter().map(|a| a.continuous).collect();
        self.rollout_parts(&indices, &raw, rng)
    }

    /// Noise-free reward of the policy's greedy protocol.
    pub fn evaluate_greedy(&self, policy: &AutoregressivePolicy) -> Result<Reward> {
        let actions = policy.greedy_actions()?;
        let indices: Vec<usize> = actions.iter().map(|a| a.discrete).collect();
        let raw: Vec<f64> = actions.iter().map(|a| a.continuous).collect();
        self.clean_reward(&indices, &raw)
    }

    /// Reward with noise switched off.
    pub fn clean_reward(&self, indices: &[usize], raw: &[f64]) -> Result<Reward> {
        self.check_sequence(indices)?;
        let e = self.clean_energy(indices, raw)?;
        Ok(Reward { noisy_return: -e, clean_return: -e, clean_energy_ratio: e / self.e_gs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use alloc::vec;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_durations(&[0.5, 0.5], 10.0).unwrap(), vec![5.0, 5.0]);
        let d = normalize_durations(&[0.2, 0.6, 0.2], 10.0).unwrap();
        for (a, b) in d.iter().zip([2.0, 6.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(normalize_durations(&[0.0, 0.0], 1.0), Err(Error::DegenerateDurations(_))));
        assert!(normalize_durations(&[], 1.0).is_err());
    }

    #[test]
    fn clean_noise_matches() {
        let env = Environment::new(EnvConfig::studied(4)).unwrap();
        let mut r = stream(1, Stream::Noise, 0, 0);
        let rew = env.rollout_parts(&[0, 1, 0, 1, 2, 3, 4, 0], &[0.3; 8], &mut r).unwrap();
        assert_eq!(rew.noisy_return, rew.clean_return);
        assert!(rew.clean_energy_ratio < 1.0);
    }

    #[test]
    fn repeated_action_rejected() {
        let env = Environment::new(EnvConfig::studied(4)).unwrap();
        let mut r = stream(1, Stream::Noise, 0, 0);
        assert!(env.rollout_parts(&[0, 0, 1, 2, 3, 4, 0, 1], &[0.3; 8], &mut r).is_err());
    }
}
