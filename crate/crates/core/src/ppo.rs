//! Hybrid clipped PPO over the autoregressive policy.
//!
//! Each iteration samples a batch of trajectories, scores them through a
//! [`Task`], forms one advantage per trajectory against an exponential
//! moving-average baseline, and takes `epochs` Adam ascent steps on
//!
//! `J(θ) = (1/M)·Σ_k [clip(ρ^d_k, A_k, ε_d) + clip(ρ^c_k, A_k, ε_c) + (temp/q)·S^d_k]`
//!
//! where `ρ^ν_k` are whole-trajectory probability ratios against the
//! sampling policy and `S^d_k` is the summed per-step categorical entropy.
//! The continuous entropy enters as a bonus `(temp/q)·(−log π^c)` on the
//! return. Both entropy terms are per-step averages: with the raw sums the
//! bonus swamps the reward signal at `q = 8` and the discrete entropy never
//! leaves its maximum.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::ContinuousFamily;
use crate::env::{Environment, Reward};
use crate::policy::{Adam, AutoregressivePolicy, PolicyDims, Trajectory, TrajectoryWeights};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// Bound on `|log ρ|` before exponentiation.
pub const LOG_RATIO_CLAMP: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PpoHyperparams {
    pub batch_size: usize,
    pub lr: f64,
    /// Staircase factor applied every `lr_decay_every` iterations.
    pub lr_decay: f64,
    pub lr_decay_every: usize,
    pub eps_continuous: f64,
    pub eps_discrete: f64,
    pub epochs: usize,
    /// EMA coefficient of the return baseline.
    pub ema: f64,
    /// Initial entropy temperature.
    pub entropy_temp: f64,
    /// Smooth decay: `temp = entropy_temp·entropy_decay^(it/entropy_decay_every)`.
    pub entropy_decay: f64,
    pub entropy_decay_every: usize,
    pub iterations: usize,
    pub hidden: Vec<usize>,
    pub family: ContinuousFamily,
    /// Global gradient-norm bound, off when `None`.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub grad_clip: Option<f64>,
    /// Greedy evaluation period in iterations (the last iteration is always evaluated).
    pub eval_every: usize,
}

impl Default for PpoHyperparams {
    fn default() -> Self {
        Self {
            batch_size: 128,
            lr: 5e-4,
            lr_decay: 0.98,
            lr_decay_every: 50,
            eps_continuous: 0.1,
            eps_discrete: 0.001,
            epochs: 4,
            ema: 0.95,
            entropy_temp: 0.1,
            entropy_decay: 0.99,
            entropy_decay_every: 50,
            iterations: 5000,
            hidden: vec![100, 100],
            family: ContinuousFamily::SigmoidGaussian,
            grad_clip: None,
            eval_every: 50,
        }
    }
}

impl PpoHyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg| Err(Error::InvalidParameter(msg));
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch size and epochs must be positive");
        }
        if !(self.eps_continuous > 0.0 && self.eps_discrete > 0.0) {
            return bad("clip ranges must be positive");
        }
        if !(0.0..1.0).contains(&self.ema) {
            return bad("ema coefficient must lie in [0, 1)");
        }
        if !(self.lr > 0.0) || !(self.entropy_temp >= 0.0) {
            return bad("learning rate must be positive and temperature nonnegative");
        }
        if self.lr_decay_every == 0 || self.entropy_decay_every == 0 || self.eval_every == 0 {
            return bad("schedule periods must be positive");
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("gradient clip must be positive");
        }
        Ok(())
    }

    /// `(learning rate, entropy temperature)` at `iteration`.
    pub fn schedules(&self, iteration: usize) -> (f64, f64) {
        let stairs = (iteration / self.lr_decay_every) as f64;
        let lr = self.lr * libm::pow(self.lr_decay, stairs);
        let smooth = iteration as f64 / self.entropy_decay_every as f64;
        (lr, self.entropy_temp * libm::pow(self.entropy_decay, smooth))
    }
}

/// Exponential moving average of batch-mean returns, starting at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmaBaseline {
    pub value: f64,
    pub m: f64,
}

impl EmaBaseline {
    pub fn new(m: f64) -> Self {
        Self { value: 0.0, m }
    }

    /// `A_k = R_k − R̂` with the current `R̂`, then `R̂ ← m·R̂ + (1 − m)·mean(R)`.
    pub fn advantages(&mut self, returns: &[f64]) -> Vec<f64> {
        let adv = returns.iter().map(|r| r - self.value).collect();
        if !returns.is_empty() {
            let mean = returns.iter().sum::<f64>() / returns.len() as f64;
            self.value = self.m * self.value + (1.0 - self.m) * mean;
        }
        adv
    }
}

/// `min(ρ·A, clip(ρ, 1 − ε, 1 + ε)·A)`.
pub fn clipped_term(ratio: f64, advantage: f64, eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
    (ratio * advantage).min(clipped * advantage)
}

/// Whether [`clipped_term`] follows the unclipped branch, i.e. has slope `A` in `ρ`.
pub fn clip_is_active(ratio: f64, advantage: f64, eps: f64) -> bool {
    if advantage >= 0.0 {
        ratio <= 1.0 + eps
    } else {
        ratio >= 1.0 - eps
    }
}

/// Ratio from a log-difference, with the slope factor `dρ/dlogπ` (zero
/// when the exponent was clamped).
fn ratio(log_new: f64, log_old: f64) -> (f64, f64) {
    let d = log_new - log_old;
    let c = d.clamp(-LOG_RATIO_CLAMP, LOG_RATIO_CLAMP);
    let r = libm::exp(c);
    (r, if c == d { r } else { 0.0 })
}

/// A scored episode: its reward and the durations that were applied (before noise).
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub reward: Reward,
    pub durations: Vec<f64>,
}

/// A deterministic protocol and its clean reward.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    pub reward: Reward,
    pub indices: Vec<usize>,
    pub durations: Vec<f64>,
}

/// What the trainer optimizes: a batch scorer and a greedy evaluator.
pub trait Task {
    /// Scores a batch sampled at `iteration`, in order.
    fn score(&mut self, iteration: usize, batch: &[Trajectory]) -> Result<Vec<Scored>>;

    fn evaluate(&mut self, policy: &AutoregressivePolicy) -> Result<Evaluation>;
}

/// Direct hybrid control: the sampled durations are the protocol.
#[derive(Debug, Clone)]
pub struct HybridTask {
    env: Environment,
    seed: u64,
}

impl HybridTask {
    pub fn new(env: Environment, seed: u64) -> Self {
        Self { env, seed }
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }
}

impl Task for HybridTask {
    fn score(&mut self, iteration: usize, batch: &[Trajectory]) -> Result<Vec<Scored>> {
        let one = |k: usize, t: &Trajectory| -> Result<Scored> {
            let mut rng = stream(self.seed, Stream::Noise, iteration as u64, k as u64);
            let reward = self.env.rollout(&t.actions, &mut rng)?;
            let durations = crate::env::normalize_durations(&t.continuous(), self.env.config().total_t)?;
            Ok(Scored { reward, durations })
        };
        map_indexed(batch, one)
    }

    fn evaluate(&mut self, policy: &AutoregressivePolicy) -> Result<Evaluation> {
        let actions = policy.greedy_actions()?;
        let indices: Vec<usize> = actions.iter().map(|a| a.discrete).collect();
        let raw: Vec<f64> = actions.iter().map(|a| a.continuous).collect();
        let reward = self.env.clean_reward(&indices, &raw)?;
        let durations = crate::env::normalize_durations(&raw, self.env.config().total_t)?;
        Ok(Evaluation { reward, indices, durations })
    }
}

/// `f(k, item)` over a slice in order, on the rayon pool when enabled.
pub(crate) fn map_indexed<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(k, t)| f(k, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(k, t)| f(k, t)).collect()
    }
}

/// Sampled trajectories with everything the update needs.
#[derive(Debug, Clone)]
pub struct TrajectoryBatch {
    pub trajectories: Vec<Trajectory>,
    pub scored: Vec<Scored>,
    /// Noisy return plus the continuous entropy bonus.
    pub returns: Vec<f64>,
    pub advantages: Vec<f64>,
}

/// Value and diagnostics of one evaluation of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveStats {
    pub objective: f64,
    /// Mean of `log π_old − log π_θ` over the batch (both factors).
    pub approx_kl: f64,
    /// Mean per-step discrete entropy.
    pub entropy: f64,
    /// Fraction of trajectories whose discrete term is clipped.
    pub clip_fraction_discrete: f64,
}

/// Trajectories per gradient chunk; partial sums are added in chunk order
/// so the result does not depend on the thread count.
const GRAD_CHUNK: usize = 8;

/// Evaluates the surrogate at the current parameters and adds its gradient
/// into `grads`.
pub fn hybrid_objective(
    policy: &AutoregressivePolicy,
    batch: &TrajectoryBatch,
    hp: &PpoHyperparams,
    temp: f64,
    grads: &mut [f64],
) -> Result<ObjectiveStats> {
    let m = batch.trajectories.len();
    if m == 0 || batch.advantages.len() != m {
        return Err(Error::ShapeMismatch("batch and advantages"));
    }
    if grads.len() != policy.n_params() {
        return Err(Error::DimensionMismatch { expected: policy.n_params(), found: grads.len() });
    }
    let inv_m = 1.0 / m as f64;
    let step_temp = temp / policy.dims().steps as f64;
    let chunks: Vec<&[Trajectory]> = batch.trajectories.chunks(GRAD_CHUNK).collect();
    let partials = map_indexed(&chunks, |c, chunk| {
        let mut g = policy.zero_grads();
        let mut stats = [0.0f64; 4];
        for (i, traj) in chunk.iter().enumerate() {
            let k = c * GRAD_CHUNK + i;
            let adv = batch.advantages[k];
            let cache = policy.forward_trajectory(&traj.actions)?;
            let (rd, sd) = ratio(cache.log_prob_discrete, traj.log_prob_discrete);
            let (rc, sc) = ratio(cache.log_prob_continuous, traj.log_prob_continuous);
            let active_d = clip_is_active(rd, adv, hp.eps_discrete);
            let active_c = clip_is_active(rc, adv, hp.eps_continuous);
            let w = TrajectoryWeights {
                discrete: if active_d { adv * sd * inv_m } else { 0.0 },
                continuous: if active_c { adv * sc * inv_m } else { 0.0 },
                entropy: step_temp * inv_m,
            };
            policy.backward(&cache, w, &mut g)?;
            stats[0] += clipped_term(rd, adv, hp.eps_discrete)
                + clipped_term(rc, adv, hp.eps_continuous)
                + step_temp * cache.entropy;
            stats[1] += traj.log_prob_discrete + traj.log_prob_continuous
                - cache.log_prob_discrete
                - cache.log_prob_continuous;
            stats[2] += cache.entropy;
            stats[3] += if active_d { 0.0 } else { 1.0 };
        }
        Ok((g, stats))
    })?;
    let mut totals = [0.0f64; 4];
    for (g, s) in partials {
        for (a, b) in grads.iter_mut().zip(&g) {
            *a += b;
        }
        for (t, v) in totals.iter_mut().zip(s) {
            *t += v;
        }
    }
    let steps = policy.dims().steps as f64;
    Ok(ObjectiveStats {
        objective: totals[0] * inv_m,
        approx_kl: totals[1] * inv_m,
        entropy: totals[2] * inv_m / steps,
        clip_fraction_discrete: totals[3] * inv_m,
    })
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub lr: f64,
    pub temp: f64,
    pub mean_clean_ratio: f64,
    pub max_clean_ratio: f64,
    /// Best batch maximum seen so far.
    pub history_best_ratio: f64,
    pub mean_noisy_return: f64,
    /// Mean per-step discrete entropy before the update.
    pub entropy: f64,
    /// Mean `log π_old − log π` at the last inner epoch.
    pub approx_kl: f64,
    pub baseline: f64,
    /// Clean ratio of the greedy protocol, on evaluation iterations.
    pub greedy_ratio: Option<f64>,
}

/// Trainer state handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct TrainerState<'a> {
    pub iteration: usize,
    pub policy: &'a AutoregressivePolicy,
    pub adam: &'a Adam,
    pub baseline: &'a EmaBaseline,
}

/// Hooks for logging and checkpointing. All methods default to no-ops.
pub trait Observer {
    fn on_iteration(&mut self, _record: &IterationRecord, _state: TrainerState<'_>) {}
    fn on_new_best(&mut self, _eval: &Evaluation, _state: TrainerState<'_>) {}
    /// Called with the offending state before training aborts on a non-finite value.
    fn on_abort(&mut self, _tensor: &str, _state: TrainerState<'_>) {}
}

impl Observer for () {}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub records: Vec<IterationRecord>,
    pub policy: AutoregressivePolicy,
    pub adam: Adam,
    /// Best greedy evaluation and the iteration it was taken at.
    pub best: Option<(usize, Evaluation)>,
    /// Parameters at the best greedy evaluation.
    pub best_params: Option<Vec<f64>>,
    /// Greedy evaluation after the final update.
    pub final_eval: Evaluation,
    /// Best sampled protocol by clean ratio.
    pub history_best: Option<(f64, Vec<usize>, Vec<f64>)>,
}

/// Runs PPO on `task` with a freshly initialized policy.
pub fn train<T: Task, O: Observer>(
    task: &mut T,
    dims: PolicyDims,
    hp: &PpoHyperparams,
    seed: u64,
    observer: &mut O,
) -> Result<TrainOutcome> {
    hp.validate()?;
    let policy = AutoregressivePolicy::new(dims, &mut stream(seed, Stream::Init, 0, 0))?;
    train_from(task, policy, hp, seed, observer)
}

/// Runs PPO starting from `policy`.
pub fn train_from<T: Task, O: Observer>(
    task: &mut T,
    mut policy: AutoregressivePolicy,
    hp: &PpoHyperparams,
    seed: u64,
    observer: &mut O,
) -> Result<TrainOutcome> {
    hp.validate()?;
    let mut adam = Adam::new(policy.n_params());
    let mut baseline = EmaBaseline::new(hp.ema);
    let mut records = Vec::with_capacity(hp.iterations);
    let mut best: Option<(usize, Evaluation)> = None;
    let mut best_params = None;
    let mut history_best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut grads = policy.zero_grads();

    for it in 0..hp.iterations {
        let (lr, temp) = hp.schedules(it);
        let trajectories = map_indexed(&vec![(); hp.batch_size], |k, _| {
            policy.sample_trajectory(&mut stream(seed, Stream::Actions, it as u64, k as u64))
        })?;
        let scored = task.score(it, &trajectories)?;
        if scored.len() != trajectories.len() {
            return Err(Error::ShapeMismatch("task returned a different number of rewards"));
        }
        let step_temp = temp / policy.dims().steps as f64;
        let returns: Vec<f64> = trajectories
            .iter()
            .zip(&scored)
            .map(|(t, s)| s.reward.noisy_return - step_temp * t.log_prob_continuous)
            .collect();
        let advantages = baseline.advantages(&returns);
        let batch = TrajectoryBatch { trajectories, scored, returns, advantages };

        let mut entropy = 0.0;
        let mut approx_kl = 0.0;
        for epoch in 0..hp.epochs {
            grads.fill(0.0);
            let stats = hybrid_objective(&policy, &batch, hp, temp, &mut grads)?;
            if epoch == 0 {
                entropy = stats.entropy;
            }
            approx_kl = stats.approx_kl;
            if let Some(bound) = hp.grad_clip {
                let norm = libm::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
                if norm > bound {
                    grads.iter_mut().for_each(|g| *g *= bound / norm);
                }
            }
            if grads.iter().any(|g| !g.is_finite()) {
                let state = TrainerState { iteration: it, policy: &policy, adam: &adam, baseline: &baseline };
                observer.on_abort("gradient", state);
                return Err(Error::NonFinite { iteration: it, tensor: String::from("gradient") });
            }
            adam.step(policy.params_mut(), &grads, lr)?;
            if let Some(tensor) = policy.first_non_finite() {
                let state = TrainerState { iteration: it, policy: &policy, adam: &adam, baseline: &baseline };
                observer.on_abort(&tensor, state);
                return Err(Error::NonFinite { iteration: it, tensor });
            }
        }

        let ratios: Vec<f64> = batch.scored.iter().map(|s| s.reward.clean_energy_ratio).collect();
        let (imax, &max_ratio) =
            ratios.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap_or((0, &f64::NEG_INFINITY));
        if history_best.as_ref().is_none_or(|h| max_ratio > h.0) {
            let t = &batch.trajectories[imax];
            history_best = Some((max_ratio, t.discrete(), batch.scored[imax].durations.clone()));
        }
        let m = ratios.len() as f64;
        let greedy = if (it + 1) % hp.eval_every == 0 || it + 1 == hp.iterations {
            let eval = task.evaluate(&policy)?;
            let ratio = eval.reward.clean_energy_ratio;
            if best.as_ref().is_none_or(|b| ratio > b.1.reward.clean_energy_ratio) {
                let state = TrainerState { iteration: it, policy: &policy, adam: &adam, baseline: &baseline };
                observer.on_new_best(&eval, state);
                best = Some((it, eval));
                best_params = Some(policy.params().to_vec());
            }
            Some(ratio)
        } else {
            None
        };
        let record = IterationRecord {
            iteration: it,
            lr,
            temp,
            mean_clean_ratio: ratios.iter().sum::<f64>() / m,
            max_clean_ratio: max_ratio,
            history_best_ratio: history_best.as_ref().map_or(max_ratio, |h| h.0),
            mean_noisy_return: batch.scored.iter().map(|s| s.reward.noisy_return).sum::<f64>() / m,
            entropy,
            approx_kl,
            baseline: baseline.value,
            greedy_ratio: greedy,
        };
        observer.on_iteration(&record, TrainerState { iteration: it, policy: &policy, adam: &adam, baseline: &baseline });
        records.push(record);
    }

    let final_eval = task.evaluate(&policy)?;
    Ok(TrainOutcome { records, policy, adam, best, best_params, final_eval, history_best })
}
