use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::qaoa::{alternating, qaoa_env};
use crate::distributions::{ContinuousFamily, UnitDistribution};
use crate::env::{normalize_durations, EnvConfig, Environment};
use crate::policy::{shape_params, Adam};
use crate::ppo::{clip_is_active, EmaBaseline, IterationRecord, PpoHyperparams, LOG_RATIO_CLAMP};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// One independent bounded distribution per step over a fixed `H1, H2`
/// alternation. Parameters are stored raw as `[κ_1, ξ_1, …, κ_q, ξ_q]` and
/// mapped like the network heads, so zeros give `Beta(1, 1)` or a
/// sigmoid-Gaussian centred on `1/2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PgQaoaPolicy {
    pub family: ContinuousFamily,
    pub sequence: Vec<usize>,
    pub params: Vec<f64>,
}

impl PgQaoaPolicy {
    pub fn new(family: ContinuousFamily, sequence: Vec<usize>) -> Self {
        let params = vec![0.0; 2 * sequence.len()];
        Self { family, sequence, params }
    }

    pub fn steps(&self) -> usize {
        self.sequence.len()
    }

    fn dist(&self, j: usize) -> Result<(UnitDistribution, f64, f64)> {
        let (k, x, dk, dx) = shape_params(self.family, self.params[2 * j], self.params[2 * j + 1]);
        Ok((UnitDistribution::new(self.family, k, x)?, dk, dx))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, f64)> {
        let mut raw = Vec::with_capacity(self.steps());
        let mut log_prob = 0.0;
        for j in 0..self.steps() {
            let (d, _, _) = self.dist(j)?;
            let a = d.sample(rng);
            log_prob += d.log_prob(a)?;
            raw.push(a);
        }
        Ok((raw, log_prob))
    }

    pub fn log_prob(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.steps() {
            return Err(Error::ShapeMismatch("durations vs policy steps"));
        }
        let mut total = 0.0;
        for (j, &a) in raw.iter().enumerate() {
            total += self.dist(j)?.0.log_prob(a)?;
        }
        Ok(total)
    }

    /// Adds `weight·∇ log π(raw)` into `grads`.
    pub fn add_grad_log_prob(&self, raw: &[f64], weight: f64, grads: &mut [f64]) -> Result<()> {
        if raw.len() != self.steps() || grads.len() != self.params.len() {
            return Err(Error::ShapeMismatch("gradient buffer vs policy"));
        }
        for (j, &a) in raw.iter().enumerate() {
            let (d, dk, dx) = self.dist(j)?;
            let (gk, gx) = d.grad_log_prob(a)?;
            grads[2 * j] += weight * gk * dk;
            grads[2 * j + 1] += weight * gx * dx;
        }
        Ok(())
    }

    /// Median (sigmoid-Gaussian) or mean (Beta) of every step.
    pub fn greedy(&self) -> Result<Vec<f64>> {
        (0..self.steps()).map(|j| Ok(self.dist(j)?.0.greedy_value())).collect()
    }
}

#[derive(Debug, Clone)]
pub struct PgQaoaRun {
    pub h2_first: bool,
    pub policy: PgQaoaPolicy,
    pub records: Vec<IterationRecord>,
    /// Mean noisy return over the last `eval_every` iterations, used to pick the order.
    pub selection_return: f64,
    pub durations: Vec<f64>,
    pub clean_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct PgQaoaOutcome {
    /// The order kept by [`pg_qaoa_train`].
    pub best: PgQaoaRun,
    pub other: PgQaoaRun,
}

/// Trains one order with the continuous clipped surrogate. Of `hp` only the
/// batch, learning-rate, entropy, `eps_continuous`, `epochs`, `ema`,
/// `iterations`, `eval_every` and `grad_clip` fields are used.
pub fn pg_qaoa_train_order(
    env: &Environment,
    family: ContinuousFamily,
    h2_first: bool,
    hp: &PpoHyperparams,
    seed: u64,
) -> Result<PgQaoaRun> {
    hp.validate()?;
    let q = env.config().steps;
    let total_t = env.config().total_t;
    let mut policy = PgQaoaPolicy::new(family, alternating(q, h2_first));
    let mut adam = Adam::new(policy.params.len());
    let mut baseline = EmaBaseline::new(hp.ema);
    let mut grads = vec![0.0; policy.params.len()];
    let mut records = Vec::with_capacity(hp.iterations);
    let mut history_best = f64::NEG_INFINITY;
    let inv_m = 1.0 / hp.batch_size as f64;

    for it in 0..hp.iterations {
        let (lr, temp) = hp.schedules(it);
        let step_temp = temp / q as f64;
        let mut samples = Vec::with_capacity(hp.batch_size);
        let mut returns = Vec::with_capacity(hp.batch_size);
        let mut ratios = Vec::with_capacity(hp.batch_size);
        let mut noisy_sum = 0.0;
        for k in 0..hp.batch_size {
            let (raw, log_prob) = policy.sample(&mut stream(seed, Stream::Actions, it as u64, k as u64))?;
            let reward = env.rollout_parts(&policy.sequence, &raw, &mut stream(seed, Stream::Noise, it as u64, k as u64))?;
            returns.push(reward.noisy_return - step_temp * log_prob);
            ratios.push(reward.clean_energy_ratio);
            noisy_sum += reward.noisy_return;
            samples.push((raw, log_prob));
        }
        let advantages = baseline.advantages(&returns);

        let mut approx_kl = 0.0;
        for _ in 0..hp.epochs {
            grads.fill(0.0);
            let mut kl = 0.0;
            for ((raw, old), &adv) in samples.iter().zip(&advantages) {
                let new = policy.log_prob(raw)?;
                kl += old - new;
                let d = new - old;
                let c = d.clamp(-LOG_RATIO_CLAMP, LOG_RATIO_CLAMP);
                let rho = libm::exp(c);
                if c == d && clip_is_active(rho, adv, hp.eps_continuous) {
                    policy.add_grad_log_prob(raw, adv * rho * inv_m, &mut grads)?;
                }
            }
            approx_kl = kl * inv_m;
            if let Some(bound) = hp.grad_clip {
                let norm = libm::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
                if norm > bound {
                    grads.iter_mut().for_each(|g| *g *= bound / norm);
                }
            }
            adam.step(&mut policy.params, &grads, lr)?;
            if policy.params.iter().any(|p| !p.is_finite()) {
                return Err(Error::NonFinite { iteration: it, tensor: "pg_qaoa.params".into() });
            }
        }

        let m = ratios.len() as f64;
        let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        history_best = history_best.max(max_ratio);
        let greedy_ratio = if (it + 1) % hp.eval_every == 0 || it + 1 == hp.iterations {
            Some(env.clean_ratio(&policy.sequence, &policy.greedy()?)?)
        } else {
            None
        };
        records.push(IterationRecord {
            iteration: it,
            lr,
            temp,
            mean_clean_ratio: ratios.iter().sum::<f64>() / m,
            max_clean_ratio: max_ratio,
            history_best_ratio: history_best,
            mean_noisy_return: noisy_sum / m,
            entropy: 0.0,
            approx_kl,
            baseline: baseline.value,
            greedy_ratio,
        });
    }

    let window = hp.eval_every.min(records.len()).max(1);
    let tail = &records[records.len() - window..];
    let selection_return = tail.iter().map(|r| r.mean_noisy_return).sum::<f64>() / window as f64;
    let greedy = policy.greedy()?;
    let clean_ratio = env.clean_ratio(&policy.sequence, &greedy)?;
    let durations = normalize_durations(&greedy, total_t)?;
    Ok(PgQaoaRun { h2_first, policy, records, selection_return, durations, clean_ratio })
}

/// PG-QAOA at depth `p`: trains both alternation orders on the same noise
/// streams and keeps the one with the higher late-training noisy return.
pub fn pg_qaoa_train(
    cfg: &EnvConfig,
    depth: usize,
    family: ContinuousFamily,
    hp: &PpoHyperparams,
    seed: u64,
) -> Result<PgQaoaOutcome> {
    if depth == 0 {
        return Err(Error::InvalidParameter("PG-QAOA needs depth at least 1"));
    }
    let env = qaoa_env(cfg, depth)?;
    let a = pg_qaoa_train_order(&env, family, false, hp, seed)?;
    let b = pg_qaoa_train_order(&env, family, true, hp, seed)?;
    Ok(if b.selection_return > a.selection_return {
        PgQaoaOutcome { best: b, other: a }
    } else {
        PgQaoaOutcome { best: a, other: b }
    })
}
