use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::powell::PowellConfig;
use super::qaoa::{optimize_durations, DurationSearch, SearchResult};
use crate::distributions::UNIT_EPS;
use crate::env::{EnvConfig, Environment};
use crate::policy::{AutoregressivePolicy, PolicyDims, Trajectory};
use crate::ppo::{map_indexed, train, Evaluation, Observer, PpoHyperparams, Scored, Task, TrainOutcome};
use crate::rng::{stream, Stream};
use crate::Result;

/// Restart tags at or above this value belong to greedy evaluations.
const EVAL_TAG_BASE: u64 = 1 << 48;

/// Inner solve used by CD-QAOA. Noise-free solves are memoized, so each
/// sequence can afford as many restarts as the QAOA baseline; with fewer,
/// long protocols often miss the optimum QAOA finds on the same alternating
/// sequence. Noisy runs re-solve every sample and use fewer. The first
/// restart starts from uniform durations, and the budget per restart is
/// looser than QAOA's.
pub fn cd_default_search() -> DurationSearch {
    DurationSearch {
        restarts: 10,
        noisy_restarts: Some(3),
        uniform_start: true,
        powell: PowellConfig { lower: UNIT_EPS, x_tol: 1e-5, max_evals: 5_000, ..PowellConfig::default() },
    }
}

/// Discrete PPO settings for CD-QAOA. Every sample costs a Powell solve, so
/// the batch is smaller and the steps larger than for RL-QAOA. Reward gaps
/// between solved sequences are around 1e-2, so the entropy bonus is scaled
/// down to match.
pub fn cd_default_hyperparams() -> PpoHyperparams {
    PpoHyperparams {
        batch_size: 32,
        lr: 1e-2,
        eps_discrete: 0.1,
        entropy_temp: 0.01,
        iterations: 300,
        eval_every: 10,
        ..PpoHyperparams::default()
    }
}

/// Scores sampled sequences by solving their durations with Powell.
///
/// Without noise the solution of a sequence never changes, so solves are
/// memoized. With noise every sample gets its own solve on the noisy
/// objective, and the reward is a fresh noisy rollout at the solution.
#[derive(Debug, Clone)]
pub struct CdTask {
    env: Environment,
    search: DurationSearch,
    seed: u64,
    memo: BTreeMap<Vec<usize>, SearchResult>,
    evaluations: u64,
    /// Objective evaluations spent in inner solves.
    pub inner_evals: usize,
}

impl CdTask {
    pub fn new(env: Environment, search: DurationSearch, seed: u64) -> Self {
        Self { env, search, seed, memo: BTreeMap::new(), evaluations: 0, inner_evals: 0 }
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// Sequences solved so far (noise-free runs only).
    pub fn solved(&self) -> usize {
        self.memo.len()
    }

    fn code(&self, seq: &[usize]) -> u64 {
        let n = self.env.n_actions() as u64;
        seq.iter().rev().fold(0u64, |acc, &d| acc.wrapping_mul(n).wrapping_add(d as u64))
    }

    /// Solves (or recalls) the durations of `seq` without noise.
    pub fn solve_clean(&mut self, seq: &[usize]) -> Result<SearchResult> {
        if let Some(r) = self.memo.get(seq) {
            return Ok(r.clone());
        }
        let r = optimize_durations(&self.env, seq, &self.search, self.seed, self.code(seq))?;
        self.inner_evals += r.evals;
        self.memo.insert(seq.to_vec(), r.clone());
        Ok(r)
    }
}

impl Task for CdTask {
    fn score(&mut self, iteration: usize, batch: &[Trajectory]) -> Result<Vec<Scored>> {
        let seqs: Vec<Vec<usize>> = batch.iter().map(Trajectory::discrete).collect();
        if self.env.config().noise.is_clean() {
            let mut fresh: Vec<Vec<usize>> = seqs.iter().filter(|s| !self.memo.contains_key(*s)).cloned().collect();
            fresh.sort();
            fresh.dedup();
            let (env, search, seed) = (&self.env, &self.search, self.seed);
            let codes: Vec<u64> = fresh.iter().map(|s| self.code(s)).collect();
            let solved = map_indexed(&fresh, |i, s| optimize_durations(env, s, search, seed, codes[i]))?;
            for (s, r) in fresh.into_iter().zip(solved) {
                self.inner_evals += r.evals;
                self.memo.insert(s, r);
            }
            return seqs
                .iter()
                .map(|s| {
                    let r = &self.memo[s];
                    Ok(Scored { reward: self.env.clean_reward(s, &r.raw)?, durations: r.durations.clone() })
                })
                .collect();
        }
        let (env, search, seed) = (&self.env, &self.search, self.seed);
        let width = batch.len() as u64;
        let out = map_indexed(&seqs, |k, s| {
            let tag = iteration as u64 * width + k as u64;
            let r = optimize_durations(env, s, search, seed, tag)?;
            let mut noise = stream(seed, Stream::Noise, iteration as u64, k as u64);
            let reward = env.rollout_parts(s, &r.raw, &mut noise)?;
            Ok((Scored { reward, durations: r.durations }, r.evals))
        })?;
        Ok(out
            .into_iter()
            .map(|(s, evals)| {
                self.inner_evals += evals;
                s
            })
            .collect())
    }

    /// Solves the greedy sequence the way training does (on the noisy
    /// objective when noise is on) and reports the clean result.
    fn evaluate(&mut self, policy: &AutoregressivePolicy) -> Result<Evaluation> {
        let indices: Vec<usize> = policy.greedy_actions()?.iter().map(|a| a.discrete).collect();
        let r = if self.env.config().noise.is_clean() {
            self.solve_clean(&indices)?
        } else {
            let tag = EVAL_TAG_BASE + self.evaluations;
            let r = optimize_durations(&self.env, &indices, &self.search, self.seed, tag)?;
            self.inner_evals += r.evals;
            r
        };
        self.evaluations += 1;
        let reward = self.env.clean_reward(&indices, &r.raw)?;
        Ok(Evaluation { reward, indices, durations: r.durations })
    }
}

#[derive(Debug, Clone)]
pub struct CdQaoaOutcome {
    pub train: TrainOutcome,
    pub inner_evals: usize,
    /// Distinct sequences solved (noise-free runs only).
    pub solved: usize,
}

/// CD-QAOA: discrete-only PPO over generator sequences with Powell durations.
pub fn cd_qaoa_train<O: Observer>(
    cfg: &EnvConfig,
    search: &DurationSearch,
    hp: &PpoHyperparams,
    seed: u64,
    observer: &mut O,
) -> Result<CdQaoaOutcome> {
    let env = Environment::new(cfg.clone())?;
    let dims = PolicyDims::new(cfg.steps, env.n_actions(), hp.hidden.clone(), None);
    let mut task = CdTask::new(env, search.clone(), seed);
    let train = train(&mut task, dims, hp, seed, observer)?;
    Ok(CdQaoaOutcome { train, inner_evals: task.inner_evals, solved: task.solved() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    #[test]
    fn memoized_solves_are_reused() {
        let cfg = EnvConfig { steps: 2, actions: ["H1", "H2", "Y"].map(String::from).to_vec(), ..EnvConfig::studied(2) };
        let mut task = CdTask::new(Environment::new(cfg).unwrap(), cd_default_search(), 1);
        let a = task.solve_clean(&[0, 2]).unwrap();
        let spent = task.inner_evals;
        let b = task.solve_clean(&[0, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(task.inner_evals, spent);
        assert_eq!(task.solved(), 1);
    }

    #[test]
    fn sampled_sequences_never_repeat_actions() {
        let cfg = EnvConfig { steps: 4, ..EnvConfig::studied(2) };
        let hp = PpoHyperparams { batch_size: 8, iterations: 3, hidden: alloc::vec![8], ..cd_default_hyperparams() };
        let out = cd_qaoa_train(&cfg, &cd_default_search(), &hp, 5, &mut ()).unwrap();
        let (_, seq, durations) = out.train.history_best.unwrap();
        assert!(seq.windows(2).all(|w| w[0] != w[1]));
        assert!((durations.iter().sum::<f64>() - cfg.total_t).abs() < 1e-9);
        assert!(out.solved >= 1);
    }
}
