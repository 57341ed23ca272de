use rand::{Rng, SeedableRng};
use rlqaoa_core::distributions::ContinuousFamily;
use rlqaoa_core::env::{EnvConfig, Environment, Reward};
use rlqaoa_core::policy::*;
use rlqaoa_core::ppo::*;
use rlqaoa_core::rng::StreamRng;
use rlqaoa_core::Result;

fn tiny_policy(family: Option<ContinuousFamily>, seed: u64) -> AutoregressivePolicy {
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut p = AutoregressivePolicy::new(PolicyDims::new(2, 3, vec![4, 4], family), &mut rng).unwrap();
    p.randomize(0.7, &mut rng);
    p
}

fn nudge(p: &AutoregressivePolicy, scale: f64, rng: &mut StreamRng) -> AutoregressivePolicy {
    let mut q = p.clone();
    for (i, x) in q.params_mut().iter_mut().enumerate() {
        if p.params()[i] != 0.0 {
            *x += rng.random_range(-scale..scale);
        }
    }
    q
}

fn batch_from(old: &AutoregressivePolicy, advantages: Vec<f64>, rng: &mut StreamRng) -> TrajectoryBatch {
    let trajectories: Vec<Trajectory> = advantages.iter().map(|_| old.sample_trajectory(rng).unwrap()).collect();
    let dummy = Reward { noisy_return: 0.0, clean_return: 0.0, clean_energy_ratio: 0.0 };
    let scored = trajectories.iter().map(|_| Scored { reward: dummy, durations: vec![] }).collect();
    TrajectoryBatch { trajectories, scored, returns: advantages.clone(), advantages }
}

fn objective(p: &AutoregressivePolicy, batch: &TrajectoryBatch, hp: &PpoHyperparams, temp: f64) -> (f64, Vec<f64>) {
    let mut g = p.zero_grads();
    let stats = hybrid_objective(p, batch, hp, temp, &mut g).unwrap();
    (stats.objective, g)
}

fn ratios(p: &AutoregressivePolicy, batch: &TrajectoryBatch) -> Vec<(f64, f64)> {
    batch
        .trajectories
        .iter()
        .map(|t| {
            let (d, c) = p.log_prob(t).unwrap();
            ((d - t.log_prob_discrete).exp(), (c - t.log_prob_continuous).exp())
        })
        .collect()
}

#[test]
fn objective_gradient_matches_finite_differences() {
    let mut rng = StreamRng::seed_from_u64(2024);
    let hp = PpoHyperparams { eps_discrete: 0.05, eps_continuous: 0.1, ..Default::default() };
    let mut checked = 0;
    for family in [ContinuousFamily::SigmoidGaussian, ContinuousFamily::Beta] {
        for case in 0..10 {
            let old = tiny_policy(Some(family), 500 + case);
            let adv: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let batch = batch_from(&old, adv, &mut rng);
            let p = nudge(&old, 0.05, &mut rng);
            // The surrogate has kinks at the clip boundaries; keep away from them.
            let near_kink = ratios(&p, &batch).iter().any(|&(d, c)| {
                [1.0 - hp.eps_discrete, 1.0 + hp.eps_discrete].iter().any(|b| (d - b).abs() < 1e-4)
                    || [1.0 - hp.eps_continuous, 1.0 + hp.eps_continuous].iter().any(|b| (c - b).abs() < 1e-4)
            });
            if near_kink {
                continue;
            }
            let (_, g) = objective(&p, &batch, &hp, 0.3);
            for _ in 0..12 {
                let i = rng.random_range(0..p.n_params());
                let h = 1e-6;
                let mut up = p.clone();
                up.params_mut()[i] += h;
                let mut dn = p.clone();
                dn.params_mut()[i] -= h;
                let fd = (objective(&up, &batch, &hp, 0.3).0 - objective(&dn, &batch, &hp, 0.3).0) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-4 * fd.abs().max(g[i].abs()) + 1e-8, "{family:?} case {case} param {i}: {fd} vs {}", g[i]);
                checked += 1;
            }
        }
    }
    assert!(checked >= 200, "only {checked} comparisons");
}

#[test]
fn objective_at_old_parameters_is_mean_advantage() {
    let mut rng = StreamRng::seed_from_u64(3);
    let hp = PpoHyperparams::default();
    for family in [Some(ContinuousFamily::SigmoidGaussian), None] {
        let old = tiny_policy(family, 8);
        let adv: Vec<f64> = (0..16).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mean = adv.iter().sum::<f64>() / adv.len() as f64;
        let batch = batch_from(&old, adv, &mut rng);
        // Both factor terms equal A_k when ρ = 1.
        let (j, _) = objective(&old, &batch, &hp, 0.0);
        assert!((j - 2.0 * mean).abs() < 1e-12, "{j} vs {}", 2.0 * mean);
    }
}

#[test]
fn tiny_discrete_clip_freezes_discrete_head() {
    let mut rng = StreamRng::seed_from_u64(17);
    let hp = PpoHyperparams { eps_discrete: 1e-8, ..Default::default() };
    let old = tiny_policy(Some(ContinuousFamily::SigmoidGaussian), 41);
    let probe = batch_from(&old, vec![1.0; 16], &mut rng);
    let p = nudge(&old, 0.05, &mut rng);
    // Give each trajectory the advantage sign that makes its clip bind.
    let adv: Vec<f64> = ratios(&p, &probe).iter().map(|&(d, _)| if d > 1.0 { 1.0 } else { -1.0 }).collect();
    assert!(ratios(&p, &probe).iter().all(|&(d, _)| (d - 1.0).abs() > 1e-6));
    let batch = TrajectoryBatch { advantages: adv.clone(), returns: adv, ..probe };
    let (_, g) = objective(&p, &batch, &hp, 0.0);
    let tensors = p.tensors();
    let head = tensors.iter().filter(|(n, _)| n.starts_with("head.p")).flat_map(|(_, r)| r.clone());
    let worst = head.map(|i| g[i].abs()).fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    // The continuous factor is still being trained.
    assert!(g.iter().any(|v| v.abs() > 1e-6));
}

#[test]
fn shifted_returns_and_baseline_give_same_update() {
    let mut rng = StreamRng::seed_from_u64(5);
    let hp = PpoHyperparams::default();
    let old = tiny_policy(Some(ContinuousFamily::Beta), 2);
    let p = nudge(&old, 0.05, &mut rng);
    let returns: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..0.0)).collect();
    let shift = 7.25;
    let mut a = EmaBaseline { value: -0.4, m: 0.95 };
    let mut b = EmaBaseline { value: -0.4 + shift, m: 0.95 };
    let adv_a = a.advantages(&returns);
    let adv_b = b.advantages(&returns.iter().map(|r| r + shift).collect::<Vec<_>>());
    assert!((a.value + shift - b.value).abs() < 1e-12);
    let base = batch_from(&old, adv_a.clone(), &mut StreamRng::seed_from_u64(9));
    let shifted = TrajectoryBatch { advantages: adv_b, ..base.clone() };
    let (ja, ga) = objective(&p, &base, &hp, 0.1);
    let (jb, gb) = objective(&p, &shifted, &hp, 0.1);
    assert!((ja - jb).abs() < 1e-10);
    assert!(ga.iter().zip(&gb).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn ratios_stay_near_trust_region_over_epochs() {
    let mut rng = StreamRng::seed_from_u64(12);
    let hp = PpoHyperparams { eps_discrete: 0.02, eps_continuous: 0.1, ..Default::default() };
    let mut p = AutoregressivePolicy::new(PolicyDims::new(4, 5, vec![32, 32], Some(ContinuousFamily::SigmoidGaussian)), &mut rng).unwrap();
    for _ in 0..5 {
        let adv: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let batch = batch_from(&p, adv, &mut rng);
        let mut adam = Adam::new(p.n_params());
        for _ in 0..hp.epochs {
            let (_, g) = objective(&p, &batch, &hp, 0.0);
            adam.step(p.params_mut(), &g, hp.lr).unwrap();
            for (k, &(d, c)) in ratios(&p, &batch).iter().enumerate() {
                let a = batch.advantages[k];
                assert!((d - 1.0).abs() <= hp.eps_discrete + 0.05 || !clip_is_active(d, a, hp.eps_discrete), "{d}");
                assert!((c - 1.0).abs() <= hp.eps_continuous + 0.05 || !clip_is_active(c, a, hp.eps_continuous), "{c}");
            }
        }
    }
}

/// Arm 0 pays 1, arm 1 pays nothing.
struct Bandit;

impl Task for Bandit {
    fn score(&mut self, _iteration: usize, batch: &[Trajectory]) -> Result<Vec<Scored>> {
        Ok(batch
            .iter()
            .map(|t| {
                let r = if t.actions[0].discrete == 0 { 1.0 } else { 0.0 };
                Scored { reward: Reward { noisy_return: r, clean_return: r, clean_energy_ratio: r }, durations: vec![] }
            })
            .collect())
    }

    fn evaluate(&mut self, policy: &AutoregressivePolicy) -> Result<Evaluation> {
        let indices: Vec<usize> = policy.greedy_actions()?.iter().map(|a| a.discrete).collect();
        let r = if indices[0] == 0 { 1.0 } else { 0.0 };
        Ok(Evaluation { reward: Reward { noisy_return: r, clean_return: r, clean_energy_ratio: r }, indices, durations: vec![] })
    }
}

struct ArmProbability(Vec<f64>);

impl Observer for ArmProbability {
    fn on_iteration(&mut self, _record: &IterationRecord, state: TrainerState<'_>) {
        self.0.push(state.policy.forward(&[]).unwrap().log_probs.log_probs()[0].exp());
    }
}

#[test]
fn bandit_learns_the_paying_arm() {
    let hp = PpoHyperparams {
        batch_size: 32,
        lr: 2e-2,
        eps_discrete: 0.2,
        entropy_temp: 0.0,
        iterations: 100,
        eval_every: 10,
        ..Default::default()
    };
    let mut obs = ArmProbability(vec![]);
    let out = train(&mut Bandit, PolicyDims::new(1, 2, vec![8], None), &hp, 1, &mut obs).unwrap();
    let probs = obs.0;
    assert!(probs.windows(2).all(|w| w[1] > w[0]), "{probs:?}");
    assert!(probs[99] > 0.99, "{}", probs[99]);
    assert_eq!(out.final_eval.indices, vec![0]);
}

#[test]
fn entropy_bonus_alone_drives_policy_to_uniform() {
    struct Flat;
    impl Task for Flat {
        fn score(&mut self, _: usize, batch: &[Trajectory]) -> Result<Vec<Scored>> {
            let zero = Reward { noisy_return: 0.0, clean_return: 0.0, clean_energy_ratio: 0.0 };
            Ok(batch.iter().map(|_| Scored { reward: zero, durations: vec![] }).collect())
        }
        fn evaluate(&mut self, policy: &AutoregressivePolicy) -> Result<Evaluation> {
            let indices = policy.greedy_actions()?.iter().map(|a| a.discrete).collect();
            let zero = Reward { noisy_return: 0.0, clean_return: 0.0, clean_energy_ratio: 0.0 };
            Ok(Evaluation { reward: zero, indices, durations: vec![] })
        }
    }
    let hp = PpoHyperparams {
        batch_size: 32,
        lr: 1e-2,
        eps_discrete: 0.2,
        entropy_temp: 10.0,
        entropy_decay: 1.0,
        iterations: 150,
        eval_every: 50,
        ..Default::default()
    };
    let mut rng = StreamRng::seed_from_u64(0);
    let mut start = AutoregressivePolicy::new(PolicyDims::new(3, 4, vec![16], None), &mut rng).unwrap();
    start.randomize(1.5, &mut rng);
    let out = train_from(&mut Flat, start, &hp, 4, &mut ()).unwrap();
    let first = out.records[0].entropy;
    let last = out.records.last().unwrap().entropy;
    assert!(first < 4f64.ln() - 0.05, "start already uniform: {first}");
    assert!((last - 4f64.ln()).abs() < 1e-2, "{last}");
}

#[test]
fn training_is_reproducible_and_history_best_is_monotone() {
    let mut cfg = EnvConfig::studied(4);
    cfg.steps = 3;
    let env = Environment::new(cfg).unwrap();
    let hp = PpoHyperparams { batch_size: 16, hidden: vec![16, 16], iterations: 12, eval_every: 4, ..Default::default() };
    let dims = PolicyDims::new(3, env.n_actions(), hp.hidden.clone(), Some(hp.family));
    let run = || train(&mut HybridTask::new(env.clone(), 77), dims.clone(), &hp, 77, &mut ()).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.records, b.records);
    assert_eq!(a.policy, b.policy);
    assert!(a.records.windows(2).all(|w| w[1].history_best_ratio >= w[0].history_best_ratio));
    let best = a.history_best.unwrap();
    assert_eq!(best.0, a.records.last().unwrap().history_best_ratio);
    assert!((best.2.iter().sum::<f64>() - 10.0).abs() < 1e-12);
}
