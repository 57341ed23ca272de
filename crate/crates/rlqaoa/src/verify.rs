//! Self-checks run by `rlqaoa verify`: a condensed version of the property
//! and oracle suites, cheap enough to run before every experiment batch.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rlqaoa_core::baselines::{
    cd_default_hyperparams, cd_default_search, cd_qaoa_train, grid_oracle, optimize_durations, powell_minimize,
    CdTask, DurationSearch, PowellConfig,
};
use rlqaoa_core::distributions::{
    categorical_entropy, Beta, CategoricalParams, ContinuousFamily, SigmoidGaussian, UnitDistribution, UNIT_EPS,
};
use rlqaoa_core::env::{normalize_durations, EnvConfig, Environment, NoiseConfig, NoiseKind};
use rlqaoa_core::linalg::C64;
use rlqaoa_core::policy::{AutoregressivePolicy, HybridAction, PolicyDims, StepHeads, TrajectoryWeights};
use rlqaoa_core::ppo::{train, Evaluation, PpoHyperparams, Scored, Task};
use rlqaoa_core::quantum::{
    build_ising, energy_density, energy_variance_density, evolve, ground_state, GeneratorSet, IsingParams, QuantumState,
};
use rlqaoa_core::rng::StreamRng;

/// Faults that can be planted to show the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Faults {
    /// Open the first masked layer to the current step's own input.
    pub broken_mask: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub module: &'static str,
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn run_verify(faults: Faults) -> Vec<CheckResult> {
    let checks: Vec<(&'static str, &'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("quantum-core", "unitarity", Box::new(unitarity)),
        ("quantum-core", "composition", Box::new(composition)),
        ("quantum-core", "energy conservation", Box::new(conservation)),
        ("quantum-core", "eigenstate variance", Box::new(eigenstate_variance)),
        ("quantum-core", "two-site ground state", Box::new(two_site_ground_state)),
        ("distributions", "normalization", Box::new(normalization)),
        ("distributions", "log-density gradients", Box::new(density_gradients)),
        ("distributions", "categorical entropy", Box::new(entropy_linear_space)),
        ("policy-net", "causality", Box::new(move || causality(faults))),
        ("policy-net", "path probabilities", Box::new(path_probabilities)),
        ("policy-net", "backward pass", Box::new(network_gradient)),
        ("ppo-trainer", "bandit convergence", Box::new(bandit)),
        ("rl-env", "duration normalization", Box::new(duration_normalization)),
        ("rl-env", "classical noise scale", Box::new(noise_scale)),
        ("baselines", "powell on quadratics", Box::new(powell_quadratics)),
        ("baselines", "powell vs grid oracle", Box::new(powell_vs_grid)),
        ("baselines", "sequence enumeration oracle", Box::new(enumeration_oracle)),
    ];
    checks
        .into_iter()
        .map(|(module, check, f)| {
            let t = Instant::now();
            let r = f();
            let seconds = t.elapsed().as_secs_f64();
            let (passed, detail) = match r {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { module, check, passed, detail, seconds }
        })
        .collect()
}

pub fn render(results: &[CheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        let flag = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{flag}  {:<14} {:<28} {:>7.2}s  {}", r.module, r.check, r.seconds, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.module).collect();
    let _ = writeln!(s, "{} of {} checks passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        let _ = writeln!(s, "failing modules: {}", failed.join(", "));
    }
    s
}

fn random_state(n: usize, rng: &mut StreamRng) -> QuantumState {
    let amps = (0..1usize << n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    QuantumState::normalized(n, amps).expect("nonzero amplitudes")
}

fn generators(n: usize) -> GeneratorSet {
    let ham = build_ising(&IsingParams::studied(n)).expect("valid chain");
    GeneratorSet::counterdiabatic(&ham).expect("valid chain")
}

fn unitarity() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (n, count) in [(2, 4000), (4, 3000), (6, 2000), (8, 1000)] {
        let gens = generators(n);
        for _ in 0..count {
            let s = random_state(n, &mut rng);
            let g = gens.get(rng.random_range(0..gens.len())).expect("index in range");
            let out = evolve(&s, g, rng.random_range(-5.0..5.0)).map_err(|e| e.to_string())?;
            worst = worst.max((out.norm() - 1.0).abs());
        }
    }
    ensure(worst < 1e-10, format!("max norm drift {worst:.1e} over 10^4 evolutions"))
}

fn max_diff(a: &QuantumState, b: &QuantumState) -> f64 {
    a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn composition() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(2);
    let gens = generators(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let s = random_state(6, &mut rng);
        let g = gens.get(rng.random_range(0..gens.len())).expect("index in range");
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let once = evolve(&s, g, a + b).map_err(|e| e.to_string())?;
        let twice = evolve(&evolve(&s, g, a).map_err(|e| e.to_string())?, g, b).map_err(|e| e.to_string())?;
        worst = worst.max(max_diff(&once, &twice));
    }
    ensure(worst < 1e-9, format!("max deviation {worst:.1e}"))
}

fn conservation() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(3);
    let ham = build_ising(&IsingParams::studied(6)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let s = random_state(6, &mut rng);
        let before = energy_density(&s, &ham.h, 6).map_err(|e| e.to_string())?;
        let after = energy_density(&evolve(&s, &ham.h, rng.random_range(-10.0..10.0)).map_err(|e| e.to_string())?, &ham.h, 6)
            .map_err(|e| e.to_string())?;
        worst = worst.max((after - before).abs());
    }
    ensure(worst < 1e-10, format!("max energy drift {worst:.1e}"))
}

fn eigenstate_variance() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2, 4, 6, 8] {
        let ham = build_ising(&IsingParams::studied(n)).map_err(|e| e.to_string())?;
        let (_, gs) = ground_state(&ham.h, n).map_err(|e| e.to_string())?;
        worst = worst.max(energy_variance_density(&gs, &ham.h, n).map_err(|e| e.to_string())?);
    }
    ensure(worst < 1e-8, format!("max ground-state spread {worst:.1e}"))
}

fn two_site_ground_state() -> Outcome {
    let ham = build_ising(&IsingParams::new(2, 1.0, 0.0, 0.0)).map_err(|e| e.to_string())?;
    let (e, _) = ground_state(&ham.h, 2).map_err(|e| e.to_string())?;
    ensure((e + 0.5).abs() < 1e-12, format!("E_GS = {e}"))
}

/// Composite Simpson on `[UNIT_EPS, 1 − UNIT_EPS]`.
fn mass(d: &UnitDistribution) -> f64 {
    let panels = 400_000;
    let (a, b) = (UNIT_EPS, 1.0 - UNIT_EPS);
    let h = (b - a) / panels as f64;
    let f = |x: f64| d.log_prob(x).map(f64::exp).unwrap_or(0.0);
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn normalization() -> Outcome {
    let cases = [
        (ContinuousFamily::SigmoidGaussian, 0.0, 0.5),
        (ContinuousFamily::SigmoidGaussian, 1.3, 1.0),
        (ContinuousFamily::SigmoidGaussian, -2.0, 2.0),
        (ContinuousFamily::Beta, 2.0, 3.0),
        (ContinuousFamily::Beta, 5.0, 1.5),
    ];
    let mut worst = 0.0f64;
    for (family, k, x) in cases {
        let d = UnitDistribution::new(family, k, x).map_err(|e| e.to_string())?;
        worst = worst.max((mass(&d) - 1.0).abs());
    }
    ensure(worst < 1e-6, format!("max |mass − 1| = {worst:.1e}"))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn density_gradients() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(4);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = rng.random_range(0.01..0.99);
        let (k, s) = (rng.random_range(-3.0..3.0), rng.random_range(0.05..3.0));
        let lp = |k: f64, s: f64| SigmoidGaussian::new(k, s).and_then(|d| d.log_prob(x)).unwrap_or(f64::NAN);
        let (gk, gs) = SigmoidGaussian::new(k, s).and_then(|d| d.grad_log_prob(x)).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(gk, (lp(k + h, s) - lp(k - h, s)) / (2.0 * h)));
        worst = worst.max(rel_err(gs, (lp(k, s + h) - lp(k, s - h)) / (2.0 * h)));
        let (a, b) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0));
        let lp = |a: f64, b: f64| Beta::new(a, b).and_then(|d| d.log_prob(x)).unwrap_or(f64::NAN);
        let (ga, gb) = Beta::new(a, b).and_then(|d| d.grad_log_prob(x)).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(ga, (lp(a + h, b) - lp(a - h, b)) / (2.0 * h)));
        worst = worst.max(rel_err(gb, (lp(a, b + h) - lp(a, b - h)) / (2.0 * h)));
    }
    ensure(worst < 1e-5, format!("max relative error {worst:.1e} over 400 cases"))
}

fn entropy_linear_space() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let logits: Vec<f64> = (0..5).map(|_| rng.random_range(-6.0..6.0)).collect();
        let p = CategoricalParams::from_logits(&logits).map_err(|e| e.to_string())?;
        let z: f64 = logits.iter().map(|l| l.exp()).sum();
        let linear: f64 = logits.iter().map(|l| l.exp() / z).map(|q| -q * q.ln()).sum();
        worst = worst.max((categorical_entropy(&p) - linear).abs());
    }
    ensure(worst < 1e-10, format!("max deviation {worst:.1e}"))
}

fn random_actions(steps: usize, n: usize, rng: &mut StreamRng) -> Vec<HybridAction> {
    let mut out: Vec<HybridAction> = Vec::with_capacity(steps);
    while out.len() < steps {
        let d = rng.random_range(0..n);
        if out.last().is_none_or(|a| a.discrete != d) {
            out.push(HybridAction { discrete: d, continuous: rng.random_range(0.01..0.99) });
        }
    }
    out
}

fn bits(h: &StepHeads) -> Vec<u64> {
    h.log_probs.log_probs().iter().chain(&h.kappa).chain(&h.xi).map(|v| v.to_bits()).collect()
}

fn random_policy(dims: PolicyDims, seed: u64) -> AutoregressivePolicy {
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut p = AutoregressivePolicy::new(dims, &mut rng).expect("valid dims");
    p.randomize(0.8, &mut rng);
    p
}

fn causality(faults: Faults) -> Outcome {
    let mut rng = StreamRng::seed_from_u64(6);
    for case in 0..50 {
        let mut p = random_policy(PolicyDims::new(5, 4, vec![16, 16], Some(ContinuousFamily::SigmoidGaussian)), case);
        if faults.broken_mask {
            p.inject_mask_fault();
        }
        let a = random_actions(5, 4, &mut rng);
        let base = p.heads(&a).map_err(|e| e.to_string())?;
        for j in 0..5 {
            // Change step j and everything after it, keeping the prefix.
            let mut b = a[..j].to_vec();
            while b.len() < 5 {
                let tail = random_actions(5 - j + 1, 4, &mut rng);
                b.truncate(j);
                let skip = usize::from(j > 0 && tail[0].discrete == a[j - 1].discrete);
                b.extend_from_slice(&tail[skip..skip + 5 - j]);
            }
            let other = p.heads(&b).map_err(|e| e.to_string())?;
            for k in 0..=j {
                if bits(&base[k]) != bits(&other[k]) {
                    return Err(format!("output at step {k} depends on action {j} (case {case})"));
                }
            }
        }
    }
    Ok("50 networks, every step's heads independent of current and later actions".into())
}

fn path_probabilities() -> Outcome {
    let p = random_policy(PolicyDims::new(3, 4, vec![9, 9], None), 7);
    let mut total = 0.0;
    for code in 0..64usize {
        let seq = [code % 4, code / 4 % 4, code / 16];
        if seq[0] == seq[1] || seq[1] == seq[2] {
            continue;
        }
        let actions: Vec<HybridAction> = seq.iter().map(|&d| HybridAction { discrete: d, continuous: 1.0 }).collect();
        total += p.forward_trajectory(&actions).map_err(|e| e.to_string())?.log_prob_discrete.exp();
    }
    ensure((total - 1.0).abs() < 1e-10, format!("sum over 36 paths = {total:.15}"))
}

fn network_gradient() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for family in [ContinuousFamily::SigmoidGaussian, ContinuousFamily::Beta] {
        let p = random_policy(PolicyDims::new(2, 3, vec![4], Some(family)), 9);
        let a = random_actions(2, 3, &mut rng);
        let w = TrajectoryWeights { discrete: 0.7, continuous: -0.4, entropy: 0.3 };
        let f = |q: &AutoregressivePolicy| {
            let c = q.forward_trajectory(&a).expect("valid actions");
            w.discrete * c.log_prob_discrete + w.continuous * c.log_prob_continuous + w.entropy * c.entropy
        };
        let mut g = p.zero_grads();
        p.backward(&p.forward_trajectory(&a).map_err(|e| e.to_string())?, w, &mut g).map_err(|e| e.to_string())?;
        for i in 0..p.n_params() {
            let (mut up, mut dn) = (p.clone(), p.clone());
            up.params_mut()[i] += 1e-6;
            dn.params_mut()[i] -= 1e-6;
            let fd = (f(&up) - f(&dn)) / 2e-6;
            worst = worst.max((fd - g[i]).abs() / (fd.abs().max(g[i].abs()) + 1e-4));
        }
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.1e}"))
}

struct Bandit;

impl Task for Bandit {
    fn score(&mut self, _: usize, batch: &[rlqaoa_core::policy::Trajectory]) -> rlqaoa_core::Result<Vec<Scored>> {
        Ok(batch
            .iter()
            .map(|t| {
                let r = if t.actions[0].discrete == 0 { 1.0 } else { 0.0 };
                let reward = rlqaoa_core::env::Reward { noisy_return: r, clean_return: r, clean_energy_ratio: r };
                Scored { reward, durations: vec![] }
            })
            .collect())
    }

    fn evaluate(&mut self, policy: &AutoregressivePolicy) -> rlqaoa_core::Result<Evaluation> {
        let indices: Vec<usize> = policy.greedy_actions()?.iter().map(|a| a.discrete).collect();
        let r = if indices[0] == 0 { 1.0 } else { 0.0 };
        let reward = rlqaoa_core::env::Reward { noisy_return: r, clean_return: r, clean_energy_ratio: r };
        Ok(Evaluation { reward, indices, durations: vec![] })
    }
}

/// Probability of arm 0 after 100 iterations on a two-armed bandit.
pub fn bandit_probability() -> rlqaoa_core::Result<f64> {
    let hp = bandit_hyperparams();
    let out = train(&mut Bandit, PolicyDims::new(1, 2, vec![8], None), &hp, 1, &mut ())?;
    Ok(out.policy.forward(&[])?.log_probs.log_probs()[0].exp())
}

/// Discrete-only PPO with a step size large enough to settle in 100 iterations.
pub fn bandit_hyperparams() -> PpoHyperparams {
    PpoHyperparams { batch_size: 32, lr: 2e-2, eps_discrete: 0.2, entropy_temp: 0.0, iterations: 100, eval_every: 10, ..Default::default() }
}

fn bandit() -> Outcome {
    let p = bandit_probability().map_err(|e| e.to_string())?;
    ensure(p > 0.99, format!("P(arm 0) = {p:.6} after 100 iterations"))
}

fn duration_normalization() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let raw: Vec<f64> = (0..8).map(|_| rng.random_range(UNIT_EPS..1.0)).collect();
        let scale = rng.random_range(0.01..100.0);
        let a = normalize_durations(&raw, 10.0).map_err(|e| e.to_string())?;
        let b = normalize_durations(&raw.iter().map(|r| r * scale).collect::<Vec<_>>(), 10.0).map_err(|e| e.to_string())?;
        worst = worst.max((a.iter().sum::<f64>() - 10.0).abs());
        worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    ensure(worst < 1e-9, format!("max deviation {worst:.1e}"))
}

fn noise_scale() -> Outcome {
    let cfg = EnvConfig { noise: NoiseConfig { kind: NoiseKind::ClassicalGaussian, strength: 0.3 }, ..EnvConfig::studied(4) };
    let env = Environment::new(cfg).map_err(|e| e.to_string())?;
    let mut rng = StreamRng::seed_from_u64(11);
    let seq = [0, 1, 2, 0, 3, 4, 1, 0];
    let n = 10_000;
    let xs: Vec<f64> = (0..n)
        .map(|_| env.rollout_parts(&seq, &[0.5; 8], &mut rng).map(|r| r.noisy_return - r.clean_return))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let target = 0.3 * env.ground_energy_density().abs();
    ensure((std / target - 1.0).abs() < 0.03, format!("std {std:.5} vs {target:.5}"))
}

fn powell_quadratics() -> Outcome {
    let mut rng = StreamRng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for dim in 2..=8 {
        // f(x) = ½ (x − c)ᵀ A (x − c) with A = BᵀB + I.
        let b: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let a: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| (0..dim).map(|k| b[k][i] * b[k][j]).sum::<f64>() + f64::from(u8::from(i == j))).collect())
            .collect();
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&c).map(|(x, c)| x - c).collect();
            0.5 * (0..dim).map(|i| d[i] * (0..dim).map(|j| a[i][j] * d[j]).sum::<f64>()).sum::<f64>()
        };
        let cfg = PowellConfig { lower: -10.0, upper: 10.0, x_tol: 1e-9, f_tol: 1e-14, line_tol: 1e-10, ..Default::default() };
        let r = powell_minimize(f, &vec![0.0; dim], &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(r.x.iter().zip(&c).map(|(x, c)| (x - c).abs()).fold(0.0, f64::max));
    }
    ensure(worst < 1e-5, format!("max ∞-norm error {worst:.1e} for dims 2..8"))
}

fn powell_vs_grid() -> Outcome {
    let cfg = EnvConfig { steps: 2, actions: vec!["H1".into(), "H2".into(), "Y".into()], ..EnvConfig::studied(4) };
    let env = Environment::new(cfg).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for seq in [[0, 1], [1, 0], [2, 0], [1, 2]] {
        let grid = grid_oracle(&env, &seq, 101).map_err(|e| e.to_string())?;
        let powell = optimize_durations(&env, &seq, &DurationSearch::default(), 0, 0).map_err(|e| e.to_string())?;
        worst = worst.max(grid.ratio - powell.clean_ratio);
    }
    ensure(worst <= 1e-3, format!("grid best − powell ≤ {worst:.1e}"))
}

fn enumeration_oracle() -> Outcome {
    let cfg = EnvConfig { steps: 2, actions: vec!["H1".into(), "H2".into(), "Y".into()], ..EnvConfig::studied(4) };
    let search = cd_default_search();
    let mut oracle = CdTask::new(Environment::new(cfg.clone()).map_err(|e| e.to_string())?, search.clone(), 0);
    let mut best = (f64::NEG_INFINITY, vec![]);
    for a in 0..3 {
        for b in (0..3).filter(|&b| b != a) {
            let r = oracle.solve_clean(&[a, b]).map_err(|e| e.to_string())?;
            if r.clean_ratio > best.0 {
                best = (r.clean_ratio, vec![a, b]);
            }
        }
    }
    let hp = PpoHyperparams { batch_size: 16, iterations: 30, hidden: vec![16, 16], ..cd_default_hyperparams() };
    let out = cd_qaoa_train(&cfg, &search, &hp, 0, &mut ()).map_err(|e| e.to_string())?;
    let picked = out.train.best.map(|b| b.1.indices).unwrap_or_default();
    ensure(picked == best.1, format!("selected {picked:?}, exhaustive best {:?} ({:.6})", best.1, best.0))
}
