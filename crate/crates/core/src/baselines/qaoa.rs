use alloc::vec::Vec;

use rand::Rng;

use super::powell::{powell_minimize, PowellConfig};
use crate::distributions::UNIT_EPS;
use crate::env::{EnvConfig, Environment};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// `H1, H2` alternation of length `len`, starting with `H2` when `h2_first`.
pub fn alternating(len: usize, h2_first: bool) -> Vec<usize> {
    (0..len).map(|j| (j + usize::from(h2_first)) % 2).collect()
}

/// Environment restricted to `{H1, H2}` with `2·depth` steps.
pub fn qaoa_env(cfg: &EnvConfig, depth: usize) -> Result<Environment> {
    let mut c = cfg.clone();
    c.actions = ["H1", "H2"].iter().map(|s| (*s).into()).collect();
    c.steps = (2 * depth).max(1);
    Environment::new(c)
}

/// Powell search over raw durations of a fixed sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DurationSearch {
    /// Random starting points (the first is the uniform point when `uniform_start`).
    pub restarts: usize,
    /// Restarts on a noisy objective, when different. Noisy callers usually
    /// solve the same sequence many times, which already acts as restarts.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub noisy_restarts: Option<usize>,
    pub uniform_start: bool,
    pub powell: PowellConfig,
}

impl Default for DurationSearch {
    fn default() -> Self {
        Self {
            restarts: 10,
            noisy_restarts: None,
            uniform_start: false,
            powell: PowellConfig { lower: UNIT_EPS, max_evals: 20_000, ..PowellConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub raw: Vec<f64>,
    pub durations: Vec<f64>,
    /// Best objective value seen by the search (noisy when the environment is).
    pub objective: f64,
    pub clean_ratio: f64,
    pub evals: usize,
}

/// Minimizes the (possibly noisy) energy density of `sequence` over raw
/// durations. Noise is drawn from stream `(seed, tag)`, fresh per evaluation.
pub fn optimize_durations(
    env: &Environment,
    sequence: &[usize],
    search: &DurationSearch,
    seed: u64,
    tag: u64,
) -> Result<SearchResult> {
    if sequence.is_empty() {
        return Err(Error::InvalidParameter("empty sequence"));
    }
    let n = sequence.len();
    let clean = env.config().noise.is_clean();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evals = 0;
    let mut failure = None;
    let restarts = if clean { search.restarts } else { search.noisy_restarts.unwrap_or(search.restarts) };
    for restart in 0..restarts.max(1) {
        let mut start_rng = stream(seed, Stream::Restarts, tag, restart as u64);
        let x0: Vec<f64> = if restart == 0 && search.uniform_start {
            alloc::vec![0.5; n]
        } else {
            (0..n).map(|_| start_rng.random_range(search.powell.lower..=search.powell.upper)).collect()
        };
        let mut noise = stream(seed, Stream::Inner, tag, restart as u64);
        let objective = |raw: &[f64]| -> f64 {
            let r = if clean {
                env.clean_energy(sequence, raw)
            } else {
                env.rollout_parts(sequence, raw, &mut noise).map(|r| -r.noisy_return)
            };
            r.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::INFINITY
            })
        };
        let res = powell_minimize(objective, &x0, &search.powell)?;
        evals += res.evals;
        if best.as_ref().is_none_or(|b| res.f < b.0) {
            best = Some((res.f, res.x));
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let (objective, raw) = best.ok_or(Error::InvalidParameter("no restarts"))?;
    let durations = crate::env::normalize_durations(&raw, env.config().total_t)?;
    let clean_ratio = env.clean_ratio(sequence, &raw)?;
    Ok(SearchResult { raw, durations, objective, clean_ratio, evals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaResult {
    /// Generator sequence over the configured action set labels.
    pub labels: Vec<&'static str>,
    pub durations: Vec<f64>,
    pub clean_ratio: f64,
    /// Whether the chosen order applies `H2` first.
    pub h2_first: bool,
    pub evals: usize,
}

/// QAOA at depth `p`: Powell over `2p` durations for both alternation
/// orders, keeping the better (by the objective the optimizer saw).
pub fn qaoa_optimize(cfg: &EnvConfig, depth: usize, search: &DurationSearch, seed: u64) -> Result<QaoaResult> {
    let env = qaoa_env(cfg, depth)?;
    if depth == 0 {
        return Ok(QaoaResult {
            labels: Vec::new(),
            durations: Vec::new(),
            clean_ratio: env.initial_ratio()?,
            h2_first: false,
            evals: 0,
        });
    }
    let mut best: Option<(bool, SearchResult)> = None;
    let mut evals = 0;
    for h2_first in [false, true] {
        let seq = alternating(2 * depth, h2_first);
        let r = optimize_durations(&env, &seq, search, seed, u64::from(h2_first))?;
        evals += r.evals;
        if best.as_ref().is_none_or(|b| r.objective < b.1.objective) {
            best = Some((h2_first, r));
        }
    }
    let (h2_first, r) = best.ok_or(Error::InvalidParameter("no orders"))?;
    let labels = alternating(2 * depth, h2_first).into_iter().map(|i| ["H1", "H2"][i]).collect();
    Ok(QaoaResult { labels, durations: r.durations, clean_ratio: r.clean_ratio, h2_first, evals })
}
