use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::masked::{block, block_end, MaskedDense};
use crate::distributions::{
    categorical_entropy, categorical_sample, log_sum_exp, CategoricalParams, ContinuousFamily, UnitDistribution,
};
use crate::{Error, Result};

/// Range of the sigmoid-Gaussian scale head after the exponential.
pub const XI_RANGE: (f64, f64) = (1e-4, 10.0);
/// Range of both Beta shape heads after the exponential.
pub const BETA_SHAPE_RANGE: (f64, f64) = (0.05, 100.0);
/// Continuous value carried by every action of a discrete-only policy.
pub const DISCRETE_ONLY_VALUE: f64 = 1.0;

/// Architecture of an [`AutoregressivePolicy`].
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyDims {
    /// Episode length `q`.
    pub steps: usize,
    /// Number of generators.
    pub n_actions: usize,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Continuous family, or `None` for a discrete-only policy.
    pub family: Option<ContinuousFamily>,
}

impl PolicyDims {
    pub fn new(steps: usize, n_actions: usize, hidden: Vec<usize>, family: Option<ContinuousFamily>) -> Self {
        Self { steps, n_actions, hidden, family }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("policy needs at least one step"));
        }
        if self.n_actions == 0 || (self.steps > 1 && self.n_actions < 2) {
            return Err(Error::InvalidParameter("repeat mask needs at least two actions"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidParameter("hidden layers must be nonempty"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.steps * self.n_actions
    }
}

/// One sampled step: a generator index and a raw duration in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HybridAction {
    pub discrete: usize,
    pub continuous: f64,
}

/// Input encoding of one action: `continuous` at position `discrete`, zeros elsewhere.
pub fn embed(action: HybridAction, size: usize) -> Result<Vec<f64>> {
    if action.discrete >= size {
        return Err(Error::InvalidGenerator { index: action.discrete, len: size });
    }
    let mut v = vec![0.0; size];
    v[action.discrete] = action.continuous;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub actions: Vec<HybridAction>,
    pub log_prob_discrete: f64,
    pub log_prob_continuous: f64,
}

impl Trajectory {
    pub fn discrete(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.discrete).collect()
    }

    pub fn continuous(&self) -> Vec<f64> {
        self.actions.iter().map(|a| a.continuous).collect()
    }
}

/// Head outputs at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepHeads {
    /// Unmasked normalized log-probabilities.
    pub log_probs: CategoricalParams,
    /// Per-action continuous parameters; empty for a discrete-only policy.
    pub kappa: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Per-trajectory coefficients of the scalar whose gradient
/// [`AutoregressivePolicy::backward`] accumulates:
/// `discrete·log π^d + continuous·log π^c + entropy·Σ_j S_j`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrajectoryWeights {
    pub discrete: f64,
    pub continuous: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
struct Workspace {
    input: Vec<f64>,
    hidden: Vec<Vec<f64>>,
    p_raw: Vec<f64>,
    kappa_raw: Vec<f64>,
    xi_raw: Vec<f64>,
}

/// Activations of one trajectory under the current parameters.
#[derive(Debug, Clone)]
pub struct TrajectoryCache {
    actions: Vec<HybridAction>,
    ws: Workspace,
    pub log_prob_discrete: f64,
    pub log_prob_continuous: f64,
    /// Sum over steps of the unmasked head entropy.
    pub entropy: f64,
}

impl TrajectoryCache {
    pub fn actions(&self) -> &[HybridAction] {
        &self.actions
    }
}

/// Masked autoregressive policy over hybrid actions.
///
/// Hidden layer units are split into `q` contiguous blocks; block `j` of
/// the first layer sees the embedded actions of steps `< j`, deeper blocks
/// see the blocks `≤ j` of the layer below, and the heads of step `j` read
/// blocks `≤ j` of the last hidden layer. Outputs at step `j` therefore
/// never depend on actions at steps `≥ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoregressivePolicy {
    dims: PolicyDims,
    params: Vec<f64>,
    layers: Vec<MaskedDense>,
    head_p: MaskedDense,
    head_kappa: Option<MaskedDense>,
    head_xi: Option<MaskedDense>,
}

fn clamp_exp(raw: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    let e = libm::exp(raw);
    if e < lo {
        (lo, 0.0)
    } else if e > hi {
        (hi, 0.0)
    } else {
        (e, e)
    }
}

/// Maps raw head outputs to `(κ, ξ, dκ/draw, dξ/draw)`: Beta shapes are
/// both clamped exponentials, the sigmoid-Gaussian keeps `κ` raw.
pub fn shape_params(family: ContinuousFamily, kappa_raw: f64, xi_raw: f64) -> (f64, f64, f64, f64) {
    match family {
        ContinuousFamily::Beta => {
            let (k, dk) = clamp_exp(kappa_raw, BETA_SHAPE_RANGE);
            let (x, dx) = clamp_exp(xi_raw, BETA_SHAPE_RANGE);
            (k, x, dk, dx)
        }
        ContinuousFamily::SigmoidGaussian => {
            let (x, dx) = clamp_exp(xi_raw, XI_RANGE);
            (kappa_raw, x, 1.0, dx)
        }
    }
}

impl AutoregressivePolicy {
    /// Glorot-uniform base weights, zero biases and zero head weights: the
    /// initial discrete policy is uniform and the continuous heads sit at
    /// their neutral values.
    pub fn new<R: Rng + ?Sized>(dims: PolicyDims, rng: &mut R) -> Result<Self> {
        let mut policy = Self::zeroed(dims)?;
        for layer in &policy.layers {
            let limit = libm::sqrt(6.0 / (layer.in_dim + layer.out_dim) as f64);
            for r in 0..layer.out_dim {
                for c in 0..layer.fan_in[r] {
                    policy.params[layer.weight + r * layer.in_dim + c] = rng.random_range(-limit..limit);
                }
            }
        }
        Ok(policy)
    }

    /// Rebuilds a policy from a flat parameter vector.
    pub fn from_params(dims: PolicyDims, params: Vec<f64>) -> Result<Self> {
        let mut policy = Self::zeroed(dims)?;
        if params.len() != policy.params.len() {
            return Err(Error::DimensionMismatch { expected: policy.params.len(), found: params.len() });
        }
        for layer in policy.all_layers() {
            for r in 0..layer.out_dim {
                let row = &params[layer.weight + r * layer.in_dim..][..layer.in_dim];
                if row[layer.fan_in[r]..].iter().any(|&w| w != 0.0) {
                    return Err(Error::InvalidParameter("masked weight is nonzero"));
                }
            }
        }
        policy.params = params;
        Ok(policy)
    }

    fn zeroed(dims: PolicyDims) -> Result<Self> {
        dims.validate()?;
        let q = dims.steps;
        let a = dims.n_actions;
        let mut offset = 0;
        let mut make = |in_dim: usize, out_dim: usize, fan_in: Vec<usize>| {
            let layer = MaskedDense { in_dim, out_dim, weight: offset, bias: offset + in_dim * out_dim, fan_in };
            offset += layer.n_params();
            layer
        };
        let mut layers = Vec::with_capacity(dims.hidden.len());
        let mut in_dim = dims.input_dim();
        // Prefix of the previous space visible to step `j`.
        let mut prefix: Vec<usize> = (0..q).map(|j| j * a).collect();
        for &width in &dims.hidden {
            let fan_in = (0..width).map(|u| prefix[u * q / width]).collect();
            layers.push(make(in_dim, width, fan_in));
            in_dim = width;
            prefix = (0..q).map(|j| block_end(j, width, q)).collect();
        }
        let head_fan_in: Vec<usize> = (0..q * a).map(|r| prefix[r / a]).collect();
        let head_p = make(in_dim, q * a, head_fan_in.clone());
        let (head_kappa, head_xi) = if dims.family.is_some() {
            (Some(make(in_dim, q * a, head_fan_in.clone())), Some(make(in_dim, q * a, head_fan_in)))
        } else {
            (None, None)
        };
        Ok(Self { dims, params: vec![0.0; offset], layers, head_p, head_kappa, head_xi })
    }

    fn all_layers(&self) -> impl Iterator<Item = &MaskedDense> {
        self.layers.iter().chain(Some(&self.head_p)).chain(self.head_kappa.as_ref()).chain(self.head_xi.as_ref())
    }

    pub fn dims(&self) -> &PolicyDims {
        &self.dims
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn zero_grads(&self) -> Vec<f64> {
        vec![0.0; self.params.len()]
    }

    /// Named parameter tensors as ranges into [`Self::params`].
    pub fn tensors(&self) -> Vec<(String, Range<usize>)> {
        let mut out = Vec::new();
        let mut push = |name: String, l: &MaskedDense| {
            out.push((format!("{name}.weight"), l.weight_range()));
            out.push((format!("{name}.bias"), l.bias_range()));
        };
        for (i, l) in self.layers.iter().enumerate() {
            push(format!("base.{i}"), l);
        }
        push("head.p".into(), &self.head_p);
        if let Some(l) = &self.head_kappa {
            push("head.kappa".into(), l);
        }
        if let Some(l) = &self.head_xi {
            push("head.xi".into(), l);
        }
        out
    }

    /// Name of the first tensor holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<String> {
        self.tensors().into_iter().find(|(_, r)| self.params[r.clone()].iter().any(|x| !x.is_finite())).map(|t| t.0)
    }

    /// Whether weight `(row, col)` of the tensor is free (not masked out).
    /// `layer` indexes the hidden layers followed by the heads.
    pub fn is_connected(&self, layer: usize, row: usize, col: usize) -> bool {
        self.all_layers().nth(layer).is_some_and(|l| l.is_connected(row, col))
    }

    /// Sets every free (unmasked) parameter, biases included, to a uniform
    /// draw from `[-scale, scale]`.
    pub fn randomize<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) {
        let layers: Vec<MaskedDense> = self.all_layers().cloned().collect();
        for l in &layers {
            for r in 0..l.out_dim {
                for c in 0..l.fan_in[r] {
                    self.params[l.weight + r * l.in_dim + c] = rng.random_range(-scale..scale);
                }
                self.params[l.bias + r] = rng.random_range(-scale..scale);
            }
        }
    }

    /// Opens every masked connection of the first layer and gives it a
    /// nonzero weight. Only useful to demonstrate that the causality checks
    /// catch a broken mask.
    #[doc(hidden)]
    pub fn inject_mask_fault(&mut self) {
        let target = self.layers.first_mut().unwrap_or(&mut self.head_p);
        for r in 0..target.out_dim {
            for c in target.fan_in[r]..target.in_dim {
                self.params[target.weight + r * target.in_dim + c] = 0.5;
            }
            target.fan_in[r] = target.in_dim;
        }
    }

    fn workspace(&self) -> Workspace {
        let qa = self.dims.input_dim();
        let cont = if self.dims.family.is_some() { qa } else { 0 };
        Workspace {
            input: vec![0.0; qa],
            hidden: self.dims.hidden.iter().map(|&w| vec![0.0; w]).collect(),
            p_raw: vec![0.0; qa],
            kappa_raw: vec![0.0; cont],
            xi_raw: vec![0.0; cont],
        }
    }

    /// Computes every unit belonging to `step`; earlier steps must be done
    /// and the inputs of steps `< step` set.
    fn advance(&self, ws: &mut Workspace, step: usize) {
        let q = self.dims.steps;
        let p = &self.params;
        for (i, layer) in self.layers.iter().enumerate() {
            let rows = block(step, layer.out_dim, q);
            let (below, rest) = ws.hidden.split_at_mut(i);
            let input: &[f64] = if i == 0 { &ws.input } else { &below[i - 1] };
            let out = &mut rest[0];
            layer.forward_rows(p, input, out, rows.clone());
            for v in &mut out[rows] {
                *v = v.max(0.0);
            }
        }
        let last: &[f64] = ws.hidden.last().map_or(&ws.input, |h| h.as_slice());
        let a = self.dims.n_actions;
        let rows = step * a..(step + 1) * a;
        self.head_p.forward_rows(p, last, &mut ws.p_raw, rows.clone());
        if let (Some(hk), Some(hx)) = (&self.head_kappa, &self.head_xi) {
            hk.forward_rows(p, last, &mut ws.kappa_raw, rows.clone());
            hx.forward_rows(p, last, &mut ws.xi_raw, rows);
        }
    }

    fn continuous_params(&self, kappa_raw: f64, xi_raw: f64) -> (f64, f64, f64, f64) {
        shape_params(self.dims.family.unwrap_or_default(), kappa_raw, xi_raw)
    }

    fn step_heads(&self, ws: &Workspace, step: usize) -> Result<StepHeads> {
        let a = self.dims.n_actions;
        let rows = step * a..(step + 1) * a;
        let log_probs = CategoricalParams::from_logits(&ws.p_raw[rows.clone()])?;
        let (mut kappa, mut xi) = (Vec::new(), Vec::new());
        if self.dims.family.is_some() {
            for r in rows {
                let (k, x, _, _) = self.continuous_params(ws.kappa_raw[r], ws.xi_raw[r]);
                kappa.push(k);
                xi.push(x);
            }
        }
        Ok(StepHeads { log_probs, kappa, xi })
    }

    fn distribution(&self, heads: &StepHeads, action: usize) -> Result<Option<UnitDistribution>> {
        match self.dims.family {
            Some(f) => UnitDistribution::new(f, heads.kappa[action], heads.xi[action]).map(Some),
            None => Ok(None),
        }
    }

    fn mask(&self, previous: Option<usize>) -> Vec<bool> {
        (0..self.dims.n_actions).map(|k| Some(k) != previous).collect()
    }

    fn set_input(&self, ws: &mut Workspace, step: usize, action: HybridAction) {
        let a = self.dims.n_actions;
        let block = &mut ws.input[step * a..(step + 1) * a];
        block.fill(0.0);
        block[action.discrete] = action.continuous;
    }

    /// Head outputs at step `prefix.len()` given the earlier actions.
    pub fn forward(&self, prefix: &[HybridAction]) -> Result<StepHeads> {
        let step = prefix.len();
        if step >= self.dims.steps {
            return Err(Error::InvalidParameter("prefix covers every step"));
        }
        self.check_actions(prefix)?;
        let mut ws = self.workspace();
        for (j, &act) in prefix.iter().enumerate() {
            self.set_input(&mut ws, j, act);
        }
        for j in 0..=step {
            self.advance(&mut ws, j);
        }
        self.step_heads(&ws, step)
    }

    /// Head outputs at every step from one pass with all `q` inputs set.
    ///
    /// With an intact mask, entry `j` equals `forward(&actions[..j])`; this
    /// is the form in which a leaking mask becomes visible.
    pub fn heads(&self, actions: &[HybridAction]) -> Result<Vec<StepHeads>> {
        if actions.len() != self.dims.steps {
            return Err(Error::ShapeMismatch("trajectory length"));
        }
        self.check_actions(actions)?;
        let mut ws = self.workspace();
        for (j, &act) in actions.iter().enumerate() {
            self.set_input(&mut ws, j, act);
        }
        (0..self.dims.steps)
            .map(|j| {
                self.advance(&mut ws, j);
                self.step_heads(&ws, j)
            })
            .collect()
    }

    fn check_actions(&self, actions: &[HybridAction]) -> Result<()> {
        for (j, act) in actions.iter().enumerate() {
            if act.discrete >= self.dims.n_actions {
                return Err(Error::InvalidGenerator { index: act.discrete, len: self.dims.n_actions });
            }
            if j > 0 && actions[j - 1].discrete == act.discrete {
                return Err(Error::RepeatedAction { step: j - 1, action: act.discrete });
            }
            if !act.continuous.is_finite() {
                return Err(Error::InvalidParameter("non-finite continuous action"));
            }
        }
        Ok(())
    }

    /// Ancestral sampling of a full trajectory.
    pub fn sample_trajectory<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Trajectory> {
        let mut ws = self.workspace();
        let mut actions = Vec::with_capacity(self.dims.steps);
        let (mut lp_d, mut lp_c) = (0.0, 0.0);
        let mut previous = None;
        for j in 0..self.dims.steps {
            self.advance(&mut ws, j);
            let heads = self.step_heads(&ws, j)?;
            let mask = self.mask(previous);
            let d = categorical_sample(&heads.log_probs, &mask, rng)?;
            lp_d += heads.log_probs.masked_log_prob(d, &mask)?;
            let c = match self.distribution(&heads, d)? {
                Some(dist) => {
                    let c = dist.sample(rng);
                    lp_c += dist.log_prob(c)?;
                    c
                }
                None => DISCRETE_ONLY_VALUE,
            };
            let act = HybridAction { discrete: d, continuous: c };
            self.set_input(&mut ws, j, act);
            actions.push(act);
            previous = Some(d);
        }
        Ok(Trajectory { actions, log_prob_discrete: lp_d, log_prob_continuous: lp_c })
    }

    /// Runs the network on stored actions, keeping activations for [`Self::backward`].
    pub fn forward_trajectory(&self, actions: &[HybridAction]) -> Result<TrajectoryCache> {
        if actions.len() != self.dims.steps {
            return Err(Error::ShapeMismatch("trajectory length"));
        }
        self.check_actions(actions)?;
        let mut ws = self.workspace();
        for (j, &act) in actions.iter().enumerate() {
            self.set_input(&mut ws, j, act);
        }
        let (mut lp_d, mut lp_c, mut entropy) = (0.0, 0.0, 0.0);
        let mut previous = None;
        for (j, act) in actions.iter().enumerate() {
            self.advance(&mut ws, j);
            let heads = self.step_heads(&ws, j)?;
            let mask = self.mask(previous);
            lp_d += heads.log_probs.masked_log_prob(act.discrete, &mask)?;
            entropy += categorical_entropy(&heads.log_probs);
            if let Some(dist) = self.distribution(&heads, act.discrete)? {
                lp_c += dist.log_prob(act.continuous)?;
            }
            previous = Some(act.discrete);
        }
        Ok(TrajectoryCache { actions: actions.to_vec(), ws, log_prob_discrete: lp_d, log_prob_continuous: lp_c, entropy })
    }

    /// `(log π^d, log π^c)` of stored actions.
    pub fn log_prob(&self, traj: &Trajectory) -> Result<(f64, f64)> {
        let c = self.forward_trajectory(&traj.actions)?;
        Ok((c.log_prob_discrete, c.log_prob_continuous))
    }

    /// Adds the gradient of the weighted scalar (see [`TrajectoryWeights`])
    /// into `grads`.
    pub fn backward(&self, cache: &TrajectoryCache, w: TrajectoryWeights, grads: &mut [f64]) -> Result<()> {
        if grads.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), found: grads.len() });
        }
        if cache.ws.p_raw.len() != self.dims.input_dim() || cache.ws.hidden.len() != self.layers.len() {
            return Err(Error::ShapeMismatch("activation cache does not match the policy"));
        }
        let a = self.dims.n_actions;
        let qa = self.dims.input_dim();
        let ws = &cache.ws;
        let mut d_p = vec![0.0; qa];
        let cont = self.dims.family.is_some();
        let mut d_k = vec![0.0; if cont { qa } else { 0 }];
        let mut d_x = vec![0.0; if cont { qa } else { 0 }];
        let mut previous = None;
        for (j, act) in cache.actions.iter().enumerate() {
            let rows = j * a..(j + 1) * a;
            let z = &ws.p_raw[rows.clone()];
            let mask = self.mask(previous);
            let lse_all = log_sum_exp(z, None);
            let lse_masked = log_sum_exp(z, Some(&mask));
            let log_p: Vec<f64> = z.iter().map(|v| v - lse_all).collect();
            let s: f64 = -log_p.iter().map(|&l| libm::exp(l) * l).sum::<f64>();
            for k in 0..a {
                let pm = if mask[k] { libm::exp(z[k] - lse_masked) } else { 0.0 };
                let ind = if k == act.discrete { 1.0 } else { 0.0 };
                let p = libm::exp(log_p[k]);
                d_p[j * a + k] = w.discrete * (ind - pm) - w.entropy * p * (log_p[k] + s);
            }
            if cont && w.continuous != 0.0 {
                let r = j * a + act.discrete;
                let (kappa, xi, dk, dx) = self.continuous_params(ws.kappa_raw[r], ws.xi_raw[r]);
                let family = self.dims.family.unwrap_or_default();
                let (gk, gx) = UnitDistribution::new(family, kappa, xi)?.grad_log_prob(act.continuous)?;
                d_k[r] = w.continuous * gk * dk;
                d_x[r] = w.continuous * gx * dx;
            }
            previous = Some(act.discrete);
        }

        let p = &self.params;
        let last: &[f64] = ws.hidden.last().map_or(&ws.input, |h| h.as_slice());
        let mut d_last = vec![0.0; last.len()];
        let want_input_grad = !self.layers.is_empty();
        let d_in = want_input_grad.then_some(d_last.as_mut_slice());
        self.head_p.backward(p, last, &d_p, grads, d_in);
        if let (Some(hk), Some(hx)) = (&self.head_kappa, &self.head_xi) {
            hk.backward(p, last, &d_k, grads, want_input_grad.then_some(d_last.as_mut_slice()));
            hx.backward(p, last, &d_x, grads, want_input_grad.then_some(d_last.as_mut_slice()));
        }
        let mut d_out = d_last;
        for i in (0..self.layers.len()).rev() {
            for (g, &h) in d_out.iter_mut().zip(&ws.hidden[i]) {
                if h <= 0.0 {
                    *g = 0.0;
                }
            }
            let input: &[f64] = if i == 0 { &ws.input } else { &ws.hidden[i - 1] };
            if i == 0 {
                self.layers[0].backward(p, input, &d_out, grads, None);
                break;
            }
            let mut d_below = vec![0.0; input.len()];
            self.layers[i].backward(p, input, &d_out, grads, Some(&mut d_below));
            d_out = d_below;
        }
        Ok(())
    }

    /// Per step: the most probable allowed generator (lowest index on ties)
    /// and the deterministic continuous value at that generator.
    pub fn greedy_actions(&self) -> Result<Vec<HybridAction>> {
        let mut ws = self.workspace();
        let mut actions = Vec::with_capacity(self.dims.steps);
        let mut previous = None;
        for j in 0..self.dims.steps {
            self.advance(&mut ws, j);
            let heads = self.step_heads(&ws, j)?;
            let mut best: Option<usize> = None;
            for (k, &lp) in heads.log_probs.log_probs().iter().enumerate() {
                if Some(k) == previous {
                    continue;
                }
                if best.is_none_or(|b| lp > heads.log_probs.log_probs()[b]) {
                    best = Some(k);
                }
            }
            let d = best.ok_or(Error::AllMasked)?;
            let c = match self.distribution(&heads, d)? {
                Some(dist) => dist.greedy_value(),
                None => DISCRETE_ONLY_VALUE,
            };
            let act = HybridAction { discrete: d, continuous: c };
            self.set_input(&mut ws, j, act);
            actions.push(act);
            previous = Some(d);
        }
        Ok(actions)
    }
}
