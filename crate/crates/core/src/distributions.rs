//! Action distributions: a masked categorical over generators and two
//! families on the unit interval for raw durations.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::special::{digamma_unchecked, log_gamma_unchecked};
use crate::{Error, Result};

/// Continuous samples and inputs are kept inside `[UNIT_EPS, 1 − UNIT_EPS]`.
pub const UNIT_EPS: f64 = 1e-6;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(UNIT_EPS, 1.0 - UNIT_EPS)
}

pub fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + libm::exp(-y))
    } else {
        let e = libm::exp(y);
        e / (1.0 + e)
    }
}

pub fn logit(x: f64) -> f64 {
    libm::log(x) - libm::log1p(-x)
}

fn check_unit(x: f64) -> Result<f64> {
    let c = clamp_unit(x);
    if x > 0.0 && x < 1.0 {
        Ok(c)
    } else {
        Err(Error::OutsideUnitInterval(x))
    }
}

/// `log Σ exp(v)` over the entries with `allowed[i]` (all entries when `None`).
pub fn log_sum_exp(v: &[f64], allowed: Option<&[bool]>) -> f64 {
    let ok = |i: usize| allowed.is_none_or(|m| m[i]);
    let max = v.iter().enumerate().filter(|&(i, _)| ok(i)).map(|(_, &x)| x).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = v.iter().enumerate().filter(|&(i, _)| ok(i)).map(|(_, &x)| libm::exp(x - max)).sum();
    max + libm::log(s)
}

/// Normalized log-probabilities of a categorical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalParams {
    log_probs: Vec<f64>,
}

impl CategoricalParams {
    pub const NORM_TOL: f64 = 1e-8;

    /// Log-softmax of raw logits.
    pub fn from_logits(logits: &[f64]) -> Result<Self> {
        let lse = log_sum_exp(logits, None);
        if !lse.is_finite() {
            return Err(Error::InvalidParameter("logits must contain a finite entry and no +inf/NaN"));
        }
        Ok(Self { log_probs: logits.iter().map(|&z| z - lse).collect() })
    }

    pub fn from_log_probs(log_probs: Vec<f64>) -> Result<Self> {
        let lse = log_sum_exp(&log_probs, None);
        if !(lse.abs() <= Self::NORM_TOL) {
            return Err(Error::NotNormalized(lse));
        }
        Ok(Self { log_probs })
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    /// Log-probability of `index` after renormalizing over `allowed`.
    pub fn masked_log_prob(&self, index: usize, allowed: &[bool]) -> Result<f64> {
        if !allowed.iter().any(|&a| a) {
            return Err(Error::AllMasked);
        }
        if index >= self.len() || !allowed[index] {
            return Err(Error::InvalidParameter("action is masked or out of range"));
        }
        Ok(self.log_probs[index] - log_sum_exp(&self.log_probs, Some(allowed)))
    }
}

/// Draws an index with probability proportional to `exp(log_probs)` over the
/// allowed entries.
pub fn categorical_sample<R: Rng + ?Sized>(p: &CategoricalParams, allowed: &[bool], rng: &mut R) -> Result<usize> {
    if allowed.len() != p.len() {
        return Err(Error::ShapeMismatch("mask length"));
    }
    let lse = log_sum_exp(&p.log_probs, Some(allowed));
    if lse == f64::NEG_INFINITY {
        return Err(Error::AllMasked);
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (i, &lp) in p.log_probs.iter().enumerate() {
        if !allowed[i] {
            continue;
        }
        let w = libm::exp(lp - lse);
        if w > 0.0 {
            last = Some(i);
        }
        acc += w;
        if u < acc && w > 0.0 {
            return Ok(i);
        }
    }
    // Rounding left `acc` slightly below one.
    last.ok_or(Error::AllMasked)
}

/// `−Σ_k exp(z_k)·z_k`, with `0·log 0 = 0`.
pub fn categorical_entropy(p: &CategoricalParams) -> f64 {
    -p.log_probs.iter().filter(|z| z.is_finite()).map(|&z| libm::exp(z) * z).sum::<f64>()
}

/// Which family parameterizes the raw durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ContinuousFamily {
    #[default]
    SigmoidGaussian,
    Beta,
}

/// Sigmoid of a Gaussian with location `kappa` and scale `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidGaussian {
    pub kappa: f64,
    pub xi: f64,
}

impl SigmoidGaussian {
    pub fn new(kappa: f64, xi: f64) -> Result<Self> {
        if !(xi > 0.0) || !kappa.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidParameter("sigmoid-gaussian needs finite kappa and xi > 0"));
        }
        Ok(Self { kappa, xi })
    }

    pub fn log_prob(&self, x: f64) -> Result<f64> {
        let x = check_unit(x)?;
        let u = (logit(x) - self.kappa) / self.xi;
        Ok(-libm::log(self.xi) - HALF_LN_2PI - 0.5 * u * u - libm::log(x) - libm::log1p(-x))
    }

    /// `(∂/∂κ, ∂/∂ξ)` of [`Self::log_prob`].
    pub fn grad_log_prob(&self, x: f64) -> Result<(f64, f64)> {
        let x = check_unit(x)?;
        let d = logit(x) - self.kappa;
        let xi2 = self.xi * self.xi;
        Ok((d / xi2, -1.0 / self.xi + d * d / (xi2 * self.xi)))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        clamp_unit(sigmoid(self.kappa + self.xi * z))
    }

    /// `sigmoid(κ)`, the median.
    pub fn median(&self) -> f64 {
        sigmoid(self.kappa)
    }
}

/// Beta distribution with shapes `kappa` and `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta {
    pub kappa: f64,
    pub xi: f64,
}

impl Beta {
    pub fn new(kappa: f64, xi: f64) -> Result<Self> {
        if !(kappa > 0.0 && xi > 0.0) || !kappa.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidParameter("beta shapes must be positive and finite"));
        }
        Ok(Self { kappa, xi })
    }

    pub fn log_prob(&self, x: f64) -> Result<f64> {
        let x = check_unit(x)?;
        let (a, b) = (self.kappa, self.xi);
        Ok(log_gamma_unchecked(a + b) - log_gamma_unchecked(a) - log_gamma_unchecked(b)
            + (a - 1.0) * libm::log(x)
            + (b - 1.0) * libm::log1p(-x))
    }

    pub fn grad_log_prob(&self, x: f64) -> Result<(f64, f64)> {
        let x = check_unit(x)?;
        let (a, b) = (self.kappa, self.xi);
        let common = digamma_unchecked(a + b);
        Ok((common - digamma_unchecked(a) + libm::log(x), common - digamma_unchecked(b) + libm::log1p(-x)))
    }

    /// Ratio of two Gamma variates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Shapes were validated in `new`, so construction cannot fail.
        let ga = Gamma::new(self.kappa, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0);
        let gb = Gamma::new(self.xi, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0);
        let sum = ga + gb;
        if sum > 0.0 && sum.is_finite() {
            clamp_unit(ga / sum)
        } else {
            // Both variates underflowed; only possible for tiny shapes.
            clamp_unit(self.mean())
        }
    }

    pub fn mean(&self) -> f64 {
        self.kappa / (self.kappa + self.xi)
    }
}

/// Either family behind one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitDistribution {
    SigmoidGaussian(SigmoidGaussian),
    Beta(Beta),
}

impl UnitDistribution {
    pub fn new(family: ContinuousFamily, kappa: f64, xi: f64) -> Result<Self> {
        Ok(match family {
            ContinuousFamily::SigmoidGaussian => Self::SigmoidGaussian(SigmoidGaussian::new(kappa, xi)?),
            ContinuousFamily::Beta => Self::Beta(Beta::new(kappa, xi)?),
        })
    }

    pub fn log_prob(&self, x: f64) -> Result<f64> {
        match self {
            Self::SigmoidGaussian(d) => d.log_prob(x),
            Self::Beta(d) => d.log_prob(x),
        }
    }

    pub fn grad_log_prob(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Self::SigmoidGaussian(d) => d.grad_log_prob(x),
            Self::Beta(d) => d.grad_log_prob(x),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::SigmoidGaussian(d) => d.sample(rng),
            Self::Beta(d) => d.sample(rng),
        }
    }

    /// The deterministic value used for greedy evaluation: the median for
    /// the sigmoid-Gaussian, the mean for the Beta.
    pub fn greedy_value(&self) -> f64 {
        clamp_unit(match self {
            Self::SigmoidGaussian(d) => d.median(),
            Self::Beta(d) => d.mean(),
        })
    }
}
