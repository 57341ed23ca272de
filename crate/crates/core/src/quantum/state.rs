use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::C64;
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Normalized amplitude vector over the `2^N` computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<C64>,
    n_sites: usize,
}

impl QuantumState {
    /// `|↑…↑⟩`, the z-polarized product state.
    pub fn all_up(n_sites: usize) -> Self {
        Self::basis(n_sites, 0)
    }

    pub fn basis(n_sites: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_sites];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, n_sites }
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch { expected: 1 << n_sites, found: amplitudes.len() });
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, n_sites })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::DimensionMismatch { expected: 1 << n_sites, found: amplitudes.len() });
        }
        let norm = norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes, n_sites })
    }

    pub(crate) fn from_raw(n_sites: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_sites);
        Self { amplitudes, n_sites }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Euclidean distance between amplitude vectors (phase sensitive).
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let d: f64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok(libm::sqrt(d))
    }
}

fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}
