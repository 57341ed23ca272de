use alloc::vec::Vec;

use once_cell::race::OnceBox;

use super::ising::GeneratorSet;
use super::state::QuantumState;
use crate::linalg::{hermitian_eigen, CMatrix, Eigen, C64};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Dense Hermitian matrix with a lazily computed, cached eigendecomposition.
///
/// The cache is filled at most once per operator and is safe to share
/// across threads; call [`HermitianOperator::warm`] before handing the
/// operator to many workers to avoid redundant first-use work.
#[derive(Debug)]
pub struct HermitianOperator {
    matrix: CMatrix,
    eigen: OnceBox<Eigen>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let eigen = OnceBox::new();
        if let Some(e) = self.eigen.get() {
            let _ = eigen.set(alloc::boxed::Box::new(e.clone()));
        }
        Self { matrix: self.matrix.clone(), eigen }
    }
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let err = matrix.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
        Ok(Self { matrix, eigen: OnceBox::new() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| alloc::boxed::Box::new(hermitian_eigen(&self.matrix)))
    }

    pub fn is_warm(&self) -> bool {
        self.eigen.get().is_some()
    }

    /// Forces the eigendecomposition.
    pub fn warm(&self) -> &Self {
        self.eigen();
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen().values
    }

    /// `H·v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.matvec(v)
    }

    /// `⟨ψ|H|ψ⟩` including the (rounding-level) imaginary part.
    pub fn expectation(&self, state: &QuantumState) -> Result<C64> {
        self.check_dim(state.dim())?;
        let hv = self.apply(state.amplitudes());
        Ok(state.amplitudes().iter().zip(&hv).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }

    /// In-place `amps ← e^{−i·duration·H}·amps`; `scratch` is resized as needed.
    pub fn evolve_in_place(&self, amps: &mut [C64], duration: f64, scratch: &mut Vec<C64>) -> Result<()> {
        self.check_dim(amps.len())?;
        if duration == 0.0 {
            return Ok(());
        }
        let eig = self.eigen();
        scratch.resize(amps.len(), C64::new(0.0, 0.0));
        eig.vectors_adj.matvec_into(amps, scratch);
        for (w, &lambda) in scratch.iter_mut().zip(&eig.values) {
            let (s, c) = libm::sincos(-lambda * duration);
            *w *= C64::new(c, s);
        }
        eig.vectors.matvec_into(scratch, amps);
        Ok(())
    }
}

/// `e^{−i·duration·G}|state⟩`. Negative durations are applied as given.
pub fn evolve(state: &QuantumState, generator: &HermitianOperator, duration: f64) -> Result<QuantumState> {
    let mut amps = state.amplitudes().to_vec();
    let mut scratch = Vec::new();
    generator.evolve_in_place(&mut amps, duration, &mut scratch)?;
    Ok(QuantumState::from_raw(state.n_sites(), amps))
}

/// Ordered `(generator index, duration)` steps whose durations sum to `total_t`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Protocol {
    steps: Vec<(usize, f64)>,
    total_t: f64,
}

impl Protocol {
    pub const SUM_TOL: f64 = 1e-9;

    /// Validates the duration sum, sign and the no-consecutive-repeat rule.
    pub fn new(steps: Vec<(usize, f64)>, total_t: f64) -> Result<Self> {
        for (i, w) in steps.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(Error::RepeatedAction { step: i, action: w[0].0 });
            }
        }
        if steps.iter().any(|&(_, d)| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter("durations must be finite and nonnegative"));
        }
        let sum: f64 = steps.iter().map(|s| s.1).sum();
        if (sum - total_t).abs() > Self::SUM_TOL {
            return Err(Error::InvalidParameter("durations do not sum to the protocol time"));
        }
        Ok(Self { steps, total_t })
    }

    /// Builds from parallel index/duration lists.
    pub fn from_parts(indices: &[usize], durations: &[f64], total_t: f64) -> Result<Self> {
        if indices.len() != durations.len() {
            return Err(Error::ShapeMismatch("protocol indices vs durations"));
        }
        Self::new(indices.iter().copied().zip(durations.iter().copied()).collect(), total_t)
    }

    pub fn empty() -> Self {
        Self { steps: Vec::new(), total_t: 0.0 }
    }

    pub fn steps(&self) -> &[(usize, f64)] {
        &self.steps
    }

    pub fn total_t(&self) -> f64 {
        self.total_t
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Applies steps in order (the first step acts first). Durations are used
/// verbatim, so this also serves perturbed, non-normalized step lists.
pub fn apply_steps(initial: &QuantumState, steps: &[(usize, f64)], gens: &GeneratorSet) -> Result<QuantumState> {
    let mut amps = initial.amplitudes().to_vec();
    let mut scratch = Vec::with_capacity(amps.len());
    for &(index, duration) in steps {
        let g = gens.get(index)?;
        g.evolve_in_place(&mut amps, duration, &mut scratch)?;
    }
    Ok(QuantumState::from_raw(initial.n_sites(), amps))
}

pub fn apply_protocol(initial: &QuantumState, protocol: &Protocol, gens: &GeneratorSet) -> Result<QuantumState> {
    apply_steps(initial, protocol.steps(), gens)
}

/// `Re⟨ψ|H|ψ⟩ / N`.
pub fn energy_density(state: &QuantumState, h: &HermitianOperator, n_sites: usize) -> Result<f64> {
    let e = h.expectation(state)?;
    debug_assert!(e.im.abs() < 1e-10 * (1.0 + e.re.abs()));
    Ok(e.re / n_sites as f64)
}

/// `sqrt(⟨H²⟩ − ⟨H⟩²) / N`, computed as `‖(H − ⟨H⟩)ψ‖ / N` so that
/// eigenstates give zero to rounding instead of the square root of a
/// cancellation residual.
pub fn energy_variance_density(state: &QuantumState, h: &HermitianOperator, n_sites: usize) -> Result<f64> {
    if state.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: state.dim() });
    }
    let amps = state.amplitudes();
    let hv = h.apply(amps);
    let mean: f64 = amps.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
    let spread: f64 = hv.iter().zip(amps).map(|(b, a)| (b - a * mean).norm_sqr()).sum();
    Ok(libm::sqrt(spread) / n_sites as f64)
}

/// Lowest eigenvalue and its eigenvector (largest-magnitude amplitude real positive).
pub fn ground_state(h: &HermitianOperator, n_sites: usize) -> Result<(f64, QuantumState)> {
    let dim = h.dim();
    if dim != 1 << n_sites {
        return Err(Error::DimensionMismatch { expected: 1 << n_sites, found: dim });
    }
    let eig = h.eigen();
    let amps = eig.vector(0);
    Ok((eig.values[0], QuantumState::from_raw(n_sites, amps)))
}
