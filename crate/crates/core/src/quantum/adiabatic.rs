use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::ising::{build_ising, IsingParams};
use super::state::QuantumState;
use crate::linalg::C64;
use crate::{Error, Result};

/// Default integration step in units of `1/J`.
pub const ADIABATIC_DT: f64 = 1e-3;

/// `λ(t) = sin²(πt / 2T)`.
pub fn schedule(t: f64, total: f64) -> f64 {
    let s = libm::sin(PI * t / (2.0 * total));
    s * s
}

/// `dλ/dt = (π / 2T)·sin(πt / T)`.
pub fn schedule_rate(t: f64, total: f64) -> f64 {
    PI / (2.0 * total) * libm::sin(PI * t / total)
}

/// Propagates `|↑…↑⟩` under `H(λ) = λ(t)·H + (1 − λ(t))·H̃`, `H̃ = −Σ_i S^z_i`.
///
/// Each step of length `dt` (the final one possibly shorter) uses the
/// Hamiltonian frozen at the step midpoint; its exponential is applied by a
/// Taylor series summed to machine precision.
pub fn adiabatic_evolve(params: &IsingParams, total: f64, dt: f64) -> Result<QuantumState> {
    if !(dt > 0.0) || !(total > 0.0) {
        return Err(Error::InvalidParameter("adiabatic time and step must be positive"));
    }
    if dt >= total {
        return Err(Error::StepTooLarge { dt, total });
    }
    let ham = build_ising(params)?;
    let n = params.n_sites;
    let dim = params.dim();
    // H̃ is diagonal: −(number of up spins − number of down spins)/2.
    let initial_diag: Vec<f64> =
        (0..dim).map(|b| -(n as f64 - 2.0 * b.count_ones() as f64) / 2.0).collect();

    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[0] = C64::new(1.0, 0.0);
    let mut term = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    let mut h_term = vec![C64::new(0.0, 0.0); dim];

    let steps = libm::ceil(total / dt - 1e-9) as usize;
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let t1 = ((k + 1) as f64 * dt).min(total);
        let h_step = t1 - t0;
        let lambda = schedule(0.5 * (t0 + t1), total);

        // psi ← Σ_m (−i·h_step·H(λ))^m / m! · psi
        term.copy_from_slice(&psi);
        for m in 1..64 {
            ham.h.matrix().matvec_into(&term, &mut h_term);
            let factor = C64::new(0.0, -h_step / m as f64);
            let mut size = 0.0;
            for b in 0..dim {
                let hb = h_term[b] * lambda + term[b] * ((1.0 - lambda) * initial_diag[b]);
                next[b] = hb * factor;
                size += next[b].norm_sqr();
            }
            core::mem::swap(&mut term, &mut next);
            for (p, t) in psi.iter_mut().zip(&term) {
                *p += t;
            }
            if size < 1e-34 {
                break;
            }
        }
    }
    QuantumState::normalized(n, psi)
}
