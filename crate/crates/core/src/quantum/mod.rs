//! Exact state-vector simulation of the periodic spin-1/2 chain.
//!
//! Basis convention: site `i` is bit `i` of the basis index, bit value 0 is
//! spin up (`S^z = +1/2`), so `|↑…↑⟩` is index 0. Spin operators are Pauli
//! matrices halved.

mod adiabatic;
mod ising;
mod operator;
mod state;

pub use adiabatic::{adiabatic_evolve, schedule, schedule_rate, ADIABATIC_DT};
pub use ising::{build_gauge_terms, build_ising, GeneratorSet, IsingHamiltonian, IsingParams, GAUGE_LABELS, MAX_SITES};
pub use operator::{
    apply_protocol, apply_steps, energy_density, energy_variance_density, evolve, ground_state, HermitianOperator, Protocol,
};
pub use state::{fidelity, QuantumState};
