//! Hybrid discrete-continuous policy-gradient control of a spin-1/2 Ising
//! chain, with the generalized QAOA ansatz and its ancestor baselines.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `std` for `std::error`
//! integration and `parallel` to run rollouts on a rayon pool.
//!
//! Layout:
//! - [`quantum`]: exact state-vector simulation of the chain.
//! - [`distributions`] and [`special`]: action distributions and their scores.
//! - [`policy`]: the masked autoregressive policy network and Adam.
//! - [`env`]: protocol construction, noise models, rewards.
//! - [`ppo`]: the hybrid clipped PPO trainer.
//! - [`baselines`]: Powell, QAOA, PG-QAOA, CD-QAOA and a brute-force grid.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod distributions;
pub mod env;
mod error;
pub mod linalg;
pub mod policy;
pub mod ppo;
pub mod quantum;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
