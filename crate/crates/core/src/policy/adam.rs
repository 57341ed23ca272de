use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Adam moments for a flat parameter vector. [`Adam::step`] ascends.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize) -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }

    /// `params += lr·m̂ / (sqrt(v̂) + ε)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), found: grads.len().min(params.len()) });
        }
        self.t += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] += lr * m_hat / (libm::sqrt(v_hat) + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut adam = Adam::new(3);
        let mut p = [1.0, -2.0, 0.5];
        adam.step(&mut p, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(p, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut adam = Adam::new(1);
        let mut p = [0.0];
        adam.step(&mut p, &[1.0], 5e-4).unwrap();
        assert!((p[0] - 5e-4).abs() < 1e-11);
        assert!((adam.m[0] - 0.1).abs() < 1e-15);
        assert!((adam.v[0] - 0.001).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let mut adam = Adam::new(2);
        assert!(adam.step(&mut [0.0; 3], &[0.0; 3], 1e-3).is_err());
    }
}
