use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::UNIT_EPS;
use crate::env::Environment;
use crate::{Error, Result};

/// Largest number of grid points evaluated.
pub const GRID_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub ratio: f64,
    pub raw: Vec<f64>,
    pub durations: Vec<f64>,
    pub evaluated: u64,
}

/// Raw grid values `k/(g − 1)`, floored at the duration clamp; `{1}` for `g = 1`.
pub fn grid_values(points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![1.0];
    }
    (0..points).map(|k| (k as f64 / (points - 1) as f64).max(UNIT_EPS)).collect()
}

/// Exhaustive search over raw durations on a `points`-per-axis grid for a
/// fixed generator sequence, scored by the clean energy ratio.
pub fn grid_oracle(env: &Environment, sequence: &[usize], points: usize) -> Result<GridResult> {
    let dims = sequence.len() as u32;
    let total = (points.max(1) as u64).checked_pow(dims).filter(|&t| t <= GRID_BUDGET);
    let total = total.ok_or(Error::GridBudget { points, dims, budget: GRID_BUDGET })?;
    let values = grid_values(points);
    let mut idx = vec![0usize; sequence.len()];
    let mut raw = vec![values[0]; sequence.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..total {
        for (r, &i) in raw.iter_mut().zip(&idx) {
            *r = values[i];
        }
        let ratio = env.clean_ratio(sequence, &raw)?;
        if best.as_ref().is_none_or(|b| ratio > b.0) {
            best = Some((ratio, raw.clone()));
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < values.len() {
                break;
            }
            *i = 0;
        }
    }
    let (ratio, raw) = best.ok_or(Error::InvalidParameter("empty grid"))?;
    let durations = crate::env::normalize_durations(&raw, env.config().total_t)?;
    Ok(GridResult { ratio, raw, durations, evaluated: total })
}
