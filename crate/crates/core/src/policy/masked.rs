use alloc::vec::Vec;
use core::ops::Range;

/// Exclusive end of the units of a `width`-wide hidden layer that belong to
/// steps `0..=step` when the layer is split into `steps` contiguous blocks.
pub(crate) fn block_end(step: usize, width: usize, steps: usize) -> usize {
    ((step + 1) * width).div_ceil(steps)
}

/// Units of `step`'s block.
pub(crate) fn block(step: usize, width: usize, steps: usize) -> Range<usize> {
    let start = if step == 0 { 0 } else { block_end(step - 1, width, steps) };
    start..block_end(step, width, steps)
}

/// Dense layer whose row `r` only sees inputs `0..fan_in[r]`.
///
/// Weights and biases live in the owning policy's flat parameter buffer at
/// `weight` (row-major `out_dim × in_dim`) and `bias`. Entries beyond a
/// row's prefix are kept at zero and never receive gradient.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MaskedDense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: usize,
    pub bias: usize,
    pub fan_in: Vec<usize>,
}

impl MaskedDense {
    pub fn n_params(&self) -> usize {
        self.in_dim * self.out_dim + self.out_dim
    }

    pub fn weight_range(&self) -> Range<usize> {
        self.weight..self.weight + self.in_dim * self.out_dim
    }

    pub fn bias_range(&self) -> Range<usize> {
        self.bias..self.bias + self.out_dim
    }

    pub fn is_connected(&self, row: usize, col: usize) -> bool {
        col < self.fan_in[row]
    }

    /// `out[r] = b[r] + Σ_{c < fan_in[r]} W[r, c]·input[c]` for `r` in `rows`.
    pub fn forward_rows(&self, params: &[f64], input: &[f64], out: &mut [f64], rows: Range<usize>) {
        for r in rows {
            let row = &params[self.weight + r * self.in_dim..][..self.fan_in[r]];
            let mut acc = params[self.bias + r];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out[r] = acc;
        }
    }

    /// Accumulates parameter gradients for `d_out` and, if requested, adds
    /// the input gradient into `d_input`.
    pub fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        d_out: &[f64],
        grads: &mut [f64],
        mut d_input: Option<&mut [f64]>,
    ) {
        for (r, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads[self.bias + r] += g;
            let n = self.fan_in[r];
            let off = self.weight + r * self.in_dim;
            for (gw, x) in grads[off..off + n].iter_mut().zip(input) {
                *gw += g * x;
            }
            if let Some(d_in) = d_input.as_deref_mut() {
                for (di, w) in d_in[..n].iter_mut().zip(&params[off..off + n]) {
                    *di += g * w;
                }
            }
        }
    }
}
