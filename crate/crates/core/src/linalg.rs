//! Dense complex matrices and a Hermitian eigensolver.
//!
//! Hilbert spaces here are at most a few hundred states, so everything is
//! dense and row-major. The eigensolver is cyclic complex Jacobi, which is
//! slow asymptotically but accurate to a few ulps on these sizes.

use alloc::vec;
use alloc::vec::Vec;

pub use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] += v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim, "combine: dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * a + y * b).collect();
        Self { dim: self.dim, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul: dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `out = self · v`.
    pub fn matvec_into(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a * b);
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        self.matvec_into(v, &mut out);
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    fn off_diagonal_sq(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                s += self.data[r * n + c].norm_sqr();
            }
        }
        2.0 * s
    }
}

/// Spectral decomposition `A = V · diag(values) · V†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, each with its largest-magnitude entry real positive.
    pub vectors: CMatrix,
    /// `vectors` adjoint, kept for fast projections.
    pub vectors_adj: CMatrix,
}

impl Eigen {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|r| self.vectors.get(r, k)).collect()
    }
}

const MAX_SWEEPS: usize = 100;

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Only the upper triangle's Hermitian structure is assumed; callers are
/// expected to have validated Hermiticity.
pub fn hermitian_eigen(a: &CMatrix) -> Eigen {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_sq();

    for _ in 0..MAX_SWEEPS {
        let off = m.off_diagonal_sq();
        if off <= scale * 1e-32 || off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m.data[p * n + q];
                let abs_g = g.norm();
                if abs_g < 1e-300 {
                    continue;
                }
                rotate(&mut m, &mut v, p, q, g, abs_g);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.data[i * n + i].re.total_cmp(&m.data[j * n + j].re));
    let values: Vec<f64> = order.iter().map(|&i| m.data[i * n + i].re).collect();

    let mut cols: Vec<Vec<C64>> = order.iter().map(|&src| (0..n).map(|r| v.data[r * n + src]).collect()).collect();
    orthonormalize(&mut cols);
    let mut vectors = CMatrix::zeros(n);
    for (k, col) in cols.into_iter().enumerate() {
        let phase = canonical_phase(&col);
        for (r, z) in col.into_iter().enumerate() {
            vectors.data[r * n + k] = z * phase;
        }
    }
    let vectors_adj = vectors.adjoint();
    Eigen { values, vectors, vectors_adj }
}

/// Two passes of modified Gram-Schmidt. The accumulated Jacobi rotations
/// leave the columns orthonormal only to about `n·ε`, which shows up as norm
/// drift over long chains of evolutions.
fn orthonormalize(cols: &mut [Vec<C64>]) {
    for _ in 0..2 {
        for k in 0..cols.len() {
            let (done, rest) = cols.split_at_mut(k);
            let col = &mut rest[0];
            for prev in done.iter() {
                let overlap: C64 = prev.iter().zip(col.iter()).map(|(p, c)| p.conj() * c).sum();
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= overlap * p;
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for c in col.iter_mut() {
                *c /= norm;
            }
        }
    }
}

/// Unit phase that makes the largest-magnitude entry real positive.
/// Near-ties resolve to the lowest index.
pub(crate) fn canonical_phase(col: &[C64]) -> C64 {
    let max = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return ONE;
    }
    let pivot = col.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).copied().unwrap_or(ONE);
    pivot.conj() / pivot.norm()
}

/// One Jacobi rotation zeroing `m[p][q]`: `m ← R† m R`, `v ← v R`, with
/// `R = [[c, s·e], [−s·ē, c]]` in the (p, q) plane and `e = g/|g|`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, g: C64, abs_g: f64) {
    let n = m.dim;
    let e = g / abs_g;
    let app = m.data[p * n + p].re;
    let aqq = m.data[q * n + q].re;
    let tau = (aqq - app) / (2.0 * abs_g);
    let t = if tau >= 0.0 {
        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    let se = e * s;
    let se_bar = se.conj();

    for k in 0..n {
        let akp = m.data[k * n + p];
        let akq = m.data[k * n + q];
        m.data[k * n + p] = akp * c - se_bar * akq;
        m.data[k * n + q] = se * akp + akq * c;
    }
    for k in 0..n {
        let apk = m.data[p * n + k];
        let aqk = m.data[q * n + k];
        m.data[p * n + k] = apk * c - se * aqk;
        m.data[q * n + k] = se_bar * apk + aqk * c;
    }
    m.data[p * n + q] = ZERO;
    m.data[q * n + p] = ZERO;
    m.data[p * n + p].im = 0.0;
    m.data[q * n + q].im = 0.0;

    for k in 0..n {
        let vkp = v.data[k * n + p];
        let vkq = v.data[k * n + q];
        v.data[k * n + p] = vkp * c - se_bar * vkq;
        v.data[k * n + q] = se * vkp + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for r in 0..n {
            m.set(r, r, C64::new(rng.random_range(-2.0..2.0), 0.0));
            for c in r + 1..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m.set(r, c, z);
                m.set(c, r, z.conj());
            }
        }
        m
    }

    fn reconstruction_error(a: &CMatrix, eig: &Eigen) -> f64 {
        let d = eig.vectors_adj.matmul(a).matmul(&eig.vectors);
        let mut worst = 0.0f64;
        for r in 0..a.dim() {
            for c in 0..a.dim() {
                let target = if r == c { C64::new(eig.values[r], 0.0) } else { ZERO };
                worst = worst.max((d.get(r, c) - target).norm());
            }
        }
        worst
    }

    #[test]
    fn diagonalizes_random_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3, 7, 16, 33] {
            let a = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&a);
            assert!(reconstruction_error(&a, &eig) < 1e-9, "n = {n}");
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            let unitarity = eig.vectors_adj.matmul(&eig.vectors);
            for r in 0..n {
                for c in 0..n {
                    let target = if r == c { ONE } else { ZERO };
                    assert!((unitarity.get(r, c) - target).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = CMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        });
        let eig = hermitian_eigen(&y);
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn phase_convention_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(6, &mut rng);
        let e1 = hermitian_eigen(&a);
        let e2 = hermitian_eigen(&a);
        assert_eq!(e1, e2);
        for k in 0..6 {
            let col = e1.vector(k);
            let max = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let pivot = col.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
            assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
        }
    }
}
