//! Powell's conjugate-direction method on a box, with Brent line searches
//! restricted to the feasible segment of each direction.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const TINY: f64 = 1e-25;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PowellConfig {
    /// Stop when a full sweep moves no coordinate by more than this.
    pub x_tol: f64,
    /// Stop when a full sweep improves `f` by less than this, relatively.
    pub f_tol: f64,
    /// Maximum number of sweeps; `None` means `200·dim`.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub max_iters: Option<usize>,
    /// Maximum number of function evaluations.
    pub max_evals: usize,
    pub lower: f64,
    pub upper: f64,
    /// Absolute tolerance of the line searches, in units of the step parameter.
    pub line_tol: f64,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self { x_tol: 1e-6, f_tol: 1e-8, max_iters: None, max_evals: 100_000, lower: 0.0, upper: 1.0, line_tol: 1e-7 }
    }
}

impl PowellConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.f_tol > 0.0 && self.line_tol > 0.0) {
            return Err(Error::InvalidParameter("powell tolerances must be positive"));
        }
        if !(self.lower < self.upper) {
            return Err(Error::InvalidParameter("powell box is empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowellResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evals: usize,
    /// False when a sweep or evaluation budget ran out first.
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `g` on `[a, b]` starting from `x ∈ [a, b]` with `g(x) = fx`.
fn brent<G: FnMut(f64) -> f64>(mut g: G, mut a: f64, mut b: f64, x0: f64, fx0: f64, tol: f64) -> (f64, f64) {
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = 1e-10 * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let u = u.clamp(a, b);
        let fu = g(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx)
}

/// Feasible step interval `[t_lo, t_hi]` of `x + t·d` inside the box.
fn feasible(x: &[f64], d: &[f64], lower: f64, upper: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (&xi, &di) in x.iter().zip(d) {
        if di > 0.0 {
            lo = lo.max((lower - xi) / di);
            hi = hi.min((upper - xi) / di);
        } else if di < 0.0 {
            lo = lo.max((upper - xi) / di);
            hi = hi.min((lower - xi) / di);
        }
    }
    (lo.min(0.0), hi.max(0.0))
}

fn line_min<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    x: &mut [f64],
    fx: f64,
    d: &[f64],
    cfg: &PowellConfig,
    scratch: &mut [f64],
) -> (f64, f64) {
    let (lo, hi) = feasible(x, d, cfg.lower, cfg.upper);
    if hi - lo <= 0.0 {
        return (fx, 0.0);
    }
    let point = |t: f64, out: &mut [f64]| {
        for ((o, &xi), &di) in out.iter_mut().zip(x.iter()).zip(d) {
            *o = (xi + t * di).clamp(cfg.lower, cfg.upper);
        }
    };
    let mut g = |t: f64| {
        point(t, scratch);
        f.call(scratch)
    };
    let (mut t, mut ft) = brent(&mut g, lo, hi, 0.0, fx, cfg.line_tol);
    // Brent stops a tolerance short of a minimum on the boundary.
    for edge in [lo, hi] {
        if t != edge && (t - edge).abs() < 10.0 * cfg.line_tol {
            let fe = g(edge);
            if fe < ft {
                (t, ft) = (edge, fe);
            }
        }
    }
    if ft < fx {
        let mut moved = vec![0.0; x.len()];
        point(t, &mut moved);
        x.copy_from_slice(&moved);
        (ft, t)
    } else {
        (fx, 0.0)
    }
}

/// Powell minimization of `f` over `[lower, upper]^n` from `x0` (clamped into the box).
pub fn powell_minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &PowellConfig) -> Result<PowellResult> {
    cfg.validate()?;
    let n = x0.len();
    let mut f = Counted { f, evals: 0 };
    let mut x: Vec<f64> = x0.iter().map(|v| v.clamp(cfg.lower, cfg.upper)).collect();
    let mut fx = f.call(&x);
    if n == 0 {
        return Ok(PowellResult { x, f: fx, iterations: 0, evals: f.evals, converged: true });
    }
    let identity = |i: usize| -> Vec<f64> { (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect() };
    // Unit directions; the last `conjugate` of them are mutually conjugate.
    let mut dirs: Vec<Vec<f64>> = (0..n).map(identity).collect();
    let mut conjugate = 0;
    let max_iters = cfg.max_iters.unwrap_or(200 * n);
    let mut scratch = vec![0.0; n];
    let mut steps = vec![0.0; n];
    let mut x_start = x.clone();
    for iter in 1..=max_iters {
        let f_start = fx;
        for (i, d) in dirs.iter().enumerate() {
            (fx, steps[i]) = line_min(&mut f, &mut x, fx, d, cfg, &mut scratch);
        }
        let step = x.iter().zip(&x_start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let f_done = 2.0 * (f_start - fx) <= cfg.f_tol * (f_start.abs() + fx.abs()) + TINY;
        if f_done || step < cfg.x_tol {
            return Ok(PowellResult { x, f: fx, iterations: iter, evals: f.evals, converged: true });
        }
        if f.evals >= cfg.max_evals {
            return Ok(PowellResult { x, f: fx, iterations: iter, evals: f.evals, converged: false });
        }
        let mut new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let len = libm::sqrt(new_dir.iter().map(|v| v * v).sum::<f64>());
        new_dir.iter_mut().for_each(|v| *v /= len);
        // Swapping direction r for the normalized displacement scales the
        // determinant of the set by |α_r|/len, where α_r is the step taken
        // along r. Among the directions not yet conjugate, drop the one that
        // keeps the set best conditioned.
        if conjugate >= n {
            conjugate = 0;
        }
        let (r, alpha) = steps[..n - conjugate]
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.abs()))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if alpha / len < 1e-4 {
            dirs = (0..n).map(identity).collect();
            conjugate = 0;
            x_start.copy_from_slice(&x);
            continue;
        }
        (fx, _) = line_min(&mut f, &mut x, fx, &new_dir, cfg, &mut scratch);
        dirs.remove(r);
        dirs.push(new_dir);
        conjugate += 1;
        // The next sweep ends with a line search along the new direction, so
        // both ends of its displacement are minima along it.
        x_start.copy_from_slice(&x);
    }
    Ok(PowellResult { x, f: fx, iterations: max_iters, evals: f.evals, converged: false })
}


#[cfg(test)]
mod quadratic_tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use rand::Rng;

    #[test]
    fn convex_quadratics_terminate_quickly() {
        let mut rng = stream(3, Stream::Restarts, 0, 0);
        let mut worst: f64 = 0.0;
        for trial in 0..200 {
            let n = 2 + trial % 7;
            // A = BᵀB + I, minimizer c in the interior.
            let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    a[i * n + j] = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
                }
            }
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
            let f = |x: &[f64]| {
                let d: Vec<f64> = x.iter().zip(&c).map(|(x, c)| x - c).collect();
                (0..n).map(|i| d[i] * (0..n).map(|j| a[i * n + j] * d[j]).sum::<f64>()).sum::<f64>()
            };
            let cfg = PowellConfig { f_tol: 1e-14, x_tol: 1e-9, max_iters: Some(n + 2), ..Default::default() };
            let r = powell_minimize(f, &vec![0.5; n], &cfg).unwrap();
            let err = r.x.iter().zip(&c).map(|(x, c)| (x - c).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
        }
        assert!(worst < 1e-5, "error {worst} after dim + 2 sweeps");
    }
}
