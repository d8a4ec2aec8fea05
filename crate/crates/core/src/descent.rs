//! Coordinate descent for min over c of mean |t − Σ c_i b_i| with sparse b_i.

use num_complex::Complex64;

/// A basis vector given by its nonzero entries.
pub(crate) struct SparseVec {
    pub index: Vec<usize>,
    pub values: Vec<Complex64>,
}

pub(crate) struct Descent {
    pub coeffs: Vec<Complex64>,
    /// mean |t − Σ c_i b_i| at `coeffs`.
    pub l1: f64,
    /// Trial points evaluated, including the start.
    pub candidates: usize,
}

/// Tries ±step and ±i·step on each coefficient in turn, accepting the first
/// improvement; the step halves after a sweep without progress.
pub(crate) fn l1_descent(
    target: &[Complex64],
    basis: &[SparseVec],
    start: Vec<Complex64>,
    sweeps: usize,
    step: f64,
) -> Descent {
    let mut residual = target.to_vec();
    for (b, c) in basis.iter().zip(&start) {
        for (&i, v) in b.index.iter().zip(&b.values) {
            residual[i] -= c * v;
        }
    }
    let mut coeffs = start;
    let mut candidates = 1;
    let mut step = step;
    let dirs = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::i(), -Complex64::i()];
    let floor = 1e-12 * target.len() as f64;
    for _ in 0..sweeps {
        let mut improved = false;
        for (b, c) in basis.iter().zip(coeffs.iter_mut()) {
            for dir in dirs {
                let delta = dir * step;
                candidates += 1;
                let change: f64 = b
                    .index
                    .iter()
                    .zip(&b.values)
                    .map(|(&i, v)| (residual[i] - delta * v).norm() - residual[i].norm())
                    .sum();
                if change < -floor {
                    for (&i, v) in b.index.iter().zip(&b.values) {
                        residual[i] -= delta * v;
                    }
                    *c += delta;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let l1 = residual.iter().map(|r| r.norm()).sum::<f64>() / target.len().max(1) as f64;
    Descent { coeffs, l1, candidates }
}
