//! Upper estimates of inf ∥D − F∥_L1 / ∥D∥_L1 over Hardy martingales F.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::descent::{l1_descent, SparseVec};
use crate::error::{LabError, Result};
use crate::martingale::{first_non_dyadic_step, norm_l1, Martingale, ProductFunction};
use crate::rng::stream_rng;
use crate::torus::CHECK_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    /// Highest frequency of each Hardy increment.
    pub degree: usize,
    /// Starting points; the first is F = 0.
    pub restarts: usize,
    /// Coordinate sweeps per start.
    pub sweeps: usize,
    /// First step size relative to ∥D∥_L1.
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self { degree: 4, restarts: 8, sweeps: 30, initial_step: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceResult {
    /// Smallest ∥D − F∥_L1 / ∥D∥_L1 found.
    pub ratio: f64,
    pub candidates: usize,
    pub best: Martingale,
}

/// (step, prefix, frequency) of every coefficient after the start.
fn parameters(m: usize, n: usize, deg: usize) -> Vec<(usize, usize, usize)> {
    (1..=n)
        .flat_map(|k| (0..m.pow(k as u32 - 1)).flat_map(move |x| (1..=deg).map(move |j| (k, x, j))))
        .collect()
}

/// Coordinate descent over F_0 and the coefficients of ΔF_k(x, y) = Σ_{j≤deg} a_{k,j}(x)e^{ijy},
/// from F = 0 and from random starts. The result bounds the distance from above.
pub fn distance_experiment(d: &Martingale, cfg: &DistanceConfig) -> Result<DistanceResult> {
    if let Some(step) = first_non_dyadic_step(d, CHECK_TOL) {
        return Err(LabError::NotDyadic { step });
    }
    let d_l1 = norm_l1(d);
    if d_l1 <= 0.0 {
        return Err(LabError::RangeError("dyadic martingale is zero".into()));
    }
    let grid = d.grid();
    let m = grid.m();
    if cfg.degree == 0 || cfg.degree >= m / 2 {
        return Err(LabError::DegreeOverflow { degree: cfg.degree, m });
    }
    let n = d.depth();
    let terminal = d.terminal();
    let size = terminal.len();
    let params = parameters(m, n, cfg.degree);
    let mut basis = vec![SparseVec { index: (0..size).collect(), values: vec![Complex64::new(1.0, 0.0); size] }];
    for &(k, x, j) in &params {
        let inner = m.pow((n - k) as u32);
        let base = x * m * inner;
        let (index, values) = (0..m)
            .flat_map(|y| (0..inner).map(move |r| (base + y * inner + r, grid.monomial_at(j as i64, y))))
            .unzip();
        basis.push(SparseVec { index, values });
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let mut candidates = 0;
    for restart in 0..cfg.restarts.max(1) {
        let amp = if restart == 0 { 0.0 } else { d_l1 * rng.random_range(0.1..1.0) };
        let start = (0..basis.len())
            .map(|_| Complex64::new(rng.random_range(-amp..=amp), rng.random_range(-amp..=amp)))
            .collect();
        let run = l1_descent(terminal.values(), &basis, start, cfg.sweeps, cfg.initial_step * d_l1);
        candidates += run.candidates;
        if best.as_ref().is_none_or(|b| run.l1 < b.0) {
            best = Some((run.l1, run.coeffs));
        }
    }
    let (l1, coeffs) = best.expect("at least one start");
    let diffs = (1..=n)
        .map(|k| {
            ProductFunction::from_indices(grid, k, |idx| {
                let x = idx[..k - 1].iter().fold(0, |acc, &i| acc * m + i);
                let offset = 1 + params.iter().position(|p| *p == (k, x, 1)).expect("parameter exists");
                (0..cfg.degree).map(|j| coeffs[offset + j] * grid.monomial_at(j as i64 + 1, idx[k - 1])).sum()
            })
        })
        .collect();
    Ok(DistanceResult { ratio: l1 / d_l1, candidates, best: Martingale::new(grid, coeffs[0], diffs)? })
}
