//! Lacunary frequency ladders n_1 < … < n_M with Fejér orders a_1, …, a_M.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::torus::{convolve, fejer_kernel, sign_re, TorusFunction, TorusGrid};

/// Deepest ladder the builder accepts.
pub const LEVEL_CAP: usize = 3;

const DILATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LadderRepr", into = "LadderRepr")]
pub struct FrequencyLadder {
    grid: TorusGrid,
    eps: f64,
    n: Vec<i64>,
    a: Vec<usize>,
    eps_targets: Vec<f64>,
    achieved_errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LadderRepr {
    levels: usize,
    m: usize,
    eps: f64,
    n: Vec<i64>,
    a: Vec<usize>,
    eps_targets: Vec<f64>,
    achieved_errors: Vec<f64>,
}

impl From<FrequencyLadder> for LadderRepr {
    fn from(l: FrequencyLadder) -> Self {
        Self {
            levels: l.levels(),
            m: l.grid.m(),
            eps: l.eps,
            n: l.n,
            a: l.a,
            eps_targets: l.eps_targets,
            achieved_errors: l.achieved_errors,
        }
    }
}

impl TryFrom<LadderRepr> for FrequencyLadder {
    type Error = LabError;
    fn try_from(r: LadderRepr) -> Result<Self> {
        let levels = r.levels;
        if [r.n.len(), r.a.len(), r.eps_targets.len(), r.achieved_errors.len()].iter().any(|&l| l != levels) {
            return Err(LabError::Config("ladder arrays must all have `levels` entries".into()));
        }
        if levels == 0 || r.n[0] < 1 || r.n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Config("ladder frequencies must be positive and increasing".into()));
        }
        let l = Self {
            grid: TorusGrid::new(r.m)?,
            eps: r.eps,
            n: r.n,
            a: r.a,
            eps_targets: r.eps_targets,
            achieved_errors: r.achieved_errors,
        };
        let top = l.max_frequency();
        if 2 * top >= r.m as i64 {
            return Err(LabError::ResolutionExceeded { required_m: required_grid(top) });
        }
        Ok(l)
    }
}

fn required_grid(max_frequency: i64) -> usize {
    (2 * (max_frequency as usize + 1)).next_power_of_two()
}

/// L¹ target for level k (1-based): ε/2, then 2^{−(k−1)}ε.
pub fn level_target(eps: f64, k: usize) -> f64 {
    if k == 1 {
        eps / 2.0
    } else {
        eps * 0.5f64.powi(k as i32 - 1)
    }
}

/// s_a = F_a * σ on the grid.
pub fn smoothed_sign(grid: TorusGrid, a: usize) -> Result<TorusFunction> {
    convolve(&fejer_kernel(grid, a)?, &sign_re(grid))
}

/// ∥F_a * σ − σ∥_L1 on the grid.
pub fn smoothing_error(grid: TorusGrid, a: usize) -> Result<f64> {
    Ok((&smoothed_sign(grid, a)? - &sign_re(grid)).l1_norm())
}

fn check_levels(levels: usize, eps: f64) -> Result<()> {
    if levels == 0 || levels > LEVEL_CAP {
        return Err(LabError::Config(format!("ladder levels must lie in 1..={LEVEL_CAP}, got {levels}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::Config(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// n_1 = 1, then the smallest n_{k+1} > n_k with 4^k·max|E_k| ≤ n_{k+1}.
fn lacunary_steps(a: &[usize]) -> Vec<i64> {
    let mut n = vec![1i64];
    let mut top = a[0] as i64;
    for k in 1..a.len() {
        let next = (n[k - 1] + 1).max(4i64.pow(k as u32) * top);
        top += a[k] as i64 * next;
        n.push(next);
    }
    n
}

impl FrequencyLadder {
    /// Greedy construction: each a_k is the smallest order ≥ a_{k−1} meeting
    /// its L¹ target, each n_{k+1} the smallest lacunary step.
    pub fn build(levels: usize, eps: f64, grid: TorusGrid) -> Result<Self> {
        check_levels(levels, eps)?;
        let mut a = Vec::with_capacity(levels);
        let mut errors = Vec::with_capacity(levels);
        for k in 1..=levels {
            let target = level_target(eps, k);
            let mut order = a.last().copied().unwrap_or(1);
            loop {
                if order >= grid.m() / 2 {
                    return Err(LabError::ResolutionExceeded { required_m: 2 * grid.m() });
                }
                let err = smoothing_error(grid, order)?;
                if err <= target {
                    errors.push(err);
                    break;
                }
                order += 1;
            }
            a.push(order);
        }
        Self::assemble(grid, eps, a, errors)
    }

    /// Ladder with prescribed orders; the steps follow the lacunary rule.
    pub fn with_orders(grid: TorusGrid, a: Vec<usize>, eps: f64) -> Result<Self> {
        check_levels(a.len(), eps)?;
        if a.iter().any(|&x| x == 0 || x >= grid.m() / 2) {
            return Err(LabError::Config("Fejér orders must lie in 1..m/2".into()));
        }
        let errors = a.iter().map(|&x| smoothing_error(grid, x)).collect::<Result<Vec<_>>>()?;
        Self::assemble(grid, eps, a, errors)
    }

    fn assemble(grid: TorusGrid, eps: f64, a: Vec<usize>, achieved_errors: Vec<f64>) -> Result<Self> {
        let n = lacunary_steps(&a);
        let top: i64 = a.iter().zip(&n).map(|(&x, &y)| x as i64 * y).sum();
        if 2 * top >= grid.m() as i64 {
            return Err(LabError::ResolutionExceeded { required_m: required_grid(top) });
        }
        let eps_targets = (1..=a.len()).map(|k| level_target(eps, k)).collect();
        Ok(Self { grid, eps, n, a, eps_targets, achieved_errors })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn levels(&self) -> usize {
        self.n.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> &[i64] {
        &self.n
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn eps_targets(&self) -> &[f64] {
        &self.eps_targets
    }

    pub fn achieved_errors(&self) -> &[f64] {
        &self.achieved_errors
    }

    /// max |E_m| = Σ_{i≤m} a_i n_i.
    pub fn max_abs_in(&self, m: usize) -> i64 {
        self.a[..m].iter().zip(&self.n).map(|(&x, &y)| x as i64 * y).sum()
    }

    pub fn max_frequency(&self) -> i64 {
        self.max_abs_in(self.levels())
    }

    /// Number of tuples in the box Π [−a_i, a_i].
    pub fn box_size(&self) -> usize {
        self.box_size_in(self.levels())
    }

    pub(crate) fn box_size_in(&self, m: usize) -> usize {
        self.a[..m].iter().map(|&x| 2 * x + 1).product()
    }

    /// Tuple at a box index; k_1 varies slowest.
    pub fn tuple(&self, mut index: usize) -> Vec<i64> {
        let mut t = vec![0; self.levels()];
        for i in (0..self.levels()).rev() {
            let w = 2 * self.a[i] + 1;
            t[i] = (index % w) as i64 - self.a[i] as i64;
            index /= w;
        }
        t
    }

    pub fn index(&self, tuple: &[i64]) -> Option<usize> {
        if tuple.len() != self.levels() {
            return None;
        }
        let mut idx = 0;
        for (&k, &a) in tuple.iter().zip(&self.a) {
            if k.unsigned_abs() as usize > a {
                return None;
            }
            idx = idx * (2 * a + 1) + (k + a as i64) as usize;
        }
        Some(idx)
    }

    /// Σ k_i n_i.
    pub fn frequency(&self, tuple: &[i64]) -> i64 {
        tuple.iter().zip(&self.n).map(|(&k, &n)| k * n).sum()
    }

    /// Σ_{i≤m} k_i n_i for index `index` of the box over the first m levels.
    fn prefix_frequency(&self, m: usize, mut index: usize) -> i64 {
        let mut q = 0;
        for i in (0..m).rev() {
            let w = 2 * self.a[i] + 1;
            q += ((index % w) as i64 - self.a[i] as i64) * self.n[i];
            index /= w;
        }
        q
    }

    /// Frequencies of the whole box, in index order.
    pub fn frequencies(&self) -> Vec<i64> {
        (0..self.box_size()).map(|i| self.frequency(&self.tuple(i))).collect()
    }

    /// 4^m |j| ≤ n_{m+1} for every j ∈ E_m, by enumeration.
    pub fn verify_lacunarity(&self) -> bool {
        (1..self.levels()).all(|m| {
            let bound = self.n[m];
            (0..self.box_size_in(m)).all(|i| 4i64.pow(m as u32) * self.prefix_frequency(m, i).abs() <= bound)
        })
    }

    /// The tuple-to-frequency map is injective on the box.
    pub fn verify_injectivity(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.box_size());
        (0..self.box_size()).all(|i| seen.insert(self.frequency(&self.tuple(i))))
    }

    /// s_k on the working grid, undilated.
    pub fn smoothed_sign(&self, k: usize) -> Result<TorusFunction> {
        smoothed_sign(self.grid, self.a[k - 1])
    }

    /// z ↦ s_k(z^{n_k}).
    pub fn dilated_smoothed_sign(&self, k: usize) -> Result<TorusFunction> {
        self.smoothed_sign(k)?.dilate(self.n[k - 1] as usize, DILATE_TOL)
    }

    /// z ↦ F_{a_k}(z^{n_k}).
    pub fn dilated_fejer(&self, k: usize) -> Result<TorusFunction> {
        fejer_kernel(self.grid, self.a[k - 1])?.dilate(self.n[k - 1] as usize, DILATE_TOL)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn lacunary_ladders_represent_uniquely(a1 in 1usize..6, d2 in 0usize..4, d3 in 0usize..3, three in any::<bool>()) {
            let a = if three { vec![a1, a1 + d2, a1 + d2 + d3] } else { vec![a1, a1 + d2] };
            match FrequencyLadder::with_orders(TorusGrid::new(1 << 16).unwrap(), a, 0.2) {
                Ok(l) => {
                    prop_assert!(l.verify_lacunarity());
                    prop_assert!(l.verify_injectivity());
                    prop_assert!(2 * l.max_frequency() < 1 << 16);
                }
                Err(LabError::ResolutionExceeded { required_m }) => prop_assert!(required_m > 1 << 16),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
