//! The iteration inequality: per-step bounds
//! E(M²_{k−1} + V_k²)^{1/2} + E w_k ≤ E M_k imply
//! E(ΣV_k²)^{1/2} + EΣw_k ≤ 2(E M_n)^{1/2}(E max_k M_k)^{1/2}.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::decompose::DecompositionReport;
use super::scalar::delta_for_sigma;
use crate::error::{LabError, Result};
use crate::martingale::{steering_weights, ProductFunction};
use crate::rng::stream_rng;

/// Per-step hypothesis slack below which an instance is rejected.
pub const HYPOTHESIS_TOL: f64 = 1e-12;

/// Random variables on a space of equally weighted atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationInstance {
    /// M_0, …, M_n.
    m: Vec<Vec<f64>>,
    /// V_1, …, V_n.
    v: Vec<Vec<f64>>,
    /// w_1, …, w_n.
    w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub hypothesis_slacks: Vec<f64>,
    pub hypothesis_holds: bool,
    /// Present only when the hypothesis holds.
    pub conclusion_slack: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl IterationInstance {
    pub fn new(m: Vec<Vec<f64>>, v: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> Result<Self> {
        let n = v.len();
        if n == 0 || m.len() != n + 1 || w.len() != n {
            return Err(LabError::RangeError(format!(
                "need n+1 values of M and n of V, w; got {}, {}, {}",
                m.len(),
                v.len(),
                w.len()
            )));
        }
        let atoms = m[0].len();
        if atoms == 0 {
            return Err(LabError::RangeError("empty probability space".into()));
        }
        for x in m.iter().chain(&v).chain(&w) {
            if x.len() != atoms {
                return Err(LabError::GridMismatch(atoms, x.len()));
            }
            if x.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
                return Err(LabError::RangeError("values must be finite and nonnegative".into()));
            }
        }
        Ok(Self { m, v, w })
    }

    pub fn depth(&self) -> usize {
        self.v.len()
    }

    pub fn atoms(&self) -> usize {
        self.m[0].len()
    }
}

fn expect(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn iteration_check(inst: &IterationInstance) -> IterationReport {
    let n = inst.depth();
    let hypothesis_slacks: Vec<f64> = (1..=n)
        .map(|k| {
            let root: Vec<f64> = inst.m[k - 1].iter().zip(&inst.v[k - 1]).map(|(a, b)| a.hypot(*b)).collect();
            expect(&inst.m[k]) - expect(&root) - expect(&inst.w[k - 1])
        })
        .collect();
    let hypothesis_holds = hypothesis_slacks.iter().all(|&s| s >= -HYPOTHESIS_TOL);
    let atoms = inst.atoms();
    let sq: Vec<f64> = (0..atoms).map(|i| inst.v.iter().map(|v| v[i] * v[i]).sum::<f64>().sqrt()).collect();
    let lhs = expect(&sq) + inst.w.iter().map(|w| expect(w)).sum::<f64>();
    let max: Vec<f64> = (0..atoms).map(|i| inst.m[1..].iter().map(|m| m[i]).fold(0.0, f64::max)).collect();
    let rhs = 2.0 * expect(&inst.m[n]).sqrt() * expect(&max).sqrt();
    IterationReport {
        conclusion_slack: hypothesis_holds.then_some(rhs - lhs),
        hypothesis_slacks,
        hypothesis_holds,
        lhs,
        rhs,
    }
}

/// A random instance built by forward recursion. Roughly one in five draws
/// shrinks some M_k enough to break the hypothesis.
pub fn random_instance(depth: usize, atoms: usize, seed: u64) -> Result<IterationInstance> {
    if depth == 0 || atoms == 0 {
        return Err(LabError::RangeError("depth and atoms must be positive".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let scale: f64 = rng.random_range(0.1..3.0);
    let mut m = vec![(0..atoms).map(|_| scale * rng.random::<f64>()).collect::<Vec<f64>>()];
    let mut v = Vec::with_capacity(depth);
    let mut w = Vec::with_capacity(depth);
    let shrink = rng.random_bool(0.2);
    for _ in 0..depth {
        let prev = m.last().expect("non-empty");
        let vk: Vec<f64> = (0..atoms).map(|_| scale * rng.random::<f64>().powi(2)).collect();
        let wk: Vec<f64> = (0..atoms).map(|_| 0.2 * scale * rng.random::<f64>()).collect();
        let base: Vec<f64> = (0..atoms).map(|i| prev[i].hypot(vk[i]) + wk[i]).collect();
        let target = expect(&base) * if shrink { rng.random_range(0.7..1.0) } else { rng.random_range(1.0..1.3) };
        // redistribute the required mass randomly across atoms
        let raw: Vec<f64> = (0..atoms).map(|i| base[i] * rng.random_range(0.3..1.7)).collect();
        let f = target / expect(&raw);
        m.push(raw.iter().map(|r| r * f).collect());
        v.push(vk);
        w.push(wk);
    }
    IterationInstance::new(m, v, w)
}

fn terminal_values(f: &ProductFunction, arity: usize) -> Vec<f64> {
    f.broadcast(arity).values().iter().map(|v| v.re).collect()
}

/// M_k = |F_k − D_k|, V_k = δ(E_{k−1}Y_k²)^{1/2} with
/// Y_k = Im(w_{k−1}(ΔG_k − ΔD_k)), and w_k = ¼E_{k−1}|ΔB_k|, all on the terminal grid.
/// δ is the σ-perturbed coefficient for α = 0.99 and C = C0.
pub fn instance_from_decomposition(report: &DecompositionReport, c0: f64) -> Result<IterationInstance> {
    let n = report.f.depth();
    if n == 0 {
        return Err(LabError::RangeError("decomposition has depth 0".into()));
    }
    let delta = delta_for_sigma(0.99, c0);
    let diff = report.f.try_sub(&report.d)?;
    let sums = diff.partial_sums();
    let weights = steering_weights(&report.f, &report.d, Complex64::new(1.0, 0.0))?;
    let m_vals = sums.iter().map(|s| terminal_values(&s.abs(), n)).collect();
    let mut v = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 1..=n {
        let y = weights
            .weight(k - 1)
            .broadcast(k)
            .zip_with(&(report.g.diff(k) - report.d.diff(k)), |a, b| Complex64::new((a * b).im.powi(2), 0.0))?;
        let cond = y.cond_expect_prev()?.map(|t| Complex64::new(delta * t.re.sqrt(), 0.0));
        v.push(terminal_values(&cond, n));
        let b = report.b.diff(k).abs().cond_expect_prev()?.scale(Complex64::new(0.25, 0.0));
        w.push(terminal_values(&b, n));
    }
    IterationInstance::new(m_vals, v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_ladder() {
        let m = vec![vec![1.0, 2.0], vec![1.0, 3.0], vec![2.0, 3.0]];
        let zero = vec![vec![0.0; 2]; 2];
        let r = iteration_check(&IterationInstance::new(m, zero.clone(), zero).unwrap());
        assert!(r.hypothesis_holds);
        assert_eq!(r.lhs, 0.0);
        assert!(r.conclusion_slack.unwrap() > 0.0);
    }

    #[test]
    fn violations_skip_the_conclusion() {
        let m = vec![vec![2.0], vec![1.0]];
        let r = iteration_check(&IterationInstance::new(m, vec![vec![0.5]], vec![vec![0.0]]).unwrap());
        assert!(!r.hypothesis_holds);
        assert!(r.conclusion_slack.is_none());
    }

    #[test]
    fn validation() {
        assert!(IterationInstance::new(vec![vec![1.0]], vec![vec![1.0]], vec![vec![1.0]]).is_err());
        assert!(IterationInstance::new(vec![vec![1.0], vec![-1.0]], vec![vec![1.0]], vec![vec![0.0]]).is_err());
        assert!(IterationInstance::new(vec![vec![1.0], vec![1.0, 2.0]], vec![vec![1.0]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn generator_produces_both_kinds() {
        let reports: Vec<_> = (0..200).map(|s| iteration_check(&random_instance(4, 32, s).unwrap())).collect();
        assert!(reports.iter().any(|r| r.hypothesis_holds));
        assert!(reports.iter().any(|r| !r.hypothesis_holds));
    }

    proptest! {
        #[test]
        fn hypothesis_implies_conclusion(seed in 0u64..5000, depth in 1usize..6, atoms in 1usize..40) {
            let r = iteration_check(&random_instance(depth, atoms, seed).unwrap());
            if let Some(s) = r.conclusion_slack {
                prop_assert!(s >= -1e-9, "{r:?}");
            }
        }
    }
}
