//! L¹, H¹, previsible and absolutely summing norms.

use serde::{Deserialize, Serialize};

use super::Martingale;

/// The four martingale norms of one martingale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSet {
    pub l1: f64,
    pub h1: f64,
    pub p: f64,
    pub a: f64,
}

impl NormSet {
    pub fn of(f: &Martingale) -> Self {
        Self {
            l1: norm_l1(f),
            h1: norm_h1(f),
            p: norm_p(f),
            a: norm_a(f),
        }
    }
}

/// Σ over steps of a per-step nonnegative quantity broadcast to the terminal grid.
fn accumulate_terminal(f: &Martingale, per_step: impl Fn(usize) -> Vec<f64>) -> Vec<f64> {
    let n = f.depth();
    let m = f.grid().m();
    let mut acc = vec![0.0; m.pow(n as u32)];
    for k in 1..=n {
        let step = per_step(k);
        let rep = acc.len() / step.len();
        for (i, a) in acc.iter_mut().enumerate() {
            *a += step[i / rep];
        }
    }
    acc
}

/// E|F_n|.
pub fn norm_l1(f: &Martingale) -> f64 {
    let t = f.terminal();
    t.values().iter().map(|v| v.norm()).sum::<f64>() / t.len() as f64
}

/// E(Σ|ΔF_k|²)^{1/2}.
pub fn norm_h1(f: &Martingale) -> f64 {
    if f.depth() == 0 {
        return 0.0;
    }
    let s = accumulate_terminal(f, |k| f.diff(k).values().iter().map(|v| v.norm_sqr()).collect());
    s.iter().map(|v| v.sqrt()).sum::<f64>() / s.len() as f64
}

/// E(Σ E_{k−1}|ΔF_k|²)^{1/2}.
pub fn norm_p(f: &Martingale) -> f64 {
    if f.depth() == 0 {
        return 0.0;
    }
    let m = f.grid().m() as f64;
    let s = accumulate_terminal(f, |k| {
        f.diff(k)
            .fibres()
            .map(|fib| fib.iter().map(|v| v.norm_sqr()).sum::<f64>() / m)
            .collect()
    });
    s.iter().map(|v| v.sqrt()).sum::<f64>() / s.len() as f64
}

/// E Σ|ΔF_k|.
pub fn norm_a(f: &Martingale) -> f64 {
    f.diffs()
        .iter()
        .map(|d| d.values().iter().map(|v| v.norm()).sum::<f64>() / d.len() as f64)
        .sum()
}

/// E max_{0≤k≤n} |F_k|.
pub fn maximal_norm(f: &Martingale) -> f64 {
    let n = f.depth();
    let m = f.grid().m();
    let sums = f.partial_sums();
    let len = m.pow(n as u32);
    let mut best = vec![0.0f64; len];
    for s in &sums {
        let rep = len / s.len();
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.max(s.values()[i / rep].norm());
        }
    }
    best.iter().sum::<f64>() / len as f64
}
