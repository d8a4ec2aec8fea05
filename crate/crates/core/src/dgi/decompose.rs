//! F = G + B by truncating every conditional increment of F at level C0·|F_{k−1} − D_{k−1}|.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ratio, ConstantsReport};
use crate::error::{LabError, Result};
use crate::martingale::{
    first_non_dyadic_step, first_non_hardy_step, steering_weights, transform, Martingale, NormSet, ProductFunction,
};
use crate::rng::derive_seed;
use crate::torus::CHECK_TOL;
use crate::truncation::{truncate, TruncationConfig};

/// Share of slices whose step slack must clear −2·SE.
pub const SLICE_PASS_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub step: usize,
    pub slice: usize,
    pub z: Complex64,
    /// E_{k−1}|F_k − D_k| − |z| − ¼E_{k−1}|ΔB_k|.
    pub slack: f64,
    /// Standard error of `slack`.
    pub se: f64,
    pub g_sup: f64,
    /// C0|z| + 3·(largest bin SE).
    pub g_bound: f64,
    pub hit_fraction: f64,
    pub fast_path: bool,
    pub degenerate: bool,
    pub simulated: bool,
    pub paths_truncated_at_max: u64,
}

impl SliceStats {
    pub fn slack_ok(&self) -> bool {
        self.slack >= -2.0 * self.se - 1e-10 * self.z.norm().max(1.0)
    }

    pub fn g_ok(&self) -> bool {
        self.g_sup <= self.g_bound * (1.0 + 1e-12) + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub f: NormSet,
    pub d: NormSet,
    pub g: NormSet,
    pub b: NormSet,
    pub f_minus_d: NormSet,
    /// T_W(G − D) with W the steering weights of F − D.
    pub tw_g_minus_d: NormSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub f: Martingale,
    pub d: Martingale,
    pub g: Martingale,
    pub b: Martingale,
    /// Slices in step order, prefix-major within a step.
    pub slices: Vec<SliceStats>,
    pub norms: NormTable,
    /// Standard error of ∥B∥_𝒜.
    pub se_a: f64,
    /// max |F − (G + B)| after a JSON round trip of G and B.
    pub reconstruction_error: f64,
    /// Grid mass where F_k = D_k and the steering weight falls back to 1.
    pub fallback_mass: Vec<f64>,
    pub config: TruncationConfig,
}

impl DecompositionReport {
    pub fn slack_pass_fraction(&self) -> f64 {
        if self.slices.is_empty() {
            return 1.0;
        }
        self.slices.iter().filter(|s| s.slack_ok()).count() as f64 / self.slices.len() as f64
    }

    pub fn g_bound_violations(&self) -> usize {
        self.slices.iter().filter(|s| !s.g_ok()).count()
    }

    pub fn simulated_slices(&self) -> usize {
        self.slices.iter().filter(|s| s.simulated).count()
    }

    pub fn slack(&self, step: usize) -> Vec<f64> {
        self.slices.iter().filter(|s| s.step == step).map(|s| s.slack).collect()
    }
}

fn check_pair(f: &Martingale, d: &Martingale) -> Result<()> {
    if f.depth() != d.depth() {
        return Err(LabError::DepthMismatch(f.depth(), d.depth()));
    }
    if f.grid() != d.grid() {
        return Err(LabError::GridMismatch(f.grid().m(), d.grid().m()));
    }
    Ok(())
}

/// Slack of |F_{k−1} − D_{k−1}| + ¼E_{k−1}|ΔB_k| ≤ E_{k−1}|F_k − D_k| over each prefix of `T^{k−1}`.
pub fn verify_step_inequality(f: &Martingale, d: &Martingale, b: &Martingale, k: usize) -> Result<Vec<f64>> {
    check_pair(f, d)?;
    check_pair(f, b)?;
    if k == 0 || k > f.depth() {
        return Err(LabError::RangeError(format!("step {k} outside 1..={}", f.depth())));
    }
    let m = f.grid().m() as f64;
    let diff = f.try_sub(d)?;
    let prev = diff.partial_sum(k - 1);
    let cur = diff.partial_sum(k);
    Ok(cur
        .fibres()
        .zip(b.diff(k).fibres())
        .zip(prev.values())
        .map(|((fk, bk), z)| {
            let e_cur = fk.iter().map(|v| v.norm()).sum::<f64>() / m;
            let e_b = bk.iter().map(|v| v.norm()).sum::<f64>() / m;
            e_cur - z.norm() - 0.25 * e_b
        })
        .collect())
}

fn round_trip(m: &Martingale) -> Result<Martingale> {
    Ok(serde_json::from_str(&serde_json::to_string(m)?)?)
}

/// Splits a Hardy martingale F against a dyadic martingale D of the same depth.
pub fn decompose(f: &Martingale, d: &Martingale, cfg: &TruncationConfig) -> Result<DecompositionReport> {
    check_pair(f, d)?;
    cfg.validate()?;
    if let Some(step) = first_non_hardy_step(f, CHECK_TOL) {
        return Err(LabError::NotHardy { step });
    }
    if let Some(step) = first_non_dyadic_step(d, CHECK_TOL) {
        return Err(LabError::NotDyadic { step });
    }
    let grid = f.grid();
    let n = f.depth();
    let sums = f.try_sub(d)?.partial_sums();
    let mut g_diffs = Vec::with_capacity(n);
    let mut stats = Vec::new();
    let mut se_a = 0.0;
    for k in 1..=n {
        let fk = f.diff(k);
        let zs = &sums[k - 1];
        let results = (0..fk.fibre_count())
            .into_par_iter()
            .map(|x| {
                let h = fk.fibre_fn(x);
                let z = zs.values()[x];
                let slice_cfg = TruncationConfig { seed: derive_seed(cfg.seed, &[k as u64, x as u64]), ..cfg.clone() };
                truncate(&h, z, &slice_cfg).map(|r| (x, z, r))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut step_se = 0.0;
        let mut fibres = Vec::with_capacity(results.len());
        for (x, z, r) in results {
            step_se += r.mean_se();
            stats.push(SliceStats {
                step: k,
                slice: x,
                z,
                slack: 0.0,
                se: 0.25 * r.mean_se(),
                g_sup: r.g_hat.sup_norm(),
                g_bound: cfg.c0 * z.norm() + 3.0 * r.max_se(),
                hit_fraction: r.hit_fraction,
                fast_path: r.fast_path,
                degenerate: r.degenerate,
                simulated: r.n_paths > 0,
                paths_truncated_at_max: r.paths_truncated_at_max,
            });
            fibres.push(r.g_hat);
        }
        se_a += step_se / fibres.len() as f64;
        g_diffs.push(ProductFunction::from_fibres(grid, k, &fibres)?);
    }
    let g = Martingale::new(grid, f.start(), g_diffs)?;
    let b = f.try_sub(&g)?.map_diffs(Complex64::new(0.0, 0.0), |_, d| d.clone());
    let mut offset = 0;
    for k in 1..=n {
        let slack = verify_step_inequality(f, d, &b, k)?;
        for (s, v) in stats[offset..offset + slack.len()].iter_mut().zip(&slack) {
            s.slack = *v;
        }
        offset += slack.len();
    }
    let rebuilt = round_trip(&g)?.try_add(&round_trip(&b)?)?;
    let reconstruction_error = rebuilt.max_abs_diff(f);
    let weights = steering_weights(f, d, Complex64::new(1.0, 0.0))?;
    let f_minus_d = f.try_sub(d)?;
    let norms = NormTable {
        f: NormSet::of(f),
        d: NormSet::of(d),
        g: NormSet::of(&g),
        b: NormSet::of(&b),
        f_minus_d: NormSet::of(&f_minus_d),
        tw_g_minus_d: NormSet::of(&transform(&g.try_sub(d)?, &weights)?),
    };
    Ok(DecompositionReport {
        f: f.clone(),
        d: d.clone(),
        g,
        b,
        slices: stats,
        norms,
        se_a,
        reconstruction_error,
        fallback_mass: weights.fallback_mass().to_vec(),
        config: cfg.clone(),
    })
}

/// Constants of the decomposition: ∥B∥_𝒜 ≤ 4∥F − D∥_{L¹} is asserted up to 3·SE,
/// the transform and previsible ratios are reported.
pub fn verify_dgi(report: &DecompositionReport) -> ConstantsReport {
    let t = &report.norms;
    let mut out = ConstantsReport::new();
    out.assert_ge(
        "step_slack_pass_fraction",
        "share of slices with step slack ≥ −2·SE",
        report.slack_pass_fraction(),
        SLICE_PASS_FRACTION,
    );
    out.assert_le(
        "g_bound_violations",
        "|ΔG_k| ≤ C0|F_{k−1} − D_{k−1}| + 3·SE per slice",
        report.g_bound_violations() as f64,
        0.0,
    );
    let fd = t.f_minus_d.l1;
    out.assert_le(
        "b_a_over_f_minus_d_l1",
        "∥B∥_𝒜 ≤ 4∥F − D∥_L1 + 3·SE",
        ratio(t.b.a, fd),
        if fd > 0.0 { 4.0 + 3.0 * report.se_a / fd } else { 0.0 },
    );
    out.assert_le("reconstruction_error", "max|F − (G + B)|", report.reconstruction_error, CHECK_TOL);
    let g_hardy = first_non_hardy_step(&report.g, CHECK_TOL).is_none();
    out.assert_le("g_not_hardy", "G is a Hardy martingale", if g_hardy { 0.0 } else { 1.0 }, 0.0);
    out.report(
        "tw_ratio",
        "∥T_W(G − D)∥_𝒫 / (∥F − D∥_L1·∥F − D∥_H1)^{1/2}",
        ratio(t.tw_g_minus_d.p, (fd * t.f_minus_d.h1).sqrt()),
    );
    out.report("g_p_ratio", "∥G∥_𝒫 / (∥F∥_L1 + ∥D∥_H1)", ratio(t.g.p, t.f.l1 + t.d.h1));
    out.report("fallback_mass", "max grid mass with F_k = D_k", report.fallback_mass.iter().copied().fold(0.0, f64::max));
    out.report("se_a", "standard error of ∥B∥_𝒜", report.se_a);
    out
}
