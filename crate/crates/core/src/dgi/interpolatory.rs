//! The interpolatory bound ∥E_D F∥_L1 ≤ C∥F − E_D F∥^{1/8}∥F∥^{7/8} assembled from
//! its three ingredients, plus the cosine-part estimates used for the third.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::decompose::{decompose, verify_dgi, DecompositionReport};
use super::scalar::cosine_slice_slacks;
use super::{ratio, ConstantsReport};
use crate::error::{LabError, Result};
use crate::martingale::{
    cosine_part, dyadic_project, first_non_hardy_step, norm_h1, norm_l1, norm_p, projection_p, steering_weights,
    transform, Martingale, SteeringWeights,
};
use crate::torus::CHECK_TOL;
use crate::truncation::TruncationConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpolatoryReport {
    pub decomposition: DecompositionReport,
    pub constants: ConstantsReport,
    /// ∥F∥_L1.
    pub f_l1: f64,
    /// ∥F − E_D F∥_L1.
    pub eps: f64,
    /// ∥E_D F∥_L1.
    pub ed_f_l1: f64,
}

/// Runs the decomposition against D = E_D F and measures every constant of the chain.
pub fn interpolatory_pipeline(f: &Martingale, cfg: &TruncationConfig) -> Result<InterpolatoryReport> {
    if let Some(step) = first_non_hardy_step(f, CHECK_TOL) {
        return Err(LabError::NotHardy { step });
    }
    let d = dyadic_project(f);
    let report = decompose(f, &d, cfg)?;
    let mut k = verify_dgi(&report);
    let f_l1 = norm_l1(f);
    let eps = report.norms.f_minus_d.l1;
    let ed_f_l1 = norm_l1(&d);
    let g = &report.g;
    let ed_g = dyadic_project(g);
    let g_minus = g.try_sub(&ed_g)?;
    let w = steering_weights(f, &d, Complex64::new(1.0, 0.0))?;
    let tw = norm_p(&transform(&g_minus, &w)?);
    k.report("c_b", "∥B∥_𝒜 / ∥F − E_D F∥_L1", ratio(report.norms.b.a, eps));
    k.report("c_transform", "∥T_W(G − E_D G)∥_𝒫 / (∥F − E_D F∥_L1·∥F∥_L1)^{1/2}", ratio(tw, (eps * f_l1).sqrt()));
    let g_p = report.norms.g.p;
    let g_l1 = report.norms.g.l1;
    k.report(
        "c_dyadic_h1",
        "∥E_D G∥_H1 / (∥T_W(G − E_D G)∥_𝒫^{1/4}∥G∥_𝒫^{3/4} + ∥G − E_D G∥_L1^{1/2}∥G∥_L1^{1/2})",
        ratio(norm_h1(&ed_g), tw.powf(0.25) * g_p.powf(0.75) + (norm_l1(&g_minus) * g_l1).sqrt()),
    );
    k.report(
        "c_interpolatory",
        "∥E_D F∥_L1 / (∥F − E_D F∥_L1^{1/8}∥F∥_L1^{7/8})",
        ratio(ed_f_l1, eps.powf(0.125) * f_l1.powf(0.875)),
    );
    k.report("a0", "∥F∥_L1 / ∥F − E_D F∥_L1", ratio(f_l1, eps));
    Ok(InterpolatoryReport { decomposition: report, constants: k, f_l1, eps, ed_f_l1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub log_c: f64,
    pub samples: usize,
}

/// Least-squares fit of log(∥E_D F∥/∥F∥) = log C + α·log(∥F − E_D F∥/∥F∥)
/// over (∥F∥, ∥F − E_D F∥, ∥E_D F∥) triples. Degenerate triples are skipped.
pub fn fit_alpha(points: &[(f64, f64, f64)]) -> Option<AlphaFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(f, e, d)| *f > 0.0 && *e > 0.0 && *d > 0.0)
        .map(|(f, e, d)| ((e / f).ln(), (d / f).ln()))
        .collect();
    let n = xy.len() as f64;
    if xy.len() < 2 {
        return None;
    }
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-24 {
        return None;
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    Some(AlphaFit { alpha, log_c: my - alpha * mx, samples: xy.len() })
}

/// Both per-slice bounds on the even part u of ΔG_k(x, ·), with b the
/// σ-coefficient of ΔE_D G_k(x, ·) and w = w_{k−1}(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceEstimate {
    pub step: usize,
    pub slice: usize,
    /// 8(a² − |μ|²) + ∫|u − μσ|² − ∫|u − bσ|².
    pub slack_even: f64,
    /// 8∫Im²(w(h − bσ)) − (a − |b|)² − ∫|u − μσ|².
    pub slack_imag: f64,
    /// Magnitude of the compared terms.
    pub scale: f64,
}

pub fn slice_estimates(g: &Martingale, w: &SteeringWeights) -> Result<Vec<SliceEstimate>> {
    if w.depth() != g.depth() {
        return Err(LabError::DepthMismatch(g.depth(), w.depth()));
    }
    let ed = dyadic_project(g);
    let mut out = Vec::new();
    for k in 1..=g.depth() {
        let dg = g.diff(k);
        let weights = w.weight(k - 1);
        for x in 0..dg.fibre_count() {
            let b = ed.diff(k).fibre_fn(x).pair_sign();
            let [(s1, c1), (s2, c2)] = cosine_slice_slacks(&dg.fibre_fn(x), weights.values()[x], b)?;
            out.push(SliceEstimate { step: k, slice: x, slack_even: s1, slack_imag: s2, scale: c1.max(c2) });
        }
    }
    Ok(out)
}

/// Measured constants of the cosine-part estimates, with the per-slice
/// bounds asserted at constant 8.
pub fn cosine_estimate_check(g: &Martingale, w: &SteeringWeights) -> Result<ConstantsReport> {
    if let Some(step) = first_non_hardy_step(g, CHECK_TOL) {
        return Err(LabError::NotHardy { step });
    }
    let u = cosine_part(g);
    let v = g.try_sub(&u)?;
    let ed_g = dyadic_project(g);
    let u_minus = u.try_sub(&dyadic_project(&u))?;
    let g_minus = g.try_sub(&ed_g)?;
    let tw = norm_p(&transform(&g_minus, w)?);
    let mut k = ConstantsReport::new();
    k.report(
        "c_cosine_p",
        "∥U − E_D U∥_𝒫 / (∥T_W(G − E_D G)∥_𝒫^{1/2}∥G∥_𝒫^{1/2})",
        ratio(norm_p(&u_minus), (tw * norm_p(g)).sqrt()),
    );
    let g_h1 = norm_h1(g);
    k.report(
        "c_cosine_h1",
        "∥E_D G∥_H1 / (∥U − E_D U∥_H1^{1/2}∥G∥_H1^{1/2} + ∥G − E_D G∥_L1^{1/2}∥G∥_H1^{1/2})",
        ratio(norm_h1(&ed_g), (norm_h1(&u_minus) * g_h1).sqrt() + (norm_l1(&g_minus) * g_h1).sqrt()),
    );
    k.report(
        "c_sine_projection",
        "∥P(V)∥_H1 / (∥V∥_L1^{1/2}∥V∥_H1^{1/2})",
        ratio(norm_h1(&projection_p(&v)), (norm_l1(&v) * norm_h1(&v)).sqrt()),
    );
    let slices = slice_estimates(g, w)?;
    let worst = |f: fn(&SliceEstimate) -> f64| {
        slices.iter().map(|s| f(s) / s.scale.max(1.0)).fold(f64::INFINITY, f64::min)
    };
    let (e, i) = if slices.is_empty() { (0.0, 0.0) } else { (worst(|s| s.slack_even), worst(|s| s.slack_imag)) };
    k.assert_ge("slice_even_slack", "∫|u − bσ|² ≤ 8(a² − |μ|²) + ∫|u − μσ|²", e, -CHECK_TOL);
    k.assert_ge("slice_imag_slack", "(a − |b|)² + ∫|u − μσ|² ≤ 8∫Im²(w(h − bσ))", i, -CHECK_TOL);
    Ok(k)
}
