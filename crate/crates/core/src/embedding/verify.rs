//! Measured constants of the embedding: the small-perturbation kernels, the
//! equivalence band of T, and distances from L¹(Σ) to analytic polynomials.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::{kernel_a, kernel_b, random_sigma_measurable, realized_patterns};
use super::lacunary::{operator_j, transfer_grid, LacunaryFunction};
use super::ladder::{smoothed_sign, FrequencyLadder};
use crate::descent::{l1_descent, SparseVec};
use crate::dgi::{ratio, ConstantsReport};
use crate::error::{LabError, Result};
use crate::martingale::{dyadic_project, norm_l1};
use crate::rng::stream_rng;
use crate::torus::{sign_re, sign_re_dilated, TorusFunction};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Slack added to ε in the A − B check.
pub const SMALL_TOL: f64 = 1e-6;
/// Lower edge of the T-equivalence band below which the run is flagged.
pub const MEYER_ALARM: f64 = 0.05;

pub fn verify_small(ladder: &FrequencyLadder) -> Result<ConstantsReport> {
    verify_small_with(ladder, 8, 0)
}

/// sup_τ ∫|A − B|, sup_τ E_w|A − G| on the transfer grid, and the largest
/// ∥Jh − E_D Jh∥/∥E_D Jh∥ over `samples` random Σ-measurable h.
pub fn verify_small_with(ladder: &FrequencyLadder, samples: usize, seed: u64) -> Result<ConstantsReport> {
    let mut rep = ConstantsReport::new();
    let patterns = realized_patterns(ladder);
    let mut a_minus_b: f64 = 0.0;
    for tau in &patterns {
        a_minus_b = a_minus_b.max((&kernel_a(ladder, tau)? - &kernel_b(ladder, tau)).l1_norm());
    }
    rep.assert_le("a_minus_b_l1", "sup_ζ ∫|A(·,ζ) − B(·,ζ)| ≤ ε", a_minus_b, ladder.eps() + SMALL_TOL);

    let tg = transfer_grid(ladder);
    let sigma = sign_re(tg);
    let mut s_t = Vec::new();
    let mut gamma = Vec::new();
    for &a in ladder.a() {
        let s = smoothed_sign(tg, a)?;
        gamma.push(s.values().iter().zip(sigma.values()).map(|(x, y)| x * y).sum::<Complex64>() / tg.m() as f64);
        s_t.push(s);
    }
    let levels = ladder.levels();
    let points = tg.m().pow(levels as u32);
    let mut a_minus_g: f64 = 0.0;
    for tau in &patterns {
        let total: f64 = (0..points)
            .into_par_iter()
            .map(|p| {
                let (mut a, mut g, mut rest) = (ONE, ONE, p);
                for k in (0..levels).rev() {
                    let i = rest % tg.m();
                    rest /= tg.m();
                    a *= ONE + s_t[k].values()[i] * tau[k];
                    g *= ONE + gamma[k] * sigma.values()[i] * tau[k];
                }
                (a - g).norm()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        a_minus_g = a_minus_g.max(total / points as f64);
    }
    rep.report("a_minus_g_l1", "sup_ζ E_w|A(w,ζ) − G(w,ζ)|", a_minus_g);
    rep.report("achieved_eps_sum", "Σ_k ∥s_k − σ∥_L1", ladder.achieved_errors().iter().sum());

    let perturbation = (0..samples)
        .into_par_iter()
        .map(|t| {
            let h = random_sigma_measurable(ladder, &mut stream_rng(seed, t as u64));
            let jh = operator_j(&h, ladder)?;
            let ed = dyadic_project(&jh);
            Ok(ratio(norm_l1(&jh.try_sub(&ed)?), norm_l1(&ed)))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rep.report("dyadic_perturbation", "max ∥Jh − E_D Jh∥/∥E_D Jh∥ over h ∈ L¹(Σ)", perturbation);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeyerBand {
    /// Smallest ∥Tf∥/∥f∥.
    pub c: f64,
    /// Largest ∥Tf∥/∥f∥.
    pub big_c: f64,
    pub ratios: Vec<f64>,
}

/// ∥Tf∥_L1 / ∥f∥_L1 over `trials` functions with Gaussian coefficients on the box.
pub fn meyer_band(ladder: &FrequencyLadder, trials: usize, seed: u64) -> Result<MeyerBand> {
    if trials == 0 {
        return Err(LabError::Config("meyer band needs at least one trial".into()));
    }
    let tg = transfer_grid(ladder);
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let coeffs = (0..ladder.box_size())
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let f = LacunaryFunction::from_coeffs(ladder, coeffs)?;
            Ok(norm_l1(&f.transfer(tg)?) / f.to_torus()?.l1_norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let c = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let big_c = ratios.iter().copied().fold(0.0, f64::max);
    Ok(MeyerBand { c, big_c, ratios })
}

/// min over f = Σ_{1≤j≤degree} c_j z^j of ∥h − f∥_L1 / ∥h∥_L1, by coordinate
/// descent from f = 0. Returns the ratio and the minimizer found.
pub fn best_analytic_approximation(h: &TorusFunction, degree: usize, sweeps: usize) -> Result<(f64, TorusFunction)> {
    let grid = h.grid();
    if degree >= grid.m() / 2 {
        return Err(LabError::DegreeOverflow { degree, m: grid.m() });
    }
    let h_l1 = h.l1_norm();
    if h_l1 <= 0.0 {
        return Err(LabError::RangeError("cannot normalize by a zero function".into()));
    }
    let basis: Vec<SparseVec> = (1..=degree as i64)
        .map(|j| SparseVec { index: (0..grid.m()).collect(), values: TorusFunction::monomial(grid, j).into_values() })
        .collect();
    let run = l1_descent(h.values(), &basis, vec![Complex64::new(0.0, 0.0); degree], sweeps, 0.5 * h_l1);
    let pairs: Vec<(i64, Complex64)> = run.coeffs.iter().enumerate().map(|(j, &c)| (j as i64 + 1, c)).collect();
    Ok((run.l1 / h_l1, TorusFunction::from_coeffs(grid, &pairs)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    /// Pairs (h, f) sampled.
    pub trials: usize,
    /// Highest frequency of the analytic competitor f.
    pub degree: usize,
    pub sweeps: usize,
    /// Measured distance constant fed into A = 4A₁A₀∥J∥.
    pub a0: f64,
    pub meyer_trials: usize,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self { trials: 200, degree: 8, sweeps: 40, a0: 1.0, meyer_trials: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub constants: ConstantsReport,
    /// ∥f − h∥/∥h∥ for each sampled pair, sorted.
    pub ratios: Vec<f64>,
    pub meyer: MeyerBand,
}

/// Distances from sampled h ∈ L¹(Σ) to analytic polynomials, the norms of J
/// on those h, and the equivalence band of T. Only the band's lower edge is gated.
pub fn verify_embedding(ladder: &FrequencyLadder, cfg: &EmbeddingConfig) -> Result<EmbeddingReport> {
    if cfg.trials == 0 {
        return Err(LabError::Config("embedding check needs at least one trial".into()));
    }
    let samples = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let h = if t == 0 {
                sign_re_dilated(ladder.grid(), ladder.n()[0])
            } else {
                random_sigma_measurable(ladder, &mut stream_rng(cfg.seed, t as u64))
            };
            let (dist, _) = best_analytic_approximation(&h, cfg.degree, cfg.sweeps)?;
            let j = norm_l1(&operator_j(&h, ladder)?) / h.l1_norm();
            Ok((dist, j))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let sign_distance = samples[0].0;
    let mut ratios: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ratios.sort_by(f64::total_cmp);
    let j_norm = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let a1 = samples.iter().map(|s| 1.0 / s.1).fold(0.0, f64::max);
    let meyer = meyer_band(ladder, cfg.meyer_trials.max(1), cfg.seed)?;

    let mut rep = ConstantsReport::new();
    rep.report("distance_min", "min ∥f − h∥/∥h∥", ratios[0]);
    rep.report("distance_median", "median ∥f − h∥/∥h∥", ratios[ratios.len() / 2]);
    rep.report("distance_max", "max ∥f − h∥/∥h∥", ratios[ratios.len() - 1]);
    rep.report("implied_a", "∥h∥ ≤ A∥f − h∥, A = 1/min ratio", 1.0 / ratios[0]);
    rep.report("sign_distance", "min_f ∥σ(z^{n_1}) − f∥/∥σ∥", sign_distance);
    rep.report("j_norm", "max ∥Jh∥/∥h∥", j_norm);
    rep.report("a1", "max ∥h∥/∥Jh∥", a1);
    rep.report("a0", "distance constant supplied", cfg.a0);
    rep.report("a_chain", "4·A₁·A₀·∥J∥", 4.0 * a1 * cfg.a0 * j_norm);
    rep.assert_ge("meyer_c", "min ∥Tf∥/∥f∥ ≥ alarm", meyer.c, MEYER_ALARM);
    rep.report("meyer_big_c", "max ∥Tf∥/∥f∥", meyer.big_c);
    Ok(EmbeddingReport { constants: rep, ratios, meyer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgi::Status;
    use crate::torus::TorusGrid;

    #[test]
    fn single_level_a_minus_b_is_the_smoothing_error() {
        let l = FrequencyLadder::build(1, 0.2, TorusGrid::new(1024).unwrap()).unwrap();
        let rep = verify_small_with(&l, 2, 0).unwrap();
        let v = rep.value("a_minus_b_l1").unwrap();
        // |A − B| = |s₁ − σ|·|τ| with |τ| = 1.
        assert!((v - l.achieved_errors()[0]).abs() < 1e-12);
        assert!(v <= 0.1 + 1e-12);
        assert!(rep.all_pass());
    }

    #[test]
    fn tiny_orders_fail_the_small_check() {
        let l = FrequencyLadder::with_orders(TorusGrid::new(1024).unwrap(), vec![1, 1], 0.2).unwrap();
        let rep = verify_small_with(&l, 1, 0).unwrap();
        assert_eq!(rep.get("a_minus_b_l1").unwrap().status, Status::Fail);
    }

    #[test]
    fn zero_competitor_gives_ratio_one() {
        let g = TorusGrid::new(256).unwrap();
        let h = sign_re(g);
        let (r, f) = best_analytic_approximation(&h, 8, 0).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(f.sup_norm(), 0.0);
        let (r, _) = best_analytic_approximation(&h, 8, 40).unwrap();
        assert!(r > 0.3 && r < 1.0, "{r}");
    }

    #[test]
    fn embedding_report_on_a_small_ladder() {
        let l = FrequencyLadder::with_orders(TorusGrid::new(512).unwrap(), vec![3, 4], 0.2).unwrap();
        let cfg = EmbeddingConfig { trials: 6, sweeps: 10, meyer_trials: 10, ..Default::default() };
        let rep = verify_embedding(&l, &cfg).unwrap();
        assert_eq!(rep.ratios.len(), 6);
        assert!(rep.ratios.windows(2).all(|w| w[0] <= w[1]));
        assert!(rep.ratios[0] > 0.0 && rep.ratios[5] <= 1.0);
        assert_eq!(rep.meyer.ratios.len(), 10);
        assert!(rep.meyer.c <= rep.meyer.big_c);
    }
}
