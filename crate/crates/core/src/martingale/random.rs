//! Seeded generators of Hardy, dyadic and general martingales.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Martingale, ProductFunction, DEPTH_CAP};
use crate::error::{LabError, Result};
use crate::rng::stream_rng;
use crate::torus::TorusGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeLaw {
    Gaussian,
    Uniform,
    HeavyTailed,
}

impl AmplitudeLaw {
    fn sample(self, rng: &mut ChaCha8Rng) -> Complex64 {
        match self {
            AmplitudeLaw::Gaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            AmplitudeLaw::Uniform => Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            AmplitudeLaw::HeavyTailed => {
                let r = LogNormal::new(0.0, 1.5).expect("valid parameters").sample(rng);
                Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    pub depth: usize,
    /// Highest frequency in the last coordinate.
    pub degree: usize,
    /// Highest frequency of the prefix-dependent coefficients.
    pub prefix_degree: usize,
    pub law: AmplitudeLaw,
    pub seed: u64,
    pub start: Complex64,
}

impl HardyConfig {
    pub fn new(depth: usize, degree: usize, law: AmplitudeLaw, seed: u64) -> Self {
        Self {
            depth,
            degree,
            prefix_degree: 2,
            law,
            seed,
            start: Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicConfig {
    pub depth: usize,
    pub law: AmplitudeLaw,
    pub seed: u64,
    pub start: Complex64,
}

/// Random trigonometric polynomial of one coordinate, sampled on the grid.
fn random_trig(grid: TorusGrid, degree: usize, law: AmplitudeLaw, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let m = grid.m();
    let coeffs: Vec<(i64, Complex64)> = (-(degree as i64)..=degree as i64).map(|k| (k, law.sample(rng))).collect();
    let norm = 1.0 / (coeffs.len() as f64).sqrt();
    (0..m)
        .map(|j| coeffs.iter().map(|&(k, c)| c * grid.monomial_at(k, j)).sum::<Complex64>() * norm)
        .collect()
}

fn build(grid: TorusGrid, cfg: &HardyConfig, freqs: &[i64]) -> Result<Martingale> {
    if cfg.depth > DEPTH_CAP {
        return Err(LabError::DepthCap { depth: cfg.depth, cap: DEPTH_CAP });
    }
    if cfg.degree == 0 || cfg.degree > grid.m() / 8 {
        return Err(LabError::DegreeOverflow { degree: cfg.degree, m: grid.m() });
    }
    if 2 * cfg.prefix_degree >= grid.m() / 2 {
        return Err(LabError::DegreeOverflow { degree: cfg.prefix_degree, m: grid.m() });
    }
    let m = grid.m();
    let monomials: Vec<Vec<Complex64>> = freqs
        .iter()
        .map(|&k| (0..m).map(|j| grid.monomial_at(k, j)).collect())
        .collect();
    let mut diffs = Vec::with_capacity(cfg.depth);
    for k in 1..=cfg.depth {
        let mut rng = stream_rng(cfg.seed, k as u64);
        let scale = cfg.law.sample(&mut rng).norm().max(1e-3);
        // a_j(x) = c_j + Σ_i p_{j,i}(x_i) + Π_i q_{j,i}(x_i)
        let mut terms = Vec::with_capacity(freqs.len());
        for _ in freqs {
            let c0 = cfg.law.sample(&mut rng);
            let p: Vec<Vec<Complex64>> =
                (0..k - 1).map(|_| random_trig(grid, cfg.prefix_degree, cfg.law, &mut rng)).collect();
            let q: Vec<Vec<Complex64>> =
                (0..k - 1).map(|_| random_trig(grid, cfg.prefix_degree, cfg.law, &mut rng)).collect();
            terms.push((c0, p, q));
        }
        let weight = scale / (freqs.len() as f64).sqrt();
        let diff = ProductFunction::from_indices(grid, k, |idx| {
            let (prefix, y) = idx.split_at(k - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for ((c0, p, q), mono) in terms.iter().zip(&monomials) {
                let mut a = *c0;
                let mut prod = Complex64::new(1.0, 0.0);
                for (i, &xi) in prefix.iter().enumerate() {
                    a += p[i][xi];
                    prod *= q[i][xi];
                }
                if !prefix.is_empty() {
                    a += prod;
                }
                acc += a * mono[y[0]];
            }
            acc * weight
        });
        diffs.push(diff);
    }
    Martingale::new(grid, cfg.start, diffs)
}

/// Hardy martingale: each ΔF_k is an analytic polynomial of degree ≤ `degree`
/// in the last coordinate whose coefficients are trigonometric polynomials of the prefix.
pub fn random_hardy(grid: TorusGrid, cfg: &HardyConfig) -> Result<Martingale> {
    let freqs: Vec<i64> = (1..=cfg.degree as i64).collect();
    build(grid, cfg, &freqs)
}

/// Like [`random_hardy`] but with frequencies of both signs in the last coordinate.
pub fn random_martingale(grid: TorusGrid, cfg: &HardyConfig) -> Result<Martingale> {
    let d = cfg.degree as i64;
    let freqs: Vec<i64> = (-d..=d).filter(|&k| k != 0).collect();
    build(grid, cfg, &freqs)
}

/// ΔD_k = d_{k−1}(σ₁, …, σ_{k−1})·σ_k with d drawn independently per sign pattern.
pub fn random_dyadic(grid: TorusGrid, cfg: &DyadicConfig) -> Result<Martingale> {
    if cfg.depth > DEPTH_CAP {
        return Err(LabError::DepthCap { depth: cfg.depth, cap: DEPTH_CAP });
    }
    let mut diffs = Vec::with_capacity(cfg.depth);
    for k in 1..=cfg.depth {
        let mut rng = stream_rng(cfg.seed, k as u64);
        let table: Vec<Complex64> = (0..1usize << (k - 1)).map(|_| cfg.law.sample(&mut rng)).collect();
        diffs.push(ProductFunction::from_indices(grid, k, |idx| {
            let (prefix, y) = idx.split_at(k - 1);
            let pattern = prefix
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &xi)| acc | (((grid.sign_at(1, xi) < 0.0) as usize) << i));
            table[pattern] * grid.sign_at(1, y[0])
        }));
    }
    Martingale::new(grid, cfg.start, diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{is_dyadic, is_hardy};

    fn grid(m: usize) -> TorusGrid {
        TorusGrid::new(m).unwrap()
    }

    #[test]
    fn hardy_sampler_is_deterministic_and_hardy() {
        let g = grid(32);
        for law in [AmplitudeLaw::Gaussian, AmplitudeLaw::Uniform, AmplitudeLaw::HeavyTailed] {
            let cfg = HardyConfig::new(3, 4, law, 11);
            let a = random_hardy(g, &cfg).unwrap();
            let b = random_hardy(g, &cfg).unwrap();
            assert_eq!(a, b);
            assert!(is_hardy(&a, 1e-9));
            assert!(a.martingale_defect() < 1e-12 * a.scale_hint().max(1.0));
            let other = random_hardy(g, &HardyConfig { seed: 12, ..cfg }).unwrap();
            assert_ne!(a, other);
        }
    }

    #[test]
    fn single_step_degree_one_is_a_monomial() {
        let g = grid(16);
        let f = random_hardy(g, &HardyConfig::new(1, 1, AmplitudeLaw::Gaussian, 3)).unwrap();
        let d = f.diff(1);
        let c = d.values()[0] / g.monomial_at(1, 0);
        for j in 0..16 {
            assert!((d.values()[j] - c * g.monomial_at(1, j)).norm() < 1e-14);
        }
    }

    #[test]
    fn general_sampler_is_not_hardy() {
        let g = grid(32);
        let f = random_martingale(g, &HardyConfig::new(2, 3, AmplitudeLaw::Gaussian, 5)).unwrap();
        assert!(!is_hardy(&f, 1e-9));
        assert!(f.martingale_defect() < 1e-12 * f.scale_hint());
    }

    #[test]
    fn dyadic_sampler_is_dyadic() {
        let g = grid(16);
        let cfg = DyadicConfig { depth: 3, law: AmplitudeLaw::Uniform, seed: 2, start: Complex64::new(1.0, 0.0) };
        let d = random_dyadic(g, &cfg).unwrap();
        assert!(is_dyadic(&d, 1e-12));
        assert!(d.martingale_defect() < 1e-14);
    }

    #[test]
    fn sampler_limits() {
        let g = grid(16);
        assert!(random_hardy(g, &HardyConfig::new(5, 1, AmplitudeLaw::Gaussian, 1)).is_err());
        assert!(random_hardy(g, &HardyConfig::new(2, 3, AmplitudeLaw::Gaussian, 1)).is_err());
    }
}
