//! Measured constants for the Lepingle and Garnett–Jones type inequalities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeLaw, Martingale};
use crate::error::{LabError, Result};
use crate::rng::stream_rng;

/// ∥(Σ(E_{k−1}|v_k|)²)^{1/2}∥₁ / ∥(Σ|v_k|²)^{1/2}∥₁; zero for the zero martingale.
pub fn lepingle_ratio(v: &Martingale) -> f64 {
    let n = v.depth();
    if n == 0 {
        return 0.0;
    }
    let len = v.grid().m().pow(n as u32);
    let m = v.grid().m() as f64;
    let mut prev = vec![0.0; len];
    let mut sq = vec![0.0; len];
    for d in v.diffs() {
        let cond: Vec<f64> = d.fibres().map(|f| f.iter().map(|x| x.norm()).sum::<f64>() / m).collect();
        let rep_c = len / cond.len();
        let rep_d = len / d.len();
        for i in 0..len {
            prev[i] += cond[i / rep_c].powi(2);
            sq[i] += d.values()[i / rep_d].norm_sqr();
        }
    }
    let num: f64 = prev.iter().map(|x| x.sqrt()).sum();
    let den: f64 = sq.iter().map(|x| x.sqrt()).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Rademacher martingale Σ d_{k−1}(ε₁, …, ε_{k−1}) ε_k; `d[k−1]` is indexed by
/// the bit pattern of ε₁..ε_{k−1} (bit i set ⇔ ε_{i+1} = −1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicFamily {
    d: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarnettJones {
    /// Σ_k |R_k(D)|².
    pub lhs: f64,
    /// E|Σ d_{k−1} ε_k|.
    pub l1: f64,
    /// E(Σ|d_{k−1}|²)^{1/2}.
    pub square: f64,
    pub ratio: f64,
}

impl DyadicFamily {
    pub fn new(d: Vec<Vec<Complex64>>) -> Result<Self> {
        for (k, row) in d.iter().enumerate() {
            if row.len() != 1 << k {
                return Err(LabError::Config(format!("d_{k} needs {} entries, got {}", 1 << k, row.len())));
            }
        }
        Ok(Self { d })
    }

    pub fn random(depth: usize, law: AmplitudeLaw, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let d = (0..depth)
            .map(|k| (0..1usize << k).map(|_| law_sample(law, &mut rng)).collect())
            .collect();
        Self { d }
    }

    pub fn depth(&self) -> usize {
        self.d.len()
    }
}

fn law_sample(law: AmplitudeLaw, rng: &mut rand_chacha::ChaCha8Rng) -> Complex64 {
    // one-step Hardy sample with degree 1 has a single coefficient drawn from `law`
    use rand::Rng;
    use rand_distr::{Distribution, LogNormal, StandardNormal};
    match law {
        AmplitudeLaw::Gaussian => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        }
        AmplitudeLaw::Uniform => Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        AmplitudeLaw::HeavyTailed => {
            let r = LogNormal::new(0.0, 1.5).expect("valid parameters").sample(rng);
            Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        }
    }
}

/// Σ|R_k(D)|² against (E|D|)(E(Σ|d_{k−1}|²)^{1/2}), by enumeration of all sign patterns.
pub fn garnett_jones_ratio(fam: &DyadicFamily) -> GarnettJones {
    let n = fam.depth();
    let patterns = 1usize << n;
    let lhs: f64 = fam
        .d
        .iter()
        .map(|row| (row.iter().sum::<Complex64>() / row.len() as f64).norm_sqr())
        .sum();
    let mut l1 = 0.0;
    let mut square = 0.0;
    for bits in 0..patterns {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        for (k, row) in fam.d.iter().enumerate() {
            let prefix = bits & ((1 << k) - 1);
            let eps = if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
            sum += row[prefix] * eps;
            sq += row[prefix].norm_sqr();
        }
        l1 += sum.norm();
        square += sq.sqrt();
    }
    l1 /= patterns as f64;
    square /= patterns as f64;
    let den = l1 * square;
    GarnettJones {
        lhs,
        l1,
        square,
        ratio: if den == 0.0 { 0.0 } else { lhs / den },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::ProductFunction;
    use crate::torus::TorusGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lepingle_constant_moduli() {
        let g = TorusGrid::new(16).unwrap();
        let d1 = ProductFunction::from_angles(g, 1, |t| Complex64::from_polar(2.0, t[0]));
        let f = Martingale::new(g, Complex64::new(0.0, 0.0), vec![d1]).unwrap();
        assert_abs_diff_eq!(lepingle_ratio(&f), 1.0, epsilon = 1e-14);
        assert_eq!(lepingle_ratio(&Martingale::zero(g, 2).unwrap()), 0.0);
    }

    #[test]
    fn garnett_jones_single_step() {
        // D = d₀ε₁: R₁ = d₀, E|D| = |d₀|, E|d₀| = |d₀|
        let fam = DyadicFamily::new(vec![vec![Complex64::new(3.0, 4.0)]]).unwrap();
        let gj = garnett_jones_ratio(&fam);
        assert_abs_diff_eq!(gj.lhs, 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gj.ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn garnett_jones_two_steps_by_hand() {
        let d0 = Complex64::new(1.0, 0.0);
        let d1 = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let gj = garnett_jones_ratio(&DyadicFamily::new(vec![vec![d0], d1]).unwrap());
        // R₁ = 1, R₂ = 0; D ∈ {2, 0, 0, −2}
        assert_abs_diff_eq!(gj.lhs, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gj.l1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gj.square, 2f64.sqrt(), epsilon = 1e-14);
        assert!(DyadicFamily::new(vec![vec![d0], vec![d0]]).is_err());
    }
}
