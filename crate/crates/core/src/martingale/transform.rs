//! Steering weights and the martingale transform T_W(G) = Im Σ w_{k−1} ΔG_k.

use num_complex::Complex64;

use super::{Martingale, ProductFunction};
use crate::error::{LabError, Result};

/// Below this modulus the steering weight falls back to a fixed value.
pub const ZERO_FIBRE: f64 = 1e-12;

/// `weights[k]` is w_k on `T^k`, used at step k+1.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringWeights {
    weights: Vec<ProductFunction>,
    fallback_mass: Vec<f64>,
}

impl SteeringWeights {
    pub fn new(weights: Vec<ProductFunction>) -> Result<Self> {
        for (k, w) in weights.iter().enumerate() {
            if w.arity() != k {
                return Err(LabError::ArityMismatch { expected: k, found: w.arity() });
            }
            if w.values().iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
                return Err(LabError::RangeError(format!("weight w_{k} is not unimodular")));
            }
        }
        let fallback_mass = vec![0.0; weights.len()];
        Ok(Self { weights, fallback_mass })
    }

    pub fn constant(grid: crate::torus::TorusGrid, depth: usize, w: Complex64) -> Result<Self> {
        Self::new((0..depth).map(|k| ProductFunction::constant(grid, k, w)).collect())
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    /// w_k, k = 0..depth−1.
    pub fn weight(&self, k: usize) -> &ProductFunction {
        &self.weights[k]
    }

    /// Fraction of the grid on which w_k took the fallback value.
    pub fn fallback_mass(&self) -> &[f64] {
        &self.fallback_mass
    }
}

/// w_k = conj(F_k − D_k)/|F_k − D_k|, or `fallback` where the modulus is below [`ZERO_FIBRE`].
pub fn steering_weights(f: &Martingale, d: &Martingale, fallback: Complex64) -> Result<SteeringWeights> {
    let diff = f.try_sub(d)?;
    let sums = diff.partial_sums();
    let mut weights = Vec::with_capacity(f.depth());
    let mut fallback_mass = Vec::with_capacity(f.depth());
    for s in &sums[..f.depth()] {
        let w = s.map(|v| {
            let r = v.norm();
            if r < ZERO_FIBRE {
                fallback
            } else {
                v.conj() / r
            }
        });
        let hits = s.values().iter().filter(|v| v.norm() < ZERO_FIBRE).count();
        fallback_mass.push(hits as f64 / s.len() as f64);
        weights.push(w);
    }
    Ok(SteeringWeights { weights, fallback_mass })
}

/// ΔT_k = Im(w_{k−1}·ΔG_k), stored as a real-valued martingale.
pub fn transform(g: &Martingale, w: &SteeringWeights) -> Result<Martingale> {
    if w.depth() != g.depth() {
        return Err(LabError::ArityMismatch { expected: g.depth(), found: w.depth() });
    }
    if let Some(w0) = w.weights.first() {
        if w0.grid() != g.grid() {
            return Err(LabError::GridMismatch(g.grid().m(), w0.grid().m()));
        }
    }
    let diffs = g
        .diffs()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            w.weights[i]
                .broadcast(i + 1)
                .zip_with(d, |a, b| Complex64::new((a * b).im, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Martingale::new(g.grid(), Complex64::new(0.0, 0.0), diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;

    fn grid(m: usize) -> TorusGrid {
        TorusGrid::new(m).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e1(g: TorusGrid) -> Martingale {
        Martingale::new(g, c(0.0, 0.0), vec![ProductFunction::from_angles(g, 1, |t| Complex64::from_polar(1.0, t[0]))]).unwrap()
    }

    #[test]
    fn transform_examples() {
        let g = grid(32);
        let t = transform(&e1(g), &SteeringWeights::constant(g, 1, c(1.0, 0.0)).unwrap()).unwrap();
        let sin = ProductFunction::from_angles(g, 1, |t| c(t[0].sin(), 0.0));
        assert!(t.diff(1).max_abs_diff(&sin) < 1e-14);
        let t = transform(&e1(g), &SteeringWeights::constant(g, 1, c(0.0, -1.0)).unwrap()).unwrap();
        let mcos = ProductFunction::from_angles(g, 1, |t| c(-t[0].cos(), 0.0));
        assert!(t.diff(1).max_abs_diff(&mcos) < 1e-14);
        let two = SteeringWeights::constant(g, 2, c(1.0, 0.0)).unwrap();
        assert!(matches!(transform(&e1(g), &two), Err(LabError::ArityMismatch { .. })));
    }

    #[test]
    fn weight_examples() {
        let g = grid(8);
        let zero = Martingale::zero(g, 2).unwrap();
        let mut f = Martingale::new(g, c(1.0, 0.0), zero.diffs().to_vec()).unwrap();
        let w = steering_weights(&f, &zero, c(0.0, 1.0)).unwrap();
        assert!(w.weight(0).values().iter().all(|v| *v == c(1.0, 0.0)));
        assert!(w.weight(1).values().iter().all(|v| *v == c(1.0, 0.0)));
        f = Martingale::new(g, c(0.0, 2.5), zero.diffs().to_vec()).unwrap();
        let w = steering_weights(&f, &zero, c(1.0, 0.0)).unwrap();
        assert!(w.weight(1).values().iter().all(|v| (v - c(0.0, -1.0)).norm() < 1e-15));
        let w = steering_weights(&f, &f, c(1.0, 0.0)).unwrap();
        assert!(w.weight(1).values().iter().all(|v| *v == c(1.0, 0.0)));
        assert_eq!(w.fallback_mass(), &[1.0, 1.0]);
        assert!(SteeringWeights::new(vec![ProductFunction::scalar(g, c(2.0, 0.0))]).is_err());
    }
}
