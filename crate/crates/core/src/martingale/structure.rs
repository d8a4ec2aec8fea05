//! Hardy, dyadic, cosine/sine and regular structure of martingales.

use num_complex::Complex64;

use super::{Martingale, ProductFunction};
use crate::error::{LabError, Result};
use crate::torus::{pair_sign_slice, TorusFunction, TorusGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn tol_scale(f: &Martingale, tol: f64) -> f64 {
    tol * f.scale_hint().max(1.0)
}

/// Every fibre of every difference is analytic with zero mean.
pub fn is_hardy(f: &Martingale, tol: f64) -> bool {
    first_non_hardy_step(f, tol).is_none()
}

pub(crate) fn first_non_hardy_step(f: &Martingale, tol: f64) -> Option<usize> {
    let t = tol_scale(f, tol);
    let m = f.grid().m();
    for (i, d) in f.diffs().iter().enumerate() {
        for fib in d.fibres() {
            let spec = TorusFunction::new(f.grid(), fib.to_vec()).expect("fibre length").spectrum().to_vec();
            if spec[0].norm() > t || spec[m / 2].norm() > t || (m / 2 + 1..m).any(|i| spec[i].norm() > t) {
                return Some(i + 1);
            }
        }
    }
    None
}

fn sign_projection(grid: TorusGrid, line: &[Complex64], keep_mean: bool) -> Vec<Complex64> {
    let b = pair_sign_slice(grid, line);
    let mean = if keep_mean {
        line.iter().sum::<Complex64>() / line.len() as f64
    } else {
        ZERO
    };
    (0..grid.m())
        .map(|j| if grid.sign_at(1, j) > 0.0 { mean + b } else { mean - b })
        .collect()
}

/// Conditional expectation onto the signs σ_k = sign(cos θ_k).
///
/// Prefix coordinates use f ↦ ∫f + σ∫fσ. In the last coordinate only the
/// σ-component is kept, since a difference has zero conditional mean.
pub fn dyadic_project(f: &Martingale) -> Martingale {
    let grid = f.grid();
    f.map_diffs(f.start(), |k, d| {
        let mut out = d.map_axis(k - 1, |line| sign_projection(grid, line, false));
        for axis in (0..k - 1).rev() {
            out = out.map_axis(axis, |line| sign_projection(grid, line, true));
        }
        out
    })
}

/// Fixed by the dyadic projection within tol.
pub fn is_dyadic(f: &Martingale, tol: f64) -> bool {
    first_non_dyadic_step(f, tol).is_none()
}

pub(crate) fn first_non_dyadic_step(f: &Martingale, tol: f64) -> Option<usize> {
    let t = tol_scale(f, tol);
    let p = dyadic_project(f);
    f.diffs()
        .iter()
        .zip(p.diffs())
        .position(|(a, b)| a.max_abs_diff(b) > t)
        .map(|i| i + 1)
}

/// ΔU_k(x, y) = ½(ΔG_k(x, y) + ΔG_k(x, ȳ)).
pub fn cosine_part(g: &Martingale) -> Martingale {
    g.map_diffs(g.start(), |k, d| {
        d.zip_with(&d.reflect_axis(k - 1), |a, b| (a + b) * 0.5).expect("same shape")
    })
}

/// G − cosine_part(G).
pub fn sine_part(g: &Martingale) -> Martingale {
    let u = cosine_part(g);
    g.try_sub(&u).expect("same shape")
}

/// ε ∈ {−1, +1}^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(LabError::RangeError("sign pattern entries must be ±1".into()));
        }
        Ok(Self { signs })
    }

    /// The pattern whose bit i (least significant first) set means ε_{i+1} = −1.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        Self {
            signs: (0..len).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect(),
        }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn all_patterns(len: usize) -> impl Iterator<Item = SignPattern> {
        (0..1u64 << len).map(move |b| Self::from_bits(b, len))
    }
}

/// v_k(x₁^{ε₁}, …, x_k^{ε_k}) with x^{−1} the conjugate point.
pub fn randomize(v: &Martingale, eps: &SignPattern) -> Result<Martingale> {
    if eps.signs.len() < v.depth() {
        return Err(LabError::DepthMismatch(v.depth(), eps.signs.len()));
    }
    Ok(v.map_diffs(v.start(), |k, d| {
        let mut out = d.clone();
        for axis in 0..k {
            if eps.signs[axis] == -1 {
                out = out.reflect_axis(axis);
            }
        }
        out
    }))
}

/// P(v_k)(x) = 2^{−(k−1)} Σ_ε v_k(x₁^{ε₁}, …, x_{k−1}^{ε_{k−1}}, x_k).
pub fn projection_p(v: &Martingale) -> Martingale {
    v.map_diffs(v.start(), |k, d| {
        let mut out = d.clone();
        for axis in 0..k - 1 {
            out = out.zip_with(&out.reflect_axis(axis), |a, b| (a + b) * 0.5).expect("same shape");
        }
        out
    })
}

/// Each ΔD_k factors as d_{k−1}(x)·φ(y) with ∫φ = 0, |φ| ≤ 1 and ∫|φ|² > α.
pub fn is_regular(d: &Martingale, alpha: f64, tol: f64) -> bool {
    let t = tol_scale(d, tol);
    d.diffs().iter().all(|diff| factor_last_coordinate(diff, t).is_some_and(|phi| {
        let m = phi.len() as f64;
        let mean = phi.iter().sum::<Complex64>() / m;
        let energy = phi.iter().map(|v| v.norm_sqr()).sum::<f64>() / m;
        mean.norm() <= tol && energy + tol > alpha
    }))
}

/// A last-coordinate factor φ with sup|φ| = 1 such that every fibre is a
/// multiple of φ; `Some(vec![])` for the zero tensor.
fn factor_last_coordinate(diff: &ProductFunction, tol: f64) -> Option<Vec<Complex64>> {
    let energy = |fib: &[Complex64]| fib.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let (best, best_energy) = diff
        .fibres()
        .enumerate()
        .map(|(i, f)| (i, energy(f)))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if best_energy == 0.0 {
        // the zero difference is 0·σ
        let m = diff.grid().m();
        return Some((0..m).map(|j| Complex64::new(diff.grid().sign_at(1, j), 0.0)).collect());
    }
    let row = diff.fibre(best);
    let sup = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let phi: Vec<Complex64> = row.iter().map(|v| v / sup).collect();
    let phi_energy = energy(&phi);
    for fib in diff.fibres() {
        let c = fib.iter().zip(&phi).map(|(a, b)| a * b.conj()).sum::<Complex64>() / phi_energy;
        if fib.iter().zip(&phi).any(|(a, b)| (a - c * b).norm() > tol) {
            return None;
        }
    }
    Some(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::sign_re;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid(m: usize) -> TorusGrid {
        TorusGrid::new(m).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_step(g: TorusGrid, f: impl Fn(f64) -> Complex64) -> Martingale {
        Martingale::new(g, ZERO, vec![ProductFunction::from_angles(g, 1, |t| f(t[0]))]).unwrap()
    }

    fn two_step(g: TorusGrid, f1: impl Fn(f64) -> Complex64, f2: impl Fn(f64, f64) -> Complex64) -> Martingale {
        Martingale::new(
            g,
            ZERO,
            vec![
                ProductFunction::from_angles(g, 1, |t| f1(t[0])),
                ProductFunction::from_angles(g, 2, |t| f2(t[0], t[1])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn hardy_examples() {
        let g = grid(16);
        let e = Martingale::new(
            g,
            ZERO,
            vec![
                ProductFunction::from_angles(g, 1, |t| Complex64::from_polar(1.0, t[0])),
                ProductFunction::from_angles(g, 2, |t| Complex64::from_polar(1.0, t[1])),
            ],
        )
        .unwrap();
        assert!(is_hardy(&e, 1e-9));
        assert!(!is_hardy(&one_step(g, |t| c(t.cos(), 0.0)), 1e-9));
        let mixed = two_step(g, |_| ZERO, |a, b| Complex64::from_polar(1.0, a + 2.0 * b));
        assert!(is_hardy(&mixed, 1e-9));
    }

    #[test]
    fn dyadic_projection_examples() {
        let g = grid(1024);
        let sigma = sign_re(g);
        let s = one_step(g, |t| c(t.cos().signum(), 0.0));
        assert!(dyadic_project(&s).max_abs_diff(&s) < 1e-15);
        assert!(dyadic_project(&one_step(g, |t| c(t.sin(), 0.0))).diff(1).sup_norm() < 1e-12);
        let p = dyadic_project(&one_step(g, |t| c(t.cos(), 0.0)));
        for (v, s) in p.diff(1).values().iter().zip(sigma.values()) {
            assert_abs_diff_eq!(v.re, 2.0 / PI * s.re, epsilon = 1e-5);
        }
    }

    #[test]
    fn even_harmonics_project_to_exact_zero() {
        let g = grid(16);
        let f = Martingale::new(
            g,
            ZERO,
            vec![
                ProductFunction::from_coordinate(g, 1, 0, &TorusFunction::monomial(g, 2)).unwrap(),
                ProductFunction::from_coordinate(g, 2, 1, &TorusFunction::monomial(g, 2)).unwrap(),
            ],
        )
        .unwrap();
        let p = dyadic_project(&f);
        assert!(p.diffs().iter().all(|d| d.values().iter().all(|v| *v == ZERO)));
    }

    #[test]
    fn dyadic_detection() {
        let g = grid(16);
        let d = two_step(g, |t| c(2.0 * t.cos().signum(), 0.0), |a, b| c(a.cos().signum() * b.cos().signum(), 1.0 * b.cos().signum()));
        assert!(is_dyadic(&d, 1e-12));
        assert!(!is_dyadic(&one_step(g, |t| c(t.cos(), 0.0)), 1e-9));
    }

    #[test]
    fn cosine_sine_examples() {
        let g = grid(32);
        let e = one_step(g, |t| Complex64::from_polar(1.0, t));
        let u = cosine_part(&e);
        let v = sine_part(&e);
        assert!(u.max_abs_diff(&one_step(g, |t| c(t.cos(), 0.0))) < 1e-14);
        assert!(v.max_abs_diff(&one_step(g, |t| c(0.0, t.sin()))) < 1e-14);
        let cosine = one_step(g, |t| c((3.0 * t).cos(), (2.0 * t).cos()));
        assert!(cosine_part(&cosine).max_abs_diff(&cosine) < 1e-14);
    }

    #[test]
    fn randomize_examples() {
        let g = grid(32);
        let v = one_step(g, |t| c(t.sin(), 0.0));
        let plus = SignPattern::new(vec![1]).unwrap();
        assert_eq!(randomize(&v, &plus).unwrap(), v);
        let minus = SignPattern::new(vec![-1]).unwrap();
        let r = randomize(&v, &minus).unwrap();
        assert!(r.max_abs_diff(&one_step(g, |t| c(-t.sin(), 0.0))) < 1e-14);
        assert!(SignPattern::new(vec![0]).is_err());
        assert_eq!(SignPattern::all_patterns(3).count(), 8);
    }

    #[test]
    fn projection_p_examples() {
        let g = grid(32);
        let v1 = one_step(g, |t| c(t.sin(), t.cos()));
        assert_eq!(projection_p(&v1), v1);
        let odd = two_step(g, |_| ZERO, |a, b| c(a.sin() * b.cos().signum(), 0.0));
        assert!(projection_p(&odd).diff(2).sup_norm() < 1e-15);
        let even = two_step(g, |_| ZERO, |a, b| c(a.cos() * b.cos().signum(), 0.0));
        assert!(projection_p(&even).max_abs_diff(&even) < 1e-15);
    }

    #[test]
    fn regular_examples() {
        let g = grid(16);
        let d = two_step(g, |t| c(t.cos().signum(), 0.0), |a, b| c((a.cos().signum() + 2.0) * b.cos().signum(), 0.0));
        assert!(is_regular(&d, 1.0, 1e-9));
        assert!(is_regular(&one_step(g, |t| Complex64::from_polar(1.0, t)), 1.0, 1e-9));
        let bad = two_step(g, |_| ZERO, |a, b| c(a.sin() * b.sin() + b.cos(), 0.0));
        assert!(!is_regular(&bad, 0.1, 1e-9));
        let weak = one_step(g, |t| c(0.5 * t.cos().signum(), 0.0));
        assert!(is_regular(&weak, 0.99, 1e-9));
        let cos = one_step(g, |t| c(t.cos(), 0.0));
        assert!(!is_regular(&cos, 0.9, 1e-9));
        assert!(is_regular(&cos, 0.4, 1e-9));
    }
}
