//! Exact one-variable inequalities behind the decomposition.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{LabError, Result};
use crate::torus::{sign_re, TorusFunction, CHECK_TOL};
use crate::truncation::SlackReport;

/// 1/(√3(3A+1)): the coefficient for mean-zero g with |g| ≤ A|z|.
pub fn alpha_for_bound(a: f64) -> f64 {
    1.0 / (3f64.sqrt() * (3.0 * a + 1.0))
}

/// Coefficient for the σ-perturbed inequality with ∫|σ|² > alpha and |g| ≤ C|z|.
///
/// Small |b| reduces to the bounded case with A = C + 4C/alpha; large |b| gives
/// 1/(A + C), which is never smaller.
pub fn delta_for_sigma(alpha: f64, c: f64) -> f64 {
    let a = 4.0 * c / alpha;
    alpha_for_bound(c + a).min(1.0 / (a + c))
}

pub enum ScalarVariant<'a> {
    /// (|z|² + α²∫y²)^{1/2} ≤ ∫|z + g| with y = Im(g·w).
    Plain,
    /// (|z|² + δ²∫y²)^{1/2} ≤ ∫|z + g − bσ| with y = Im((g − bσ)·w).
    Sigma { b: Complex64, sigma: &'a [Complex64], alpha: f64 },
}

fn mean<T: Copy + Into<f64>>(v: impl Iterator<Item = T>, n: usize) -> f64 {
    v.map(Into::into).sum::<f64>() / n as f64
}

/// Checks one instance on a probability space of equally weighted atoms.
pub fn prop_scalar_check(z: Complex64, a: f64, variant: &ScalarVariant<'_>, g: &[Complex64]) -> Result<SlackReport> {
    let n = g.len();
    if n == 0 {
        return Err(LabError::RangeError("empty sample".into()));
    }
    if !(a > 0.0) {
        return Err(LabError::RangeError(format!("bound A = {a} must be positive")));
    }
    let sup = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let gm = g.iter().sum::<Complex64>() / n as f64;
    if gm.norm() > 1e-12 * sup.max(1.0) {
        return Err(LabError::NonZeroMean(gm.norm()));
    }
    if sup > a * z.norm() * (1.0 + 1e-12) + 1e-15 {
        return Err(LabError::RangeError(format!("sup|g| = {sup} exceeds A|z| = {}", a * z.norm())));
    }
    let w = if z.norm() > 0.0 { z.conj() / z.norm() } else { Complex64::new(1.0, 0.0) };
    let (coef, shifted): (f64, Vec<Complex64>) = match variant {
        ScalarVariant::Plain => (alpha_for_bound(a), g.to_vec()),
        ScalarVariant::Sigma { b, sigma, alpha } => {
            if sigma.len() != n {
                return Err(LabError::GridMismatch(n, sigma.len()));
            }
            let sm = sigma.iter().sum::<Complex64>() / n as f64;
            if sm.norm() > 1e-12 {
                return Err(LabError::NonZeroMean(sm.norm()));
            }
            if sigma.iter().any(|s| s.norm() > 1.0 + 1e-12) {
                return Err(LabError::RangeError("|σ| must be at most 1".into()));
            }
            let energy = mean(sigma.iter().map(|s| s.norm_sqr()), n);
            if !(*alpha > 0.0 && *alpha <= 1.0 && energy > *alpha) {
                return Err(LabError::RangeError(format!("∫|σ|² = {energy} must exceed α = {alpha} ∈ (0, 1]")));
            }
            (delta_for_sigma(*alpha, a), g.iter().zip(sigma.iter()).map(|(g, s)| g - b * s).collect())
        }
    };
    let y2 = mean(shifted.iter().map(|v| (v * w).im.powi(2)), n);
    let lhs = (z.norm_sqr() + coef * coef * y2).sqrt();
    let rhs = mean(shifted.iter().map(|v| (z + v).norm()), n);
    Ok(SlackReport::new(lhs, rhs, 0.0))
}

/// n atoms of a random mean-zero variable with sup modulus at most `bound`.
pub fn sample_bounded_mean_zero(n: usize, bound: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = match rng.random_range(0..3) {
        0 => (0..n)
            .map(|_| Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU)))
            .collect(),
        1 => {
            let p: f64 = rng.random_range(0.02..0.98);
            let dir = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            (0..n).map(|i| if (i as f64) < p * n as f64 { dir } else { -dir * 0.5 }).collect()
        }
        _ => (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0) * Complex64::i()).collect(),
    };
    let m = v.iter().sum::<Complex64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= m);
    let sup = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if sup > 0.0 {
        let s = bound * rng.random_range(0.05..=1.0) / sup;
        v.iter_mut().for_each(|x| *x *= s);
    }
    v
}

fn lemma_a(mu: Complex64, b: Complex64) -> f64 {
    let den = mu.norm() + b.norm();
    if den == 0.0 {
        0.0
    } else {
        mu.norm() + (mu - b).norm_sqr() / den
    }
}

/// Slacks of 4(Im²(w(μ−b)) + Re²(wμ)) ≥ (a − |b|)² and 2(a² − |μ|²) ≥ |μ − b|²,
/// where a = |μ| + |μ−b|²/(|μ|+|b|).
pub fn scalar_lemma_check(mu: Complex64, b: Complex64, w: Complex64) -> Result<(f64, f64)> {
    if mu.norm() == 0.0 && b.norm() == 0.0 {
        return Err(LabError::RangeError("μ and b are both zero".into()));
    }
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(LabError::RangeError(format!("|w| = {} is not 1", w.norm())));
    }
    let a = lemma_a(mu, b);
    let slack_e = 4.0 * ((w * (mu - b)).im.powi(2) + (w * mu).re.powi(2)) - (a - b.norm()).powi(2);
    let slack_d = 2.0 * (a * a - mu.norm_sqr()) - (mu - b).norm_sqr();
    Ok((slack_e, slack_d))
}

fn check_h20(h: &TorusFunction) -> Result<()> {
    h.analytic_poly(CHECK_TOL)?;
    let mean = h.mean().norm();
    if mean > CHECK_TOL * h.sup_norm().max(1.0) {
        return Err(LabError::NonZeroMean(mean));
    }
    Ok(())
}

struct EvenPart {
    u: TorusFunction,
    mu: Complex64,
    /// ∫|u − μσ|².
    off_sigma: f64,
}

fn even_part(h: &TorusFunction) -> EvenPart {
    let u = (h + &h.reflect()).scale(Complex64::new(0.5, 0.0));
    let mu = u.pair_sign();
    let sigma = sign_re(h.grid());
    let off_sigma = u.values().iter().zip(sigma.values()).map(|(u, s)| (u - mu * s).norm_sqr()).sum::<f64>()
        / h.m() as f64;
    EvenPart { u, mu, off_sigma }
}

/// ∫Im²(w(h − bσ)).
fn im_energy(h: &TorusFunction, w: Complex64, b: Complex64) -> f64 {
    let sigma = sign_re(h.grid());
    h.values().iter().zip(sigma.values()).map(|(h, s)| (w * (h - b * s)).im.powi(2)).sum::<f64>() / h.m() as f64
}

/// Relative residual of
/// Im²(w(μ−b)) + Re²(wμ) + ∫|u − μσ|² = ∫Im²(w(h − bσ)),
/// where u is the even part of h and μ = ⟨u, σ⟩.
pub fn cosine_identity_check(h: &TorusFunction, w: Complex64, b: Complex64) -> Result<f64> {
    check_h20(h)?;
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(LabError::RangeError(format!("|w| = {} is not 1", w.norm())));
    }
    let e = even_part(h);
    let lhs = (w * (e.mu - b)).im.powi(2) + (w * e.mu).re.powi(2) + e.off_sigma;
    let rhs = im_energy(h, w, b);
    let scale = lhs.max(rhs);
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale })
}

/// Slacks of ∫|u − bσ|² ≤ 8(a² − |μ|²) + ∫|u − μσ|² and
/// (a − |b|)² + ∫|u − μσ|² ≤ 8∫Im²(w(h − bσ)), each as (rhs − lhs, scale).
pub(crate) fn cosine_slice_slacks(h: &TorusFunction, w: Complex64, b: Complex64) -> Result<[(f64, f64); 2]> {
    check_h20(h)?;
    let e = even_part(h);
    let sigma = sign_re(h.grid());
    let a = lemma_a(e.mu, b);
    let u_b = e.u.values().iter().zip(sigma.values()).map(|(u, s)| (u - b * s).norm_sqr()).sum::<f64>()
        / h.m() as f64;
    let r1 = 8.0 * (a * a - e.mu.norm_sqr()) + e.off_sigma;
    let l2 = (a - b.norm()).powi(2) + e.off_sigma;
    let r2 = 8.0 * im_energy(h, w, b);
    Ok([(r1 - u_b, r1.max(u_b)), (r2 - l2, r2.max(l2))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coefficients() {
        assert_abs_diff_eq!(alpha_for_bound(1.0), 1.0 / (4.0 * 3f64.sqrt()), epsilon = 1e-15);
        let d = delta_for_sigma(0.99, 34.0);
        assert_abs_diff_eq!(d, alpha_for_bound(34.0 + 4.0 * 34.0 / 0.99), epsilon = 1e-15);
        assert!(d < 1.0 / (34.0 + 4.0 * 34.0 / 0.99));
    }

    #[test]
    fn lemma_examples() {
        let (e, d) = scalar_lemma_check(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-15);
        let mu = c(0.3, -0.8);
        let (e, d) = scalar_lemma_check(mu, mu, Complex64::from_polar(1.0, 0.4)).unwrap();
        assert_abs_diff_eq!(e, 4.0 * (Complex64::from_polar(1.0, 0.4) * mu).re.powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-15);
        assert!(scalar_lemma_check(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(scalar_lemma_check(c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn lemma_holds(mr in -5.0..5.0f64, mi in -5.0..5.0f64, br in -5.0..5.0f64, bi in -5.0..5.0f64, t in 0.0..6.3f64) {
            prop_assume!(mr.abs() + mi.abs() + br.abs() + bi.abs() > 1e-9);
            let (e, d) = scalar_lemma_check(c(mr, mi), c(br, bi), Complex64::from_polar(1.0, t)).unwrap();
            prop_assert!(e >= -1e-12 && d >= -1e-12, "{e} {d}");
        }
    }

    #[test]
    fn plain_check_examples() {
        let zero = vec![c(0.0, 0.0); 64];
        let s = prop_scalar_check(c(1.0, 0.0), 2.0, &ScalarVariant::Plain, &zero).unwrap();
        assert_abs_diff_eq!(s.slack, 0.0, epsilon = 1e-15);
        // z = 1, g = (A/2)e^{iθ} on a fine grid
        let grid = TorusGrid::new(4096).unwrap();
        let a = 2.0;
        let g: Vec<Complex64> = grid.angles().iter().map(|&t| Complex64::from_polar(a / 2.0, t)).collect();
        let s = prop_scalar_check(c(1.0, 0.0), a, &ScalarVariant::Plain, &g).unwrap();
        assert!(s.slack >= 0.0);
        assert!(prop_scalar_check(c(1.0, 0.0), 0.5, &ScalarVariant::Plain, &g).is_err());
        let shifted: Vec<Complex64> = g.iter().map(|v| v + 0.1).collect();
        assert!(matches!(
            prop_scalar_check(c(1.0, 0.0), 4.0, &ScalarVariant::Plain, &shifted),
            Err(LabError::NonZeroMean(_))
        ));
    }

    #[test]
    fn sampled_plain_and_sigma_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = sign_re(TorusGrid::new(64).unwrap()).into_values();
        for a in [1.0, 2.0, 4.0] {
            for _ in 0..200 {
                let z = Complex64::from_polar(rng.random_range(0.1..2.0), rng.random_range(0.0..6.3));
                let g = sample_bounded_mean_zero(64, a * z.norm(), &mut rng);
                let s = prop_scalar_check(z, a, &ScalarVariant::Plain, &g).unwrap();
                assert!(s.slack >= -1e-9, "{s:?}");
                // large |b| against the sign function
                let big = 4.0 * a / 0.99 * z.norm() * rng.random_range(1.0..3.0);
                let b = Complex64::from_polar(big, rng.random_range(0.0..6.3));
                let v = ScalarVariant::Sigma { b, sigma: &sigma, alpha: 0.99 };
                assert!(prop_scalar_check(z, a, &v, &g).unwrap().slack >= -1e-9);
            }
        }
    }

    #[test]
    fn sampler_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = sample_bounded_mean_zero(33, 2.5, &mut rng);
            assert!(g.iter().all(|v| v.norm() <= 2.5 + 1e-12));
            assert!(g.iter().sum::<Complex64>().norm() < 1e-12);
        }
    }

    #[test]
    fn identity_examples() {
        let g = TorusGrid::new(256).unwrap();
        assert_eq!(cosine_identity_check(&TorusFunction::zeros(g), c(1.0, 0.0), c(0.0, 0.0)).unwrap(), 0.0);
        let e1 = TorusFunction::monomial(g, 1);
        // ⟨cos, σ⟩ = 2/π in the continuum
        assert!((even_part(&e1).mu.re - 2.0 / PI).abs() < 1e-4);
        assert!(cosine_identity_check(&e1, c(1.0, 0.0), c(0.0, 0.0)).unwrap() < 1e-10);
        let cos = TorusFunction::from_real_fn(g, f64::cos);
        assert!(cosine_identity_check(&cos, c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn identity_and_slice_bounds_hold(
            coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..12),
            t in 0.0..6.3f64, br in -2.0..2.0f64, bi in -2.0..2.0f64,
        ) {
            let g = TorusGrid::new(64).unwrap();
            let cs: Vec<(i64, Complex64)> = coeffs.iter().enumerate().map(|(k, &(r, i))| (k as i64 + 1, c(r, i))).collect();
            let h = TorusFunction::from_coeffs(g, &cs).unwrap();
            let w = Complex64::from_polar(1.0, t);
            prop_assert!(cosine_identity_check(&h, w, c(br, bi)).unwrap() <= 1e-9);
            for (slack, scale) in cosine_slice_slacks(&h, w, c(br, bi)).unwrap() {
                prop_assert!(slack >= -1e-9 * scale.max(1.0));
            }
        }
    }
}
