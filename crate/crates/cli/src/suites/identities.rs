//! Exact identities on the grid, and the scalar inequalities.

use hm_lab::dgi::{cosine_identity_check, prop_scalar_check, sample_bounded_mean_zero, scalar_lemma_check, ScalarVariant};
use hm_lab::martingale::{norm_l1, random_hardy, AmplitudeLaw, HardyConfig};
use hm_lab::rng::stream_rng;
use hm_lab::torus::{even_odd_split, integrate, sign_re};
use hm_lab::{Complex64, TorusFunction, TorusGrid};
use rand::Rng;
use rand_distr::StandardNormal;

use super::Ctx;
use crate::error::Result;

const IDENTITY_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-10;
const LEMMA_TOL: f64 = -1e-12;
const SCALAR_TOL: f64 = -1e-9;
const LEMMA_SAMPLES: usize = 100_000;
const SCALAR_SAMPLES: usize = 1_000;
const SIGMA_ALPHA: f64 = 0.99;

pub(crate) fn normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub(crate) fn unimodular(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Σ_{k=1}^{degree} c_k z^k with Gaussian c_k.
pub(crate) fn random_analytic(grid: TorusGrid, degree: usize, rng: &mut impl Rng) -> Result<TorusFunction> {
    let pairs: Vec<(i64, Complex64)> = (1..=degree as i64).map(|k| (k, normal(rng))).collect();
    Ok(TorusFunction::from_coeffs(grid, &pairs)?)
}

pub(crate) const LAWS: [AmplitudeLaw; 3] = [AmplitudeLaw::Gaussian, AmplitudeLaw::Uniform, AmplitudeLaw::HeavyTailed];

pub(super) fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    ctx.timed("exact", identities)?;
    ctx.timed("scalar", scalar)
}

fn identities(ctx: &mut Ctx<'_>) -> Result<()> {
    let grid = ctx.grid(256, 2)?;
    let n = ctx.samples(100);
    let max_degree = (grid.m() / 4 - 1).clamp(1, 32);

    let (mut cosine, mut duality) = (0.0f64, 0.0f64);
    for i in 0..n {
        let mut rng = stream_rng(ctx.seed(0, i as u64), 0);
        let h = random_analytic(grid, rng.random_range(1..=max_degree), &mut rng)?;
        cosine = cosine.max(cosine_identity_check(&h, unimodular(&mut rng), normal(&mut rng))?);
        // ∫u·cos kθ = −i∫v·sin kθ for the even and odd parts of h.
        let (u, v) = even_odd_split(&h);
        let scale = h.sup_norm().max(1.0);
        for k in 1..=max_degree as i64 {
            let cos = TorusFunction::from_real_fn(grid, |t| (k as f64 * t).cos());
            let sin = TorusFunction::from_real_fn(grid, |t| (k as f64 * t).sin());
            let gap = integrate(&(&u * &cos)) + Complex64::i() * integrate(&(&v * &sin));
            duality = duality.max(gap.norm() / scale);
        }
    }
    let seed = ctx.seed(0, 0);
    ctx.le("cosine_identity_residual", cosine, IDENTITY_TOL, seed);
    ctx.le("hilbert_duality_residual", duality, DUALITY_TOL, seed);

    // ∥F∥²_L2 = |F_0|² + Σ∥ΔF_k∥²_L2 for Hardy martingales.
    let mut variance = 0.0f64;
    let depth = ctx.depth(2);
    let hardy_grid = ctx.grid(32, depth)?;
    for i in 0..n {
        let seed = ctx.seed(1, i as u64);
        let degree = 1 + (i % 4);
        let f = random_hardy(hardy_grid, &HardyConfig::new(depth, degree, LAWS[i % 3], seed))?;
        let total = mean_sq(f.terminal().values()) - f.start().norm_sqr();
        let parts: f64 = f.diffs().iter().map(|d| mean_sq(d.values())).sum();
        let scale = parts.max(norm_l1(&f).powi(2)).max(1e-300);
        variance = variance.max((total - parts).abs() / scale);
    }
    ctx.le("hardy_variance_identity", variance, IDENTITY_TOL, ctx.seed(1, 0));
    Ok(())
}

fn mean_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// The scalar lemma on random (μ, b, w) and the scalar propositions on bounded
/// mean-zero samples, with and without the σ-perturbation.
fn scalar(ctx: &mut Ctx<'_>) -> Result<()> {
    let seed = ctx.seed(2, 0);
    let mut rng = stream_rng(seed, 0);
    let mut worst = f64::INFINITY;
    for _ in 0..LEMMA_SAMPLES {
        let (mu, b, w) = (normal(&mut rng), normal(&mut rng), unimodular(&mut rng));
        let (e, d) = scalar_lemma_check(mu, b, w)?;
        let scale = (mu.norm() + b.norm()).powi(2).max(1.0);
        worst = worst.min(e.min(d) / scale);
    }
    ctx.ge("scalar_lemma_min_slack", worst, LEMMA_TOL, seed);

    let atoms = 64;
    let sigma = sign_re(TorusGrid::new(atoms)?);
    for (j, a) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let seed = ctx.seed(3, j as u64);
        let mut rng = stream_rng(seed, 0);
        let (mut plain, mut perturbed) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..SCALAR_SAMPLES {
            let z = normal(&mut rng);
            let g = sample_bounded_mean_zero(atoms, a * z.norm(), &mut rng);
            plain = plain.min(prop_scalar_check(z, a, &ScalarVariant::Plain, &g)?.slack / z.norm());
            let b = normal(&mut rng) * z.norm();
            let variant = ScalarVariant::Sigma { b, sigma: sigma.values(), alpha: SIGMA_ALPHA };
            perturbed = perturbed.min(prop_scalar_check(z, a, &variant, &g)?.slack / z.norm());
        }
        ctx.ge(&format!("scalar_plain_min_slack_a{a}"), plain, SCALAR_TOL, seed);
        ctx.ge(&format!("scalar_sigma_min_slack_a{a}"), perturbed, SCALAR_TOL, seed);
    }
    Ok(())
}
