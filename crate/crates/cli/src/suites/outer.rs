//! Outer functions q with |q| = 1 − p for band-limited even p.

use hm_lab::rng::stream_rng;
use hm_lab::torus::{integrate, outer_function, CHECK_TOL};
use hm_lab::{Complex64, TorusFunction, TorusGrid};
use rand::Rng;

use super::Ctx;
use crate::error::Result;

const OUTER_TOL: f64 = 1e-7;
const RATIO_GATE: f64 = 3.0;
const MAX_BAND: usize = 16;

/// An even trigonometric polynomial rescaled into [0, top].
fn band_limited_even(grid: TorusGrid, rng: &mut impl Rng) -> TorusFunction {
    let band = rng.random_range(1..=MAX_BAND.min(grid.m() / 4));
    let a: Vec<f64> = (0..=band).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = grid
        .angles()
        .iter()
        .map(|t| a.iter().enumerate().map(|(k, c)| c * (k as f64 * t).cos()).sum())
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = 0.5 * rng.random_range(0.05..=1.0);
    let values = raw.iter().map(|x| Complex64::new(top * (x - lo) / (hi - lo).max(1e-300), 0.0)).collect();
    TorusFunction::new(grid, values).expect("grid-sized")
}

fn l1_gap(q: &TorusFunction) -> f64 {
    q.values().iter().map(|v| (1.0 - v).norm()).sum::<f64>() / q.m() as f64
}

pub(super) fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let grid = ctx.grid(1024, 1)?;
    let n = ctx.samples(50);
    let (mut modulus, mut mean_im, mut odd, mut worst_ratio) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        let mut rng = stream_rng(ctx.seed(0, i as u64), 0);
        let p = band_limited_even(grid, &mut rng);
        let q = outer_function(&p, CHECK_TOL)?;
        for (j, (pv, qv)) in p.values().iter().zip(q.values()).enumerate() {
            modulus = modulus.max((pv.re + qv.norm() - 1.0).abs());
            odd = odd.max((qv.im + q.values()[grid.reflect(j)].im).abs());
        }
        mean_im = mean_im.max(integrate(&q).im.abs());
        worst_ratio = worst_ratio.max(l1_gap(&q) / p.l1_norm());
    }
    let seed = ctx.seed(0, 0);
    ctx.le("modulus_residual", modulus, OUTER_TOL, seed);
    ctx.le("mean_imaginary_part", mean_im, OUTER_TOL, seed);
    ctx.le("imaginary_part_oddness", odd, OUTER_TOL, seed);
    ctx.le("l1_ratio_max", worst_ratio, RATIO_GATE, seed);

    // For constant p = 1/4 the outer function is 3/4 and the ratio is exactly 1.
    let p = TorusFunction::constant(grid, Complex64::new(0.25, 0.0));
    let q = outer_function(&p, CHECK_TOL)?;
    ctx.le("constant_ratio_deviation", (l1_gap(&q) / p.l1_norm() - 1.0).abs(), 0.0, seed);
    Ok(())
}
