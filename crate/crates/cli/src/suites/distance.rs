//! Distance from dyadic martingales to Hardy martingales.

use hm_lab::dgi::{distance_experiment, DistanceConfig};
use hm_lab::martingale::{random_dyadic, DyadicConfig, Martingale, ProductFunction};
use hm_lab::{Complex64, TorusGrid};

use super::identities::LAWS;
use super::Ctx;
use crate::error::Result;

/// D = σ(x₁): one dyadic step.
pub(crate) fn sign_step(grid: TorusGrid) -> Result<Martingale> {
    let d1 = ProductFunction::from_indices(grid, 1, |i| Complex64::new(grid.sign_at(1, i[0]), 0.0));
    Ok(Martingale::new(grid, Complex64::new(0.0, 0.0), vec![d1])?)
}

/// Upper estimate of dist(D, H¹)/∥D∥ for the single sign step.
pub(crate) fn sign_step_distance(grid: TorusGrid, seed: u64) -> Result<f64> {
    Ok(distance_experiment(&sign_step(grid)?, &DistanceConfig { seed, ..Default::default() })?.ratio)
}

pub(super) fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let depth = ctx.depth(2);
    let grid = ctx.grid(16, depth)?;
    let seed = ctx.seed(0, 0);
    let sign = sign_step_distance(grid, seed)?;
    ctx.report("sign_step_distance", sign, seed);
    let mut min = sign;
    for i in 0..ctx.samples(8) {
        let seed = ctx.seed(1, i as u64);
        let d = random_dyadic(grid, &DyadicConfig { depth, law: LAWS[i % 3], seed, start: Complex64::new(0.0, 0.0) })?;
        let r = distance_experiment(&d, &DistanceConfig { seed, ..Default::default() })?;
        ctx.report(&format!("run{i:02}.distance_ratio"), r.ratio, seed);
        min = min.min(r.ratio);
    }
    ctx.report("distance_ratio_min", min, seed);
    ctx.report("a0_estimate", 1.0 / min, seed);
    Ok(())
}
