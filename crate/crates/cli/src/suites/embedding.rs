//! The lacunary ladder, the Riesz-product kernels and the embedding constants.

use hm_lab::embedding::{
    r_route_gap, random_sigma_measurable, verify_embedding, verify_small_with, EmbeddingConfig, FrequencyLadder,
};
use hm_lab::rng::stream_rng;
use hm_lab::TorusGrid;

use super::distance::sign_step_distance;
use super::identities::random_analytic;
use super::Ctx;
use crate::cache;
use crate::error::Result;

const SMALL_SAMPLES: usize = 8;
const ROUTE_TOL: f64 = 1e-8;
const ROUTE_SAMPLES: usize = 4;
const ROUTE_DEGREE: usize = 64;

pub(super) fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let grid = ctx.grid(4096, 1)?;
    let (levels, eps) = (ctx.cfg.levels, ctx.cfg.eps);
    let seed = ctx.seed(0, 0);
    let ladder = cache::ladder(ctx.cache, levels, eps, grid)?;
    for (k, (&n, &a)) in ladder.n().iter().zip(ladder.a()).enumerate() {
        ctx.report(&format!("ladder.n{}", k + 1), n as f64, seed);
        ctx.report(&format!("ladder.a{}", k + 1), a as f64, seed);
        ctx.report(&format!("ladder.error{}", k + 1), ladder.achieved_errors()[k], seed);
    }
    ctx.ge("ladder.lacunary", f64::from(u8::from(ladder.verify_lacunarity())), 1.0, seed);
    ctx.ge("ladder.injective", f64::from(u8::from(ladder.verify_injectivity())), 1.0, seed);

    ctx.constants("small", &verify_small_with(&ladder, SMALL_SAMPLES, seed)?, seed);

    // K * E_Σ g against the Riesz-product kernel applied to g.
    let mut gap = 0.0f64;
    for i in 0..ROUTE_SAMPLES {
        let mut rng = stream_rng(ctx.seed(1, i as u64), 0);
        let g = if i % 2 == 0 {
            random_sigma_measurable(&ladder, &mut rng)
        } else {
            random_analytic(grid, ROUTE_DEGREE.min(grid.m() / 4), &mut rng)?
        };
        gap = gap.max(r_route_gap(&g, &ladder)? / g.sup_norm().max(1.0));
    }
    ctx.le("r_route_gap", gap, ROUTE_TOL, ctx.seed(1, 0));

    // Orders of 1 smooth the signs far worse than eps; the bound must catch it.
    let weak = FrequencyLadder::with_orders(grid, vec![1; levels], eps)?;
    let control = verify_small_with(&weak, SMALL_SAMPLES, seed)?;
    let value = control.value("a_minus_b_l1").unwrap_or(f64::NAN);
    ctx.ge("negative_control_detected", value, eps, seed);

    let a0 = match ctx.cfg.a0 {
        Some(a0) => a0,
        None => {
            let d = sign_step_distance(TorusGrid::new(16)?, seed)?;
            ctx.report("a0_measured", 1.0 / d, seed);
            1.0 / d
        }
    };
    let trials = ctx.samples(EmbeddingConfig::default().trials);
    let cfg = EmbeddingConfig { trials, a0, seed: ctx.seed(2, 0), ..Default::default() };
    let report = verify_embedding(&ladder, &cfg)?;
    ctx.constants("embedding", &report.constants, cfg.seed);
    Ok(())
}
