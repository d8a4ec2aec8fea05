//! Norm inequalities, transform contractivity, the dyadic projection and the square-function gate.

use hm_lab::martingale::{
    dyadic_project, garnett_jones_ratio, DyadicFamily, lepingle_ratio, norm_h1, norm_l1, norm_p, random_hardy, random_martingale, transform, HardyConfig,
    Martingale, ProductFunction, SteeringWeights,
};
use hm_lab::rng::stream_rng;
use hm_lab::TorusGrid;
use rayon::prelude::*;

use super::identities::{unimodular, LAWS};
use super::Ctx;
use crate::error::Result;

const NORM_TOL: f64 = 1e-9;
const PROJECTION_TOL: f64 = 1e-10;
const SQUARE_FUNCTION_GATE: f64 = 10.0;

#[derive(Default, Clone, Copy)]
struct Worst {
    bg: f64,
    transform_p: f64,
    transform_h1: f64,
    idempotent: f64,
    contraction: f64,
    square_function: f64,
    lepingle: f64,
}

impl Worst {
    fn merge(self, o: Self) -> Self {
        Self {
            bg: self.bg.max(o.bg),
            transform_p: self.transform_p.max(o.transform_p),
            transform_h1: self.transform_h1.max(o.transform_h1),
            idempotent: self.idempotent.max(o.idempotent),
            contraction: self.contraction.max(o.contraction),
            square_function: self.square_function.max(o.square_function),
            lepingle: self.lepingle.max(o.lepingle),
        }
    }
}

fn random_weights(grid: TorusGrid, depth: usize, seed: u64) -> Result<SteeringWeights> {
    let mut rng = stream_rng(seed, 7);
    let weights = (0..depth)
        .map(|k| {
            let values = (0..grid.m().pow(k as u32)).map(|_| unimodular(&mut rng)).collect();
            ProductFunction::new(grid, k, values)
        })
        .collect::<hm_lab::Result<Vec<_>>>()?;
    Ok(SteeringWeights::new(weights)?)
}

fn one(grid: TorusGrid, depth: usize, i: usize, seed: u64) -> Result<Worst> {
    let cfg = HardyConfig::new(depth, 1 + i % 4, LAWS[i % 3], seed);
    let g = random_martingale(grid, &cfg)?;
    let f = random_hardy(grid, &cfg)?;
    let scale = |x: &Martingale| x.scale_hint().max(1.0);

    let tw = transform(&g, &random_weights(grid, depth, seed)?)?;
    let (g_p, g_h1) = (norm_p(&g), norm_h1(&g));
    let d = dyadic_project(&f);
    Ok(Worst {
        bg: g_h1 - 2.0 * g_p,
        transform_p: (norm_p(&tw) - g_p) / scale(&g),
        transform_h1: (norm_h1(&tw) - g_h1) / scale(&g),
        idempotent: dyadic_project(&d).max_abs_diff(&d) / scale(&f),
        contraction: (norm_l1(&d) - norm_l1(&f)) / scale(&f),
        square_function: norm_h1(&f) / norm_l1(&f),
        lepingle: lepingle_ratio(&g),
    })
}

pub(super) fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let grid = ctx.grid(32, ctx.cfg.depth.unwrap_or(3))?;
    let n = ctx.samples(200);
    let seeds: Vec<u64> = (0..n).map(|i| ctx.seed(0, i as u64)).collect();
    let fixed = ctx.cfg.depth;
    let each = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| one(grid, fixed.unwrap_or(1 + i % 3), i, seed))
        .collect::<Result<Vec<_>>>()?;
    let w = each.into_iter().fold(
        Worst { bg: f64::NEG_INFINITY, transform_p: f64::NEG_INFINITY, transform_h1: f64::NEG_INFINITY, contraction: f64::NEG_INFINITY, ..Worst::default() },
        Worst::merge,
    );
    let seed = seeds[0];
    ctx.le("burkholder_gundy_excess", w.bg, NORM_TOL, seed);
    ctx.le("transform_p_excess", w.transform_p, NORM_TOL, seed);
    ctx.le("transform_h1_excess", w.transform_h1, NORM_TOL, seed);
    ctx.le("dyadic_projection_idempotence", w.idempotent, PROJECTION_TOL, seed);
    ctx.le("dyadic_projection_l1_excess", w.contraction, PROJECTION_TOL, seed);
    ctx.le("square_function_ratio_max", w.square_function, SQUARE_FUNCTION_GATE, seed);
    ctx.report("lepingle_ratio_max", w.lepingle, seed);

    let gj = (0..n)
        .map(|i| garnett_jones_ratio(&DyadicFamily::random(1 + i % 4, LAWS[i % 3], ctx.seed(1, i as u64))).ratio)
        .fold(0.0, f64::max);
    ctx.report("garnett_jones_ratio_max", gj, ctx.seed(1, 0));
    Ok(())
}
