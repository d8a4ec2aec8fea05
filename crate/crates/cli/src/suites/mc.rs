//! Monte-Carlo suites: truncation, the decomposition and the interpolatory chain.

use hm_lab::dgi::{
    cosine_estimate_check, decompose, fit_alpha, instance_from_decomposition, interpolatory_pipeline, iteration_check,
    random_instance, verify_dgi,
};
use hm_lab::martingale::{
    dyadic_project, random_dyadic, random_hardy, steering_weights, DyadicConfig, HardyConfig, Martingale,
    ProductFunction,
};
use hm_lab::rng::stream_rng;
use hm_lab::truncation::{truncate, verify_truncation, TruncationConfig};
use hm_lab::{Complex64, TorusFunction, TorusGrid};
use rand::Rng;

use super::identities::{random_analytic, LAWS};
use super::Ctx;
use crate::error::Result;

const UNIFORMITY_SD: f64 = 4.0;
const FAST_PATH_SE: f64 = 3.0;
const SWEEP_PAIRS: usize = 10;
const SWEEP_SIDE: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const SWEEP_C0: f64 = 4.0;
/// Level for every other pair of runs: low enough that the stopping region is non-empty.
const CUTTING_C0: f64 = 4.0;
const ITERATION_TOL: f64 = -1e-9;
const ITERATION_ATOMS: usize = 64;
const ITERATION_INSTANCES: usize = 100;

pub(super) fn truncation(ctx: &mut Ctx<'_>) -> Result<()> {
    let grid = ctx.grid(64, 1)?;
    let base = ctx.cfg.truncation_or(TruncationConfig::default().n_paths);
    ctx.check_power(base.n_paths);
    let one = Complex64::new(1.0, 0.0);

    // h = 0 never stops, so the exit angle is uniform.
    let seed = ctx.seed(0, 0);
    let cfg = TruncationConfig { seed, force_mc: true, ..base.clone() };
    let res = truncate(&TorusFunction::zeros(grid), one, &cfg)?;
    let counts = res.counts();
    let total: u64 = counts.iter().sum();
    let p = 1.0 / counts.len() as f64;
    let sd = (total as f64 * p * (1.0 - p)).sqrt();
    let worst = counts.iter().map(|&c| (c as f64 - total as f64 * p).abs() / sd).fold(0.0, f64::max);
    ctx.mc_le("exit_uniformity_max_sd", worst, UNIFORMITY_SD, seed);

    // A small h never reaches C0|z|: the exact answer is h itself.
    let seed = ctx.seed(1, 0);
    let mut rng = stream_rng(seed, 0);
    let h = random_analytic(grid, 3, &mut rng)?;
    let h = h.scale(Complex64::new(0.5 / h.sup_norm(), 0.0));
    let fast = truncate(&h, one, &TruncationConfig { seed, ..base.clone() })?;
    let sim = truncate(&h, one, &TruncationConfig { seed, force_mc: true, ..base.clone() })?;
    let gap = fast.g_hat.values().iter().zip(sim.g_hat.values()).map(|(a, b)| (a - b).norm()).sum::<f64>()
        / grid.m() as f64;
    ctx.report("fast_path_taken", f64::from(u8::from(fast.fast_path)), seed);
    ctx.mc_le("fast_path_gap", gap, FAST_PATH_SE * sim.mean_se(), seed);

    // The truncation inequality over a b-sweep, for a cutting and a loose level.
    let levels = if base.c0 == SWEEP_C0 { vec![SWEEP_C0] } else { vec![SWEEP_C0, base.c0] };
    for c0 in levels {
        let (mut violations, mut worst) = (0usize, f64::INFINITY);
        for i in 0..SWEEP_PAIRS {
            let seed = ctx.seed(2, i as u64);
            let mut rng = stream_rng(seed, 0);
            let h = random_analytic(grid, rng.random_range(1..=4), &mut rng)?;
            let z = Complex64::from_polar(rng.random_range(0.02..0.2), rng.random_range(0.0..std::f64::consts::TAU));
            let res = truncate(&h, z, &TruncationConfig { seed, c0, ..base.clone() })?;
            let scale = z.norm() + h.sup_norm();
            for x in SWEEP_SIDE {
                for y in SWEEP_SIDE {
                    let s = verify_truncation(&h, z, Complex64::new(x, y) * scale, &res)?;
                    violations += usize::from(s.violated);
                    worst = worst.min(s.slack / s.se.max(1e-300));
                }
            }
        }
        let seed = ctx.seed(2, 0);
        ctx.mc_le(&format!("inequality_violations_c0_{c0}"), violations as f64, 0.0, seed);
        ctx.report(&format!("inequality_min_slack_over_se_c0_{c0}"), worst, seed);
    }
    Ok(())
}

/// Runs 0, 1 use the configured C0, runs 2, 3 the cutting level, and so on.
fn run_config(base: &TruncationConfig, i: usize, seed: u64) -> TruncationConfig {
    let c0 = if (i / 2).is_multiple_of(2) { base.c0 } else { CUTTING_C0 };
    TruncationConfig { seed, c0, ..base.clone() }
}

fn hardy(grid: TorusGrid, depth: usize, i: usize, seed: u64) -> Result<Martingale> {
    Ok(random_hardy(grid, &HardyConfig::new(depth, 2, LAWS[i % 3], seed))?)
}

pub(super) fn dgi(ctx: &mut Ctx<'_>) -> Result<()> {
    ctx.timed("decomposition", decompositions)?;
    ctx.timed("iteration", iteration)
}

fn decompositions(ctx: &mut Ctx<'_>) -> Result<()> {
    let depth = ctx.depth(2);
    let grid = ctx.grid(16, depth)?;
    let base = ctx.cfg.truncation_or(5000);
    ctx.check_power(base.n_paths);
    for i in 0..ctx.samples(20) {
        let seed = ctx.seed(0, i as u64);
        let f = hardy(grid, depth, i, seed)?;
        // Alternate between the dyadic projection of F and an independent dyadic martingale.
        let d = if i % 2 == 0 {
            dyadic_project(&f)
        } else {
            random_dyadic(grid, &DyadicConfig { depth, law: LAWS[i % 3], seed, start: Complex64::new(0.0, 0.0) })?
        };
        let tc = run_config(&base, i, seed);
        let report = decompose(&f, &d, &tc)?;
        let prefix = format!("run{i:02}");
        ctx.mc_constants(&prefix, &verify_dgi(&report), seed);
        ctx.report(&format!("{prefix}.c0"), tc.c0, seed);
        ctx.report(&format!("{prefix}.simulated_slices"), report.simulated_slices() as f64, seed);
        let it = iteration_check(&instance_from_decomposition(&report, tc.c0)?);
        match it.conclusion_slack {
            Some(s) => ctx.report(&format!("{prefix}.iteration_conclusion_slack"), s, seed),
            None => ctx.report(&format!("{prefix}.iteration_hypothesis_holds"), 0.0, seed),
        }
    }
    Ok(())
}

/// Random instances of the iteration theorem; those breaking the hypothesis are only counted.
fn iteration(ctx: &mut Ctx<'_>) -> Result<()> {
    let (mut worst, mut rejected) = (f64::INFINITY, 0usize);
    for i in 0..ITERATION_INSTANCES {
        let inst = random_instance(1 + i % 4, ITERATION_ATOMS, ctx.seed(1, i as u64))?;
        let it = iteration_check(&inst);
        // Present only when every hypothesis slack clears −HYPOTHESIS_TOL.
        match it.conclusion_slack {
            Some(s) => {
                let scale = it.lhs.abs().max(it.rhs.abs()).max(1.0);
                worst = worst.min(s / scale);
            }
            _ => rejected += 1,
        }
    }
    let seed = ctx.seed(1, 0);
    ctx.ge("iteration_min_conclusion_slack", worst, ITERATION_TOL, seed);
    ctx.report("iteration_rejected_instances", rejected as f64, seed);
    Ok(())
}

/// ΔF_1 = z₁², ΔF_2 = ½z₂²: even harmonics carry no σ-component, so E_D F = 0.
fn even_harmonic(grid: TorusGrid) -> Result<Martingale> {
    let d1 = ProductFunction::from_indices(grid, 1, |i| grid.monomial_at(2, i[0]));
    let d2 = ProductFunction::from_indices(grid, 2, |i| grid.monomial_at(2, i[1]) * 0.5);
    Ok(Martingale::new(grid, Complex64::new(0.0, 0.0), vec![d1, d2])?)
}

pub(super) fn interpolatory(ctx: &mut Ctx<'_>) -> Result<()> {
    let depth = ctx.depth(2);
    let grid = ctx.grid(16, depth)?;
    let base = ctx.cfg.truncation_or(5000);
    ctx.check_power(base.n_paths);
    let one = Complex64::new(1.0, 0.0);
    let mut points = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..ctx.samples(10) {
        let seed = ctx.seed(0, i as u64);
        let f = hardy(grid, depth, i, seed)?;
        let tc = run_config(&base, i, seed);
        let rep = interpolatory_pipeline(&f, &tc)?;
        let prefix = format!("run{i:02}");
        ctx.mc_constants(&prefix, &rep.constants, seed);
        ctx.report(&format!("{prefix}.c0"), tc.c0, seed);
        ctx.report(&format!("{prefix}.simulated_slices"), rep.decomposition.simulated_slices() as f64, seed);
        let w = steering_weights(&f, &rep.decomposition.d, one)?;
        ctx.constants(&prefix, &cosine_estimate_check(&rep.decomposition.g, &w)?, seed);
        points.push((rep.f_l1, rep.eps, rep.ed_f_l1));
        worst = worst.max(rep.constants.value("c_interpolatory").unwrap_or(0.0));
    }
    let seed = ctx.seed(0, 0);
    ctx.report("c_interpolatory_max", worst, seed);
    if let Some(fit) = fit_alpha(&points) {
        ctx.report("fitted_alpha", fit.alpha, seed);
        ctx.report("fitted_log_c", fit.log_c, seed);
    } else {
        ctx.warn("too few non-degenerate runs to fit α".into());
    }

    let seed = ctx.seed(1, 0);
    let rep = interpolatory_pipeline(&even_harmonic(grid)?, &TruncationConfig { seed, ..base })?;
    let value = rep.constants.value("c_interpolatory").unwrap_or(f64::NAN);
    ctx.le("degenerate_even_harmonic_ratio", value, 0.0, seed);
    Ok(())
}
