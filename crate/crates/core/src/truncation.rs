//! Stopping-time truncation of an analytic function by planar Brownian motion.
//!
//! Brownian paths start at 0 and run until they leave the unit disk. A path is
//! stopped the first time |h(B)| exceeds C0·|z|; the recorded value is h at the
//! stopping point, or h at the exit point for paths that never stop. Averaging
//! the recorded values by exit angle estimates g = E(h(B_ρ) | B_τ).

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::stream_rng;
use crate::torus::{sign_re, AnalyticPoly, TorusFunction, TorusGrid, CHECK_TOL};

/// Below this many paths the standard errors are too wide to be informative.
pub const MIN_PATHS: usize = 100;
const CHUNK: u64 = 256;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationConfig {
    /// Variance per coordinate of one Euler step.
    pub dt: f64,
    pub n_paths: usize,
    /// Defaults to 10·⌈1/dt⌉.
    pub max_steps: Option<usize>,
    pub c0: f64,
    pub seed: u64,
    /// Boundary angle bins; defaults to the grid size.
    pub bins: Option<usize>,
    /// Highest frequency kept by the final projection; defaults to bins/4.
    pub projection_degree: Option<usize>,
    /// Simulate even when the stopping region is empty.
    pub force_mc: bool,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            n_paths: 20_000,
            max_steps: None,
            c0: 34.0,
            seed: 0,
            bins: None,
            projection_degree: None,
            force_mc: false,
        }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt < 1.0) {
            return Err(LabError::Config(format!("dt = {} must lie in (0, 1)", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(LabError::Config("n_paths must be positive".into()));
        }
        if !(self.c0 >= 1.0) {
            return Err(LabError::Config(format!("C0 = {} must be at least 1", self.c0)));
        }
        if let Some(b) = self.bins {
            TorusGrid::new(b).map_err(|_| LabError::Config(format!("bins = {b} must be a power of two ≥ 4")))?;
        }
        if self.max_steps == Some(0) {
            return Err(LabError::Config("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn is_underpowered(&self) -> bool {
        self.n_paths < MIN_PATHS
    }

    pub fn steps_cap(&self) -> usize {
        self.max_steps.unwrap_or(10 * (1.0 / self.dt).ceil() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub count: u64,
    pub mean: Complex64,
    /// Standard error of `mean`.
    pub se: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationResult {
    /// Analytic mean-zero projection of the binned estimate, on the grid of h.
    pub g_hat: TorusFunction,
    /// Per-bin averages before projection.
    pub g_binned: TorusFunction,
    pub bins: Vec<BinStat>,
    /// Estimate of P(ρ < τ).
    pub hit_fraction: f64,
    pub hit_se: f64,
    pub paths_truncated_at_max: u64,
    /// Paths actually simulated (0 on the exact paths).
    pub n_paths: usize,
    /// C0·|z|.
    pub level: f64,
    pub fast_path: bool,
    pub degenerate: bool,
    pub config: TruncationConfig,
    pub wall_clock_s: f64,
}

impl TruncationResult {
    fn exact(h: &TorusFunction, g: TorusFunction, hit: f64, level: f64, degenerate: bool, cfg: &TruncationConfig) -> Self {
        let nb = cfg.bins.unwrap_or(h.m());
        let g_binned = if nb == g.m() {
            g.clone()
        } else {
            TorusFunction::zeros(TorusGrid::new(nb).expect("validated"))
        };
        Self {
            bins: g_binned.values().iter().map(|&mean| BinStat { count: 0, mean, se: 0.0 }).collect(),
            g_hat: g,
            g_binned,
            hit_fraction: hit,
            hit_se: 0.0,
            paths_truncated_at_max: 0,
            n_paths: 0,
            level,
            fast_path: !degenerate,
            degenerate,
            config: cfg.clone(),
            wall_clock_s: 0.0,
        }
    }

    /// Largest per-bin standard error; a pointwise error scale for g_hat.
    pub fn max_se(&self) -> f64 {
        self.bins.iter().map(|b| b.se).fold(0.0, f64::max)
    }

    /// Mean per-bin standard error; bounds the error of ∫|h − g_hat| to first order.
    pub fn mean_se(&self) -> f64 {
        if self.bins.is_empty() {
            0.0
        } else {
            self.bins.iter().map(|b| b.se).sum::<f64>() / self.bins.len() as f64
        }
    }

    /// Exit counts per bin.
    pub fn counts(&self) -> Vec<u64> {
        self.bins.iter().map(|b| b.count).collect()
    }
}

/// Max of |h| over circles of the given radii and the unit circle, on an 8× oversampled angle grid.
pub fn max_modulus_in_disk(h: &TorusFunction, radial_levels: &[f64]) -> Result<f64> {
    let poly = h.analytic_poly(CHECK_TOL)?;
    Ok(max_modulus(h, &poly, radial_levels))
}

fn max_modulus(h: &TorusFunction, poly: &AnalyticPoly, radial_levels: &[f64]) -> f64 {
    let fine = h.grid().m() * 8;
    let mut best = 0.0f64;
    for &r in radial_levels.iter().chain(std::iter::once(&1.0)) {
        let r = r.clamp(0.0, 1.0);
        for j in 0..fine {
            let t = PI * (2 * j + 1) as f64 / fine as f64;
            best = best.max(poly.eval(Complex64::from_polar(r, t)).norm());
        }
    }
    best
}

#[derive(Clone)]
struct Acc {
    count: Vec<u64>,
    sum: Vec<Complex64>,
    sumsq: Vec<f64>,
    hits: u64,
    capped: u64,
}

impl Acc {
    fn new(bins: usize) -> Self {
        Self {
            count: vec![0; bins],
            sum: vec![ZERO; bins],
            sumsq: vec![0.0; bins],
            hits: 0,
            capped: 0,
        }
    }

    fn merge(&mut self, other: &Acc) {
        for i in 0..self.count.len() {
            self.count[i] += other.count[i];
            self.sum[i] += other.sum[i];
            self.sumsq[i] += other.sumsq[i];
        }
        self.hits += other.hits;
        self.capped += other.capped;
    }
}

/// Point where the segment a→b crosses the unit circle (|a| < 1 ≤ |b|).
#[inline]
fn exit_point(a: Complex64, b: Complex64) -> Complex64 {
    let d = b - a;
    let qa = d.norm_sqr();
    let qb = 2.0 * (a.conj() * d).re;
    let qc = a.norm_sqr() - 1.0;
    let s = (-qb + (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa);
    let e = a + d * s.clamp(0.0, 1.0);
    e / e.norm()
}

#[inline]
fn angle_bin(e: Complex64, bins: usize) -> usize {
    let mut phi = e.im.atan2(e.re);
    if phi < 0.0 {
        phi += TAU;
    }
    ((phi / TAU * bins as f64) as usize).min(bins - 1)
}

struct PathParams<'a> {
    poly: &'a AnalyticPoly,
    level_sq: f64,
    step: f64,
    max_steps: usize,
    bins: usize,
    seed: u64,
}

fn simulate_paths(p: &PathParams<'_>, from: u64, to: u64) -> Acc {
    let mut acc = Acc::new(p.bins);
    for path in from..to {
        let mut rng = stream_rng(p.seed, path);
        let mut b = ZERO;
        let mut stopped: Option<Complex64> = None;
        let mut exit = None;
        for _ in 0..p.max_steps {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            let nb = b + Complex64::new(x, y) * p.step;
            if nb.norm_sqr() >= 1.0 {
                exit = Some(exit_point(b, nb));
                break;
            }
            b = nb;
            if stopped.is_none() {
                let v = p.poly.eval(b);
                if v.norm_sqr() > p.level_sq {
                    stopped = Some(v);
                }
            }
        }
        let e = exit.unwrap_or_else(|| {
            acc.capped += 1;
            if b.norm() > 0.0 {
                b / b.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let value = match stopped {
            Some(v) => {
                acc.hits += 1;
                v
            }
            None => p.poly.eval(e),
        };
        let k = angle_bin(e, p.bins);
        acc.count[k] += 1;
        acc.sum[k] += value;
        acc.sumsq[k] += value.norm_sqr();
    }
    acc
}

/// Monte-Carlo estimate of g = E(h(B_ρ) | B_τ) with ρ the first time |h(B)| > C0·|z|.
pub fn truncate(h: &TorusFunction, z: Complex64, cfg: &TruncationConfig) -> Result<TruncationResult> {
    cfg.validate()?;
    let poly = h.analytic_poly(CHECK_TOL)?;
    let grid = h.grid();
    let nb = cfg.bins.unwrap_or(grid.m());
    let level = cfg.c0 * z.norm();
    let h_zero = poly.degree() == 0;
    if !cfg.force_mc {
        if h_zero {
            return Ok(TruncationResult::exact(h, TorusFunction::zeros(grid), 0.0, level, false, cfg));
        }
        if z == ZERO {
            return Ok(TruncationResult::exact(h, TorusFunction::zeros(grid), 1.0, level, true, cfg));
        }
        if max_modulus(h, &poly, &[0.25, 0.5, 0.75]) <= level {
            return Ok(TruncationResult::exact(h, h.clone(), 0.0, level, false, cfg));
        }
    }
    let t0 = Instant::now();
    let params = PathParams {
        poly: &poly,
        level_sq: level * level,
        step: cfg.dt.sqrt(),
        max_steps: cfg.steps_cap(),
        bins: nb,
        seed: cfg.seed,
    };
    let n = cfg.n_paths as u64;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|c| simulate_paths(&params, c * CHUNK, ((c + 1) * CHUNK).min(n)))
        .collect();
    let mut acc = Acc::new(nb);
    for p in &partials {
        acc.merge(p);
    }
    let empty_se = level.max(h.sup_norm());
    let bins: Vec<BinStat> = (0..nb)
        .map(|i| {
            let c = acc.count[i];
            if c == 0 {
                return BinStat { count: 0, mean: ZERO, se: empty_se };
            }
            let mean = acc.sum[i] / c as f64;
            let var = (acc.sumsq[i] / c as f64 - mean.norm_sqr()).max(0.0);
            let se = if c < 2 { empty_se } else { (var / (c - 1) as f64).sqrt() };
            BinStat { count: c, mean, se }
        })
        .collect();
    let bin_grid = TorusGrid::new(nb)?;
    let g_binned = TorusFunction::new(bin_grid, bins.iter().map(|b| b.mean).collect())?;
    let g_hat = project_analytic(&g_binned, grid, cfg.projection_degree)?;
    let hit = acc.hits as f64 / n as f64;
    Ok(TruncationResult {
        g_hat,
        g_binned,
        bins,
        hit_fraction: hit,
        hit_se: (hit * (1.0 - hit) / n as f64).sqrt(),
        paths_truncated_at_max: acc.capped,
        n_paths: cfg.n_paths,
        level,
        fast_path: false,
        degenerate: false,
        config: cfg.clone(),
        wall_clock_s: t0.elapsed().as_secs_f64(),
    })
}

/// Keeps frequencies 1..=degree of a bin-averaged function, undoing the arc
/// averaging (factor sin(kπ/n)/(kπ/n)), and samples the result on `target`.
pub fn project_analytic(binned: &TorusFunction, target: TorusGrid, degree: Option<usize>) -> Result<TorusFunction> {
    let nb = binned.m();
    let d = degree.unwrap_or(nb / 4).min(nb / 2 - 1).min(target.m() / 2 - 1);
    let coeffs: Vec<(i64, Complex64)> = (1..=d)
        .map(|k| {
            let x = k as f64 * PI / nb as f64;
            (k as i64, binned.coeff(k as i64) * (x / x.sin()))
        })
        .collect();
    TorusFunction::from_coeffs(target, &coeffs)
}

/// Both sides of |z| + ¼∫|h − g| ≤ ∫|z + h − bσ|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub slack: f64,
    /// Monte-Carlo standard error of lhs.
    pub se: f64,
    /// slack < −2·se.
    pub violated: bool,
}

impl SlackReport {
    pub fn new(lhs: f64, rhs: f64, se: f64) -> Self {
        let slack = rhs - lhs;
        Self { lhs, rhs, slack, se, violated: slack < -2.0 * se }
    }
}

pub fn verify_truncation(h: &TorusFunction, z: Complex64, b: Complex64, result: &TruncationResult) -> Result<SlackReport> {
    let g = &result.g_hat;
    if g.m() != h.m() {
        return Err(LabError::GridMismatch(h.m(), g.m()));
    }
    let sigma = sign_re(h.grid());
    let m = h.m() as f64;
    let dev: f64 = h.values().iter().zip(g.values()).map(|(a, c)| (a - c).norm()).sum::<f64>() / m;
    let rhs: f64 = h
        .values()
        .iter()
        .zip(sigma.values())
        .map(|(hv, s)| (z + hv - b * s.re).norm())
        .sum::<f64>()
        / m;
    let se = if result.n_paths == 0 { 0.0 } else { 0.25 * result.mean_se() };
    Ok(SlackReport::new(z.norm() + 0.25 * dev, rhs, se))
}
