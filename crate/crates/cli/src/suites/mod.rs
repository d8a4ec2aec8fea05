//! Verification suites. Each appends rows to the run report.

mod distance;
mod embedding;
mod identities;
mod mc;
mod norms;
mod outer;

use std::path::Path;
use std::time::Instant;

use hm_lab::dgi::{ConstantsReport, Status};
use hm_lab::rng::derive_seed;
use hm_lab::TorusGrid;

use crate::config::{check_tensor, ExperimentConfig, Suite};
use crate::error::{CliError, Result};
use crate::report::{rows_from, Kind, Row, RunReport, Timing};

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub cache: Option<&'a Path>,
    pub suite: Suite,
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    pub timings: Vec<Timing>,
    /// Turns Monte-Carlo gates into reported rows.
    pub underpowered: bool,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig, cache: Option<&'a Path>, suite: Suite) -> Self {
        Self { cfg, cache, suite, rows: Vec::new(), warnings: Vec::new(), timings: Vec::new(), underpowered: false }
    }

    /// Seed for instance `i` of stream `stream` of this suite.
    pub fn seed(&self, stream: u64, i: u64) -> u64 {
        derive_seed(self.cfg.seed, &[self.suite.label(), stream, i])
    }

    pub fn samples(&self, default: usize) -> usize {
        self.cfg.samples.unwrap_or(default)
    }

    pub fn grid(&self, default: usize, depth: usize) -> Result<TorusGrid> {
        let m = self.cfg.m.unwrap_or(default);
        check_tensor(m, depth)?;
        TorusGrid::new(m).map_err(|_| CliError::config("m", format!("{m} is not a power of two ≥ 4")))
    }

    pub fn depth(&self, default: usize) -> usize {
        self.cfg.depth.unwrap_or(default)
    }

    fn row(&self, check: &str, value: f64, seed: u64) -> Row {
        Row {
            suite: self.suite.name().into(),
            check: check.into(),
            kind: Kind::Reported,
            value,
            bound: None,
            slack: None,
            status: Status::Reported,
            seed,
        }
    }

    fn assert(&mut self, check: &str, value: f64, bound: f64, slack: f64, seed: u64) {
        let status = if slack >= 0.0 { Status::Pass } else { Status::Fail };
        let row = Row { kind: Kind::Asserted, bound: Some(bound), slack: Some(slack), status, ..self.row(check, value, seed) };
        self.rows.push(row);
    }

    pub fn le(&mut self, check: &str, value: f64, bound: f64, seed: u64) {
        self.assert(check, value, bound, bound - value, seed);
    }

    pub fn ge(&mut self, check: &str, value: f64, bound: f64, seed: u64) {
        self.assert(check, value, bound, value - bound, seed);
    }

    pub fn report(&mut self, check: &str, value: f64, seed: u64) {
        let row = self.row(check, value, seed);
        self.rows.push(row);
    }

    pub fn constants(&mut self, prefix: &str, k: &ConstantsReport, seed: u64) {
        self.rows.extend(rows_from(self.suite.name(), prefix, k, seed));
    }

    /// Like `constants`, but gates become reported rows when the run is underpowered.
    pub fn mc_constants(&mut self, prefix: &str, k: &ConstantsReport, seed: u64) {
        let start = self.rows.len();
        self.constants(prefix, k, seed);
        if self.underpowered {
            for r in &mut self.rows[start..] {
                r.kind = Kind::Reported;
                r.status = Status::Reported;
            }
        }
    }

    pub fn mc_le(&mut self, check: &str, value: f64, bound: f64, seed: u64) {
        if self.underpowered {
            let row = Row { bound: Some(bound), slack: Some(bound - value), ..self.row(check, value, seed) };
            self.rows.push(row);
        } else {
            self.le(check, value, bound, seed);
        }
    }

    /// Runs `f` and records its wall-clock time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let clock = Instant::now();
        let out = f(self)?;
        self.timings.push(Timing {
            suite: self.suite.name().into(),
            phase: phase.into(),
            seconds: clock.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    pub fn warn(&mut self, msg: String) {
        self.warnings.push(format!("{}: {msg}", self.suite.name()));
    }

    /// Flags an underpowered Monte-Carlo configuration.
    pub fn check_power(&mut self, n_paths: usize) {
        if n_paths < hm_lab::truncation::MIN_PATHS {
            self.underpowered = true;
            self.warn(format!(
                "underpowered: n_paths = {n_paths} < {}; standard-error gates are too wide and are only reported",
                hm_lab::truncation::MIN_PATHS
            ));
        }
    }
}

fn run_suite(ctx: &mut Ctx<'_>) -> Result<()> {
    match ctx.suite {
        Suite::Identities => identities::run(ctx),
        Suite::Norms => norms::run(ctx),
        Suite::Outer => outer::run(ctx),
        Suite::Truncation => mc::truncation(ctx),
        Suite::Dgi => mc::dgi(ctx),
        Suite::Interpolatory => mc::interpolatory(ctx),
        Suite::Distance => distance::run(ctx),
        Suite::Embedding => embedding::run(ctx),
        Suite::All => unreachable!("expanded before dispatch"),
    }
}

/// Validates `cfg` and runs its suites, inside a pool of `cfg.threads` workers when set.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_cached(cfg, None)
}

/// Like [`run`], reusing fixtures stored under `cache`.
pub fn run_cached(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<RunReport> {
    cfg.validate()?;
    let body = || -> Result<RunReport> {
        let clock = Instant::now();
        let mut report = RunReport::new(cfg);
        for suite in cfg.suite.expand() {
            let mut ctx = Ctx::new(cfg, cache, suite);
            ctx.timed(suite.name(), run_suite)?;
            report.rows.append(&mut ctx.rows);
            report.warnings.append(&mut ctx.warnings);
            report.timings.append(&mut ctx.timings);
        }
        report.wall_clock_s = clock.elapsed().as_secs_f64();
        Ok(report)
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(body),
        None => body(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underpowered_runs_only_report_mc_gates() {
        let cfg = ExperimentConfig::default();
        let mut ctx = Ctx::new(&cfg, None, Suite::Dgi);
        ctx.check_power(10);
        ctx.mc_le("gate", 5.0, 1.0, 0);
        ctx.le("exact", 5.0, 1.0, 0);
        assert_eq!(ctx.rows[0].status, Status::Reported);
        assert_eq!(ctx.rows[0].slack, Some(-4.0));
        assert_eq!(ctx.rows[1].status, Status::Fail);
        assert_eq!(ctx.warnings.len(), 1);
    }

    #[test]
    fn seeds_differ_by_suite_stream_and_index() {
        let cfg = ExperimentConfig::default();
        let a = Ctx::new(&cfg, None, Suite::Norms);
        let b = Ctx::new(&cfg, None, Suite::Outer);
        assert_ne!(a.seed(0, 0), b.seed(0, 0));
        assert_ne!(a.seed(0, 0), a.seed(1, 0));
        assert_ne!(a.seed(0, 0), a.seed(0, 1));
    }

    #[test]
    fn all_expands_to_every_suite_in_order() {
        assert_eq!(Suite::All.expand(), Suite::EACH.to_vec());
        assert_eq!(Suite::Outer.expand(), vec![Suite::Outer]);
    }
}
