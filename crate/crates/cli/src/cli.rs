//! Argument parsing and subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hm_lab::dgi::{decompose, verify_dgi};
use hm_lab::martingale::{
    dyadic_project, random_dyadic, random_hardy, random_martingale, read_martingale, write_martingale, AmplitudeLaw,
    DyadicConfig, HardyConfig, NormSet, MANIFEST,
};
use hm_lab::{Complex64, TorusGrid};

use crate::cache;
use crate::config::{ExperimentConfig, Suite};
use crate::error::{CliError, Result};
use crate::report::{rows_from, RunReport};

#[derive(Debug, Parser)]
#[command(name = "hm-lab", version, about = "Hardy martingale experiments and inequality checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Grid size, a power of two.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Monte-Carlo paths per truncation.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Hardy,
    Dyadic,
    General,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random martingale and write it to a directory.
    Gen {
        #[arg(long, value_enum, default_value = "hardy")]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Print the L¹, H¹, 𝒫 and 𝒜 norms of a stored martingale.
    Norms { dir: PathBuf },
    /// Decompose F = G + B against D (default: the dyadic projection of F).
    Decompose {
        f: PathBuf,
        #[arg(long)]
        dyadic: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Random instances per suite.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build a lacunary frequency ladder.
    Embed {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Summarize a JSON run report.
    Report { file: PathBuf },
}

impl Global {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out_dir.is_some() {
            cfg.out_dir.clone_from(&self.out_dir);
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.m.is_some() {
            cfg.m = self.m;
        }
        if self.depth.is_some() {
            cfg.depth = self.depth;
        }
        if let Some(n) = self.paths {
            cfg.truncation.get_or_insert_with(Default::default).n_paths = n;
        }
        Ok(cfg)
    }
}

/// Runs the command, writing results to `out`; the value is the process exit code.
/// `cache` is the fixture directory (normally `$HM_LAB_CACHE`).
pub fn execute(cli: Cli, cache: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<i32> {
    let mut cfg = cli.global.config()?;
    if let Command::Verify { suite, samples } = &cli.command {
        cfg.suite = *suite;
        if samples.is_some() {
            cfg.samples = *samples;
        }
    }
    if let Command::Embed { levels, eps } = &cli.command {
        cfg.levels = levels.unwrap_or(cfg.levels);
        cfg.eps = eps.unwrap_or(cfg.eps);
    }
    cfg.validate()?;
    let mut body = || match &cli.command {
        Command::Gen { kind, degree } => gen(&cfg, *kind, *degree, cache, out),
        Command::Norms { dir } => {
            writeln!(out, "{}", serde_json::to_string_pretty(&NormSet::of(&read_martingale(dir)?))?)?;
            Ok(0)
        }
        Command::Decompose { f, dyadic } => decompose_cmd(&cfg, f, dyadic.as_deref(), out),
        Command::Verify { .. } => {
            let report = crate::suites::run_cached(&cfg, cache)?;
            emit(&report, cfg.out_dir.as_deref(), cfg.suite.name(), out)?;
            Ok(report.exit_code())
        }
        Command::Embed { .. } => {
            let grid = TorusGrid::new(cfg.m.unwrap_or(4096))?;
            let ladder = cache::ladder(cache, cfg.levels, cfg.eps, grid)?;
            let json = ladder.to_json()?;
            if let Some(dir) = &cfg.out_dir {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("ladder.json"), &json)?;
            }
            writeln!(out, "{json}")?;
            Ok(0)
        }
        Command::Report { file } => {
            let report = RunReport::from_json(&std::fs::read_to_string(file)?)?;
            summarize(&report, out)?;
            Ok(report.exit_code())
        }
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

fn gen(cfg: &ExperimentConfig, kind: GenKind, degree: usize, cache: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<i32> {
    let depth = cfg.depth.unwrap_or(2);
    let grid = TorusGrid::new(cfg.m.unwrap_or(16))?;
    crate::config::check_tensor(grid.m(), depth)?;
    let tag = format!("{kind:?}").to_lowercase();
    let dir = match (&cfg.out_dir, cache) {
        (Some(d), _) => d.clone(),
        (None, Some(c)) => c.join(format!("{tag}_d{depth}_m{}_s{}_deg{degree}", grid.m(), cfg.seed)),
        (None, None) => return Err(CliError::config("out_dir", "needed when HM_LAB_CACHE is unset")),
    };
    if cfg.out_dir.is_none() && dir.join(MANIFEST).exists() {
        read_martingale(&dir)?;
        writeln!(out, "{}", dir.display())?;
        return Ok(0);
    }
    let hardy = HardyConfig::new(depth, degree, AmplitudeLaw::Gaussian, cfg.seed);
    let f = match kind {
        GenKind::Hardy => random_hardy(grid, &hardy)?,
        GenKind::General => random_martingale(grid, &hardy)?,
        GenKind::Dyadic => random_dyadic(
            grid,
            &DyadicConfig { depth, law: AmplitudeLaw::Gaussian, seed: cfg.seed, start: Complex64::new(0.0, 0.0) },
        )?,
    };
    write_martingale(&dir, &f)?;
    writeln!(out, "{}", dir.display())?;
    Ok(0)
}

fn decompose_cmd(cfg: &ExperimentConfig, f: &Path, d: Option<&Path>, out: &mut (dyn Write + Send)) -> Result<i32> {
    let f = read_martingale(f)?;
    let d = match d {
        Some(p) => read_martingale(p)?,
        None => dyadic_project(&f),
    };
    let tc = hm_lab::truncation::TruncationConfig { seed: cfg.seed, ..cfg.truncation_or(5000) };
    let mut report = RunReport::new(cfg);
    if tc.is_underpowered() {
        report.warnings.push(format!("underpowered: n_paths = {} is below {}", tc.n_paths, hm_lab::truncation::MIN_PATHS));
    }
    let dec = decompose(&f, &d, &tc)?;
    report.rows = rows_from("decompose", "", &verify_dgi(&dec), cfg.seed);
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("decomposition.json"), serde_json::to_string(&dec)?)?;
    }
    emit(&report, cfg.out_dir.as_deref(), "decompose", out)?;
    Ok(if tc.is_underpowered() { 0 } else { report.exit_code() })
}

/// CSV to stdout, or CSV and JSON into `out_dir`; warnings and a tally go to stderr.
fn emit(report: &RunReport, out_dir: Option<&Path>, stem: &str, out: &mut (dyn Write + Send)) -> Result<()> {
    let csv = report.to_csv()?;
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{stem}.csv")), &csv)?;
            std::fs::write(dir.join(format!("{stem}.json")), report.to_json()?)?;
        }
        None => write!(out, "{csv}")?,
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let (pass, fail, reported) = report.tally();
    eprintln!("{pass} passed, {fail} failed, {reported} reported (config {})", report.config_hash);
    Ok(())
}

fn summarize(report: &RunReport, out: &mut (dyn Write + Send)) -> Result<()> {
    writeln!(out, "config {}  version {}  {:.1} s", report.config_hash, report.version, report.wall_clock_s)?;
    for r in &report.rows {
        let bound = r.bound.map_or(String::new(), |b| format!("{b:e}"));
        let status = format!("{:?}", r.status).to_lowercase();
        writeln!(out, "{status:<9} {:<14} {:<48} {:>14e} {bound}", r.suite, r.check, r.value)?;
    }
    for w in &report.warnings {
        writeln!(out, "warning: {w}")?;
    }
    let (pass, fail, reported) = report.tally();
    writeln!(out, "{pass} passed, {fail} failed, {reported} reported")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], cache: Option<&Path>) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("hm-lab").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let code = execute(cli, cache, &mut out).unwrap_or_else(|e| e.exit_code());
        (code, String::from_utf8(out).unwrap())
    }

    fn path(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn gen_writes_manifest_and_one_tensor_per_step() {
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        for dir in [&a, &b] {
            assert_eq!(call(&["gen", "--depth", "2", "--m", "32", "--seed", "7", "--out-dir", path(dir)], None).0, 0);
        }
        let mut names: Vec<String> =
            std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["diff_1.bin", "diff_2.bin", "manifest.json"]);
        for n in &names {
            assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n} differs");
        }
        let (code, out) = call(&["norms", path(&a)], None);
        assert_eq!(code, 0);
        let norms: NormSet = serde_json::from_str(&out).unwrap();
        assert!(norms.l1 > 0.0 && norms.h1 > 0.0);
    }

    #[test]
    fn depth_above_cap_is_a_config_error() {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(call(&["gen", "--depth", "5", "--out-dir", path(tmp.path())], None).0, 2);
    }

    #[test]
    fn gen_reuses_cached_fixtures() {
        let cache = tempfile::tempdir().unwrap();
        let (code, first) = call(&["gen", "--seed", "3"], Some(cache.path()));
        assert_eq!(code, 0);
        let manifest = Path::new(first.trim()).join(MANIFEST);
        let stamp = std::fs::metadata(&manifest).unwrap().modified().unwrap();
        let (_, second) = call(&["gen", "--seed", "3"], Some(cache.path()));
        assert_eq!(first, second);
        assert_eq!(std::fs::metadata(&manifest).unwrap().modified().unwrap(), stamp);
        assert_eq!(call(&["gen"], None).0, 2, "no output location at all");
    }

    #[test]
    fn identities_pass_and_rerun_byte_identically() {
        let (code, a) = call(&["verify", "identities", "--seed", "1"], None);
        let (_, b) = call(&["verify", "identities", "--seed", "1", "--threads", "3"], None);
        assert_eq!(code, 0);
        assert_eq!(a, b);
        assert!(a.starts_with("suite,check,kind,value,bound,slack,status,seed\n"));
        assert!(a.lines().skip(1).all(|l| l.contains(",pass,")));
    }

    #[test]
    fn underpowered_dgi_warns_and_exits_zero() {
        let tmp = tempfile::tempdir().unwrap();
        let args = ["verify", "dgi", "--paths", "10", "--samples", "2", "--out-dir", path(tmp.path())];
        assert_eq!(call(&args, None).0, 0);
        let report = RunReport::from_json(&std::fs::read_to_string(tmp.path().join("dgi.json")).unwrap()).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("underpowered")));
    }

    #[test]
    fn exit_codes_for_bad_config_and_resource_caps() {
        assert_eq!(call(&["verify", "norms", "--m", "12"], None).0, 2);
        assert_eq!(call(&["verify", "dgi", "--m", "256", "--depth", "3"], None).0, 3);
        assert_eq!(call(&["embed", "--levels", "3"], None).0, 3);
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("c.json");
        std::fs::write(&cfg, r#"{"suite": "outer", "grid": 8}"#).unwrap();
        assert_eq!(call(&["verify", "outer", "--config", path(&cfg)], None).0, 2);
    }

    #[test]
    fn embed_prints_the_ladder() {
        let (code, out) = call(&["embed", "--levels", "1", "--m", "1024"], None);
        assert_eq!(code, 0);
        assert_eq!(hm_lab::embedding::FrequencyLadder::from_json(&out).unwrap().a(), [21]);
    }

    #[test]
    fn report_replays_the_exit_status() {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(call(&["verify", "outer", "--out-dir", path(tmp.path())], None).0, 0);
        let json = tmp.path().join("outer.json");
        assert_eq!(call(&["report", path(&json)], None).0, 0);
        let mut failing = RunReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
        failing.rows[0].status = hm_lab::dgi::Status::Fail;
        std::fs::write(&json, failing.to_json().unwrap()).unwrap();
        let (code, out) = call(&["report", path(&json)], None);
        assert_eq!(code, 1);
        assert!(out.contains("1 failed"));
    }

    #[test]
    fn decompose_writes_the_decomposition() {
        let tmp = tempfile::tempdir().unwrap();
        let (f, out) = (tmp.path().join("f"), tmp.path().join("out"));
        assert_eq!(call(&["gen", "--m", "16", "--out-dir", path(&f)], None).0, 0);
        assert_eq!(call(&["decompose", path(&f), "--paths", "500", "--out-dir", path(&out)], None).0, 0);
        assert!(out.join("decomposition.json").exists());
        assert!(std::fs::read_to_string(out.join("decompose.csv")).unwrap().contains("b_a_over_f_minus_d_l1"));
    }
}
