//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::collections::HashMap;
use std::time::Instant;

use hm_lab::dgi::Status;
use hm_lab::truncation::TruncationConfig;
use hm_lab_cli::{run, ExperimentConfig, Row, RunReport, Suite};

const SEED: u64 = 1;

/// Seconds allowed per criterion.
const BUDGET_IDENTITIES: f64 = 10.0;
const BUDGET_SCALAR: f64 = 5.0;
const BUDGET_OUTER: f64 = 5.0;
const BUDGET_NORMS: f64 = 10.0;
const BUDGET_SQUARE_FUNCTION: f64 = 60.0;
const BUDGET_ITERATION: f64 = 5.0;
const BUDGET_TRUNCATION: f64 = 300.0;
const BUDGET_DGI: f64 = 900.0;
const BUDGET_INTERPOLATORY: f64 = 1200.0;
const BUDGET_EMBEDDING: f64 = 300.0;

const DGI_RUNS: usize = 20;
const DGI_PATHS: usize = 5000;
const INTERPOLATORY_RUNS: usize = 10;
const TRUNCATION_PATHS: usize = 20_000;
const EMBEDDING_M: usize = 4096;

type Criterion = (&'static str, fn(&mut Runs) -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

struct Runs {
    reports: HashMap<&'static str, RunReport>,
}

impl Runs {
    fn get(&mut self, suite: Suite) -> &RunReport {
        self.reports.entry(suite.name()).or_insert_with(|| {
            let cfg = match suite {
                Suite::Dgi => ExperimentConfig {
                    samples: Some(DGI_RUNS),
                    truncation: Some(TruncationConfig { n_paths: DGI_PATHS, ..Default::default() }),
                    ..ExperimentConfig::for_suite(suite, SEED)
                },
                Suite::Interpolatory => ExperimentConfig {
                    samples: Some(INTERPOLATORY_RUNS),
                    truncation: Some(TruncationConfig { n_paths: DGI_PATHS, ..Default::default() }),
                    ..ExperimentConfig::for_suite(suite, SEED)
                },
                Suite::Truncation => ExperimentConfig {
                    truncation: Some(TruncationConfig { n_paths: TRUNCATION_PATHS, ..Default::default() }),
                    ..ExperimentConfig::for_suite(suite, SEED)
                },
                Suite::Embedding => ExperimentConfig {
                    m: Some(EMBEDDING_M),
                    levels: 2,
                    eps: 0.2,
                    ..ExperimentConfig::for_suite(suite, SEED)
                },
                _ => ExperimentConfig::for_suite(suite, SEED),
            };
            run(&cfg).unwrap_or_else(|e| panic!("suite {} did not run: {e}", suite.name()))
        })
    }
}

fn rows<'a>(report: &'a RunReport, pick: impl Fn(&Row) -> bool + 'a) -> Vec<&'a Row> {
    report.rows.iter().filter(|r| pick(r)).collect()
}

fn describe(rows: &[&Row]) -> String {
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.status == Status::Fail)
        .map(|r| format!("{} = {:e} (bound {:e})", r.check, r.value, r.bound.unwrap_or(f64::NAN)))
        .collect();
    if failed.is_empty() {
        format!("{} asserted rows pass", rows.iter().filter(|r| r.status == Status::Pass).count())
    } else {
        format!("failing: {}", failed.join("; "))
    }
}

/// All asserted rows in `picked` pass, there is at least one, and the phase met its budget.
fn gate(report: &RunReport, suite: &str, phase: &str, budget: f64, picked: Vec<&Row>) -> Outcome {
    let seconds = report.seconds(suite, phase).unwrap_or(f64::INFINITY);
    let asserted: Vec<&Row> = picked.into_iter().filter(|r| r.status != Status::Reported).collect();
    let rows_ok = !asserted.is_empty() && asserted.iter().all(|r| r.passed());
    let time_ok = seconds <= budget;
    Outcome {
        pass: rows_ok && time_ok,
        detail: format!("{}; {seconds:.1} s of {budget} s", describe(&asserted)),
    }
}

fn named<'a>(report: &'a RunReport, names: &'a [&'a str]) -> Vec<&'a Row> {
    rows(report, move |r| names.contains(&r.check.as_str()))
}

fn c1(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Identities);
    let names = ["cosine_identity_residual", "hardy_variance_identity", "hilbert_duality_residual"];
    gate(r, "identities", "exact", BUDGET_IDENTITIES, named(r, &names))
}

fn c2(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Identities);
    gate(r, "identities", "scalar", BUDGET_SCALAR, rows(r, |r| r.check.starts_with("scalar_")))
}

fn c3(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Outer);
    let mut out = gate(r, "outer", "outer", BUDGET_OUTER, rows(r, |_| true));
    let pinned = r.row("outer", "constant_ratio_deviation").is_some_and(|row| row.value == 0.0);
    out.pass &= pinned;
    if let Some(row) = r.row("outer", "l1_ratio_max") {
        out.detail = format!("{}; ratio max {:.4}", out.detail, row.value);
    }
    out
}

fn c4(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Norms);
    gate(r, "norms", "norms", BUDGET_NORMS, rows(r, |r| r.check != "square_function_ratio_max"))
}

fn c5(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Norms);
    let mut out = gate(r, "norms", "norms", BUDGET_SQUARE_FUNCTION, named(r, &["square_function_ratio_max"]));
    if let Some(row) = r.row("norms", "square_function_ratio_max") {
        out.detail = format!("{}; running max {:.4}", out.detail, row.value);
    }
    out
}

fn c6(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Dgi);
    let mut out = gate(r, "dgi", "iteration", BUDGET_ITERATION, named(r, &["iteration_min_conclusion_slack"]));
    if let Some(row) = r.row("dgi", "iteration_rejected_instances") {
        out.detail = format!("{}; {} instances rejected", out.detail, row.value);
    }
    out
}

fn c7(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Truncation);
    let picked = rows(r, |_| true);
    let sweeps = picked.iter().filter(|r| r.check.starts_with("inequality_violations_c0_")).count();
    let mut out = gate(r, "truncation", "truncation", BUDGET_TRUNCATION, picked);
    out.pass &= sweeps == 2;
    out
}

fn c8(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Dgi);
    let picked = rows(r, |r| r.check.starts_with("run"));
    let complete = (0..DGI_RUNS).all(|i| r.row("dgi", &format!("run{i:02}.step_slack_pass_fraction")).is_some())
        && (0..DGI_RUNS).all(|i| r.row("dgi", &format!("run{i:02}.b_a_over_f_minus_d_l1")).is_some());
    let mut out = gate(r, "dgi", "decomposition", BUDGET_DGI, picked);
    out.pass &= complete && r.warnings.is_empty();
    out
}

fn c9(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Interpolatory);
    let measured = rows(r, |r| r.check.ends_with(".c_interpolatory")).len();
    let degenerate = r.row("interpolatory", "degenerate_even_harmonic_ratio").is_some_and(|row| row.value == 0.0);
    let mut out = gate(r, "interpolatory", "interpolatory", BUDGET_INTERPOLATORY, rows(r, |_| true));
    out.pass &= measured >= INTERPOLATORY_RUNS && degenerate;
    out.detail = format!("{}; {measured} runs measured", out.detail);
    out
}

fn c10(runs: &mut Runs) -> Outcome {
    let r = runs.get(Suite::Embedding);
    let names = [
        "ladder.lacunary",
        "ladder.injective",
        "small.a_minus_b_l1",
        "r_route_gap",
        "embedding.meyer_c",
        "negative_control_detected",
    ];
    let mut out = gate(r, "embedding", "embedding", BUDGET_EMBEDDING, named(r, &names));
    out.pass &= r.row("embedding", "embedding.distance_median").is_some();
    out
}

/// Every suite, at reduced size, gives the same CSV bytes with one and with four workers.
fn c11(_: &mut Runs) -> Outcome {
    let clock = Instant::now();
    let mut differing = Vec::new();
    for suite in Suite::EACH {
        let csv = |threads| {
            let cfg = ExperimentConfig {
                samples: Some(2),
                threads: Some(threads),
                truncation: Some(TruncationConfig { n_paths: 2000, ..Default::default() }),
                ..ExperimentConfig::for_suite(suite, SEED)
            };
            run(&cfg).and_then(|r| r.to_csv()).unwrap_or_else(|e| format!("error: {e}"))
        };
        if csv(1) != csv(4) {
            differing.push(suite.name());
        }
    }
    Outcome {
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            format!("8 suites byte-identical at 1 and 4 threads; {:.1} s", clock.elapsed().as_secs_f64())
        } else {
            format!("CSV differs for {}", differing.join(", "))
        },
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact identities", c1),
        ("scalar inequalities", c2),
        ("outer functions", c3),
        ("norms and transforms", c4),
        ("square-function gate", c5),
        ("iteration theorem", c6),
        ("truncation", c7),
        ("decomposition", c8),
        ("interpolatory pipeline", c9),
        ("embedding", c10),
        ("reproducibility", c11),
    ];
    let mut runs = Runs { reports: HashMap::new() };
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check(&mut runs);
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
