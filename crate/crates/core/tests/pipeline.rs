use hm_lab::dgi::{decompose, verify_dgi, Status};
use hm_lab::embedding::{operator_j, FrequencyLadder};
use hm_lab::martingale::{
    dyadic_project, is_dyadic, is_hardy, norm_l1, random_hardy, read_martingale, write_martingale, AmplitudeLaw,
    HardyConfig,
};
use hm_lab::truncation::TruncationConfig;
use hm_lab::{Complex64, TorusFunction, TorusGrid};

#[test]
fn fixtures_survive_a_disk_round_trip() {
    let g = TorusGrid::new(32).unwrap();
    let f = random_hardy(g, &HardyConfig::new(2, 3, AmplitudeLaw::Gaussian, 7)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_martingale(dir.path(), &f).unwrap();
    assert_eq!(manifest.depth, 2);
    assert_eq!(read_martingale(dir.path()).unwrap(), f);
}

#[test]
fn decomposition_of_a_perturbed_hardy_martingale_passes_its_gates() {
    let g = TorusGrid::new(16).unwrap();
    let f = random_hardy(g, &HardyConfig::new(2, 2, AmplitudeLaw::Gaussian, 1)).unwrap();
    let d = dyadic_project(&f);
    assert!(is_hardy(&f, 1e-9) && is_dyadic(&d, 1e-9));
    let cfg = TruncationConfig { n_paths: 1000, seed: 1, ..Default::default() };
    let report = decompose(&f, &d, &cfg).unwrap();
    let constants = verify_dgi(&report);
    for row in &constants.ratios {
        assert_ne!(row.status, Status::Fail, "{row:?}");
    }
    let again = decompose(&f, &d, &cfg).unwrap();
    assert_eq!(report.g, again.g);
}

#[test]
fn analytic_polynomials_embed_as_hardy_martingales() {
    let l = FrequencyLadder::build(2, 0.2, TorusGrid::new(4096).unwrap()).unwrap();
    let coeffs: Vec<(i64, Complex64)> = (1..=8).map(|j| (j, Complex64::new(1.0 / j as f64, 0.5))).collect();
    let p = TorusFunction::from_coeffs(l.grid(), &coeffs).unwrap();
    let j = operator_j(&p, &l).unwrap();
    assert!(is_hardy(&j, 1e-9));
    assert!(norm_l1(&j) > 0.0);
}
