//! Davis–Garsia decomposition of a dyadically perturbed Hardy martingale and
//! the inequality checks built on it.

mod decompose;
mod distance;
mod interpolatory;
mod iteration;
mod scalar;

use serde::{Deserialize, Serialize};

pub use decompose::{decompose, verify_dgi, verify_step_inequality, DecompositionReport, NormTable, SliceStats};
pub use distance::{distance_experiment, DistanceConfig, DistanceResult};
pub use interpolatory::{
    cosine_estimate_check, fit_alpha, interpolatory_pipeline, slice_estimates, AlphaFit, InterpolatoryReport,
    SliceEstimate,
};
pub use iteration::{
    instance_from_decomposition, iteration_check, random_instance, IterationInstance, IterationReport, HYPOTHESIS_TOL,
};
pub use scalar::{
    alpha_for_bound, cosine_identity_check, delta_for_sigma, prop_scalar_check, sample_bounded_mean_zero,
    scalar_lemma_check, ScalarVariant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Reported,
}

/// One measured constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub name: String,
    pub value: f64,
    /// Human-readable statement of the inequality the ratio measures.
    pub form: String,
    /// Upper bound the value is asserted against, if any.
    pub bound: Option<f64>,
    /// Distance to the bound, positive when the assertion holds.
    #[serde(default)]
    pub slack: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub ratios: Vec<Ratio>,
}

impl ConstantsReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assert_le(&mut self, name: &str, form: &str, value: f64, bound: f64) {
        let status = if value <= bound { Status::Pass } else { Status::Fail };
        self.ratios.push(Ratio {
            name: name.into(),
            value,
            form: form.into(),
            bound: Some(bound),
            slack: Some(bound - value),
            status,
        });
    }

    /// Records `value ≥ bound`; the stored bound is the lower bound.
    pub fn assert_ge(&mut self, name: &str, form: &str, value: f64, bound: f64) {
        let status = if value >= bound { Status::Pass } else { Status::Fail };
        self.ratios.push(Ratio {
            name: name.into(),
            value,
            form: form.into(),
            bound: Some(bound),
            slack: Some(value - bound),
            status,
        });
    }

    pub fn report(&mut self, name: &str, form: &str, value: f64) {
        self.ratios.push(Ratio {
            name: name.into(),
            value,
            form: form.into(),
            bound: None,
            slack: None,
            status: Status::Reported,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Ratio> {
        self.ratios.iter().find(|r| r.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|r| r.value)
    }

    pub fn all_pass(&self) -> bool {
        self.ratios.iter().all(|r| r.status != Status::Fail)
    }

    pub fn extend(&mut self, other: ConstantsReport) {
        self.ratios.extend(other.ratios);
    }
}

/// num/den, with 0/0 read as 0.
pub fn ratio(num: f64, den: f64) -> f64 {
    if num <= 1e-300 {
        0.0
    } else if den <= 1e-300 {
        f64::INFINITY
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_status() {
        let mut r = ConstantsReport::new();
        r.assert_le("a", "a ≤ 1", 0.5, 1.0);
        r.report("b", "b", 7.0);
        assert!(r.all_pass());
        assert_eq!(r.value("b"), Some(7.0));
        r.assert_le("c", "c ≤ 1", 1.5, 1.0);
        assert!(!r.all_pass());
        assert_eq!(r.get("c").unwrap().status, Status::Fail);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
        assert_eq!(ratio(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio(1.0, 4.0), 0.25);
    }
}
