//! Experiment configuration and its validation.

use std::path::PathBuf;

use hm_lab::embedding::LEVEL_CAP;
use hm_lab::martingale::DEPTH_CAP;
use hm_lab::truncation::TruncationConfig;
use hm_lab::TorusGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Largest tensor (m^depth entries) a suite may allocate.
pub const TENSOR_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Norms,
    Outer,
    Truncation,
    Dgi,
    Interpolatory,
    Distance,
    Embedding,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Identities,
        Suite::Norms,
        Suite::Outer,
        Suite::Truncation,
        Suite::Dgi,
        Suite::Interpolatory,
        Suite::Distance,
        Suite::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Norms => "norms",
            Suite::Outer => "outer",
            Suite::Truncation => "truncation",
            Suite::Dgi => "dgi",
            Suite::Interpolatory => "interpolatory",
            Suite::Distance => "distance",
            Suite::Embedding => "embedding",
            Suite::All => "all",
        }
    }

    /// The suites this selection runs, in order.
    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Self::EACH.to_vec()
        } else {
            vec![self]
        }
    }

    pub(crate) fn label(self) -> u64 {
        Self::EACH.iter().position(|&s| s == self).map_or(99, |i| i as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Grid size; each suite has its own default.
    pub m: Option<usize>,
    /// Martingale depth; each suite has its own default.
    pub depth: Option<usize>,
    /// Random instances per suite; each suite has its own default.
    pub samples: Option<usize>,
    /// Monte-Carlo parameters. Its seed is replaced by seeds derived from `seed`;
    /// `n_paths` defaults to 20000 for the truncation suite and 5000 elsewhere.
    pub truncation: Option<TruncationConfig>,
    /// Ladder depth for the embedding suite.
    pub levels: usize,
    pub eps: f64,
    /// Distance constant for the embedding chain; measured when absent.
    pub a0: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 0,
            m: None,
            depth: None,
            samples: None,
            truncation: None,
            levels: 2,
            eps: 0.2,
            a0: None,
            out_dir: None,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn for_suite(suite: Suite, seed: u64) -> Self {
        Self { suite, seed, ..Default::default() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.m {
            TorusGrid::new(m).map_err(|_| CliError::config("m", format!("{m} is not a power of two ≥ 4")))?;
        }
        if let Some(d) = self.depth {
            if d == 0 || d > DEPTH_CAP {
                return Err(CliError::config("depth", format!("{d} is outside 1..={DEPTH_CAP} (depth cap)")));
            }
        }
        if self.samples == Some(0) {
            return Err(CliError::config("samples", "must be positive"));
        }
        if let Some(t) = &self.truncation {
            t.validate().map_err(|e| CliError::config("truncation", e.to_string()))?;
        }
        if self.levels == 0 || self.levels > LEVEL_CAP {
            return Err(CliError::config("levels", format!("{} is outside 1..={LEVEL_CAP}", self.levels)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CliError::config("eps", format!("{} is outside (0, 1)", self.eps)));
        }
        if let Some(a0) = self.a0 {
            if !(a0.is_finite() && a0 > 0.0) {
                return Err(CliError::config("a0", format!("{a0} must be positive and finite")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be positive"));
        }
        if let (Some(m), Some(d)) = (self.m, self.depth) {
            check_tensor(m, d)?;
        }
        Ok(())
    }

    /// Monte-Carlo parameters with the given default path count.
    pub fn truncation_or(&self, n_paths: usize) -> TruncationConfig {
        self.truncation.clone().unwrap_or(TruncationConfig { n_paths, ..Default::default() })
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON, without
    /// output location and thread count.
    pub fn hash(&self) -> String {
        let canonical = Self { out_dir: None, threads: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

pub(crate) fn check_tensor(m: usize, depth: usize) -> Result<()> {
    match m.checked_pow(depth as u32) {
        Some(n) if n <= TENSOR_CAP => Ok(()),
        _ => Err(CliError::ResourceCap(format!("m^depth = {m}^{depth} exceeds {TENSOR_CAP} entries"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tensor_cap_decides_between_ok_and_resource_error(log_m in 2u32..12, depth in 1usize..=4) {
            let m = 1usize << log_m;
            let cfg = ExperimentConfig { m: Some(m), depth: Some(depth), ..Default::default() };
            let fits = m.pow(depth as u32) <= TENSOR_CAP;
            match cfg.validate() {
                Ok(()) => prop_assert!(fits),
                Err(e) => prop_assert!(!fits && e.exit_code() == 3),
            }
        }

        #[test]
        fn json_round_trip_keeps_the_hash(seed in any::<u64>(), samples in 1usize..500, eps in 0.01f64..0.99) {
            let cfg = ExperimentConfig { seed, samples: Some(samples), eps, ..Default::default() };
            let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
            prop_assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn validation_names_the_field() {
        let bad = ExperimentConfig { depth: Some(5), ..Default::default() };
        match bad.validate() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "depth"),
            other => panic!("{other:?}"),
        }
        let bad = ExperimentConfig { m: Some(12), ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
        let big = ExperimentConfig { m: Some(256), depth: Some(3), ..Default::default() };
        assert_eq!(big.validate().unwrap_err().exit_code(), 3);
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn hash_ignores_output_and_threads() {
        let a = ExperimentConfig::for_suite(Suite::Dgi, 3);
        let b = ExperimentConfig { threads: Some(4), out_dir: Some("x".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), ExperimentConfig::for_suite(Suite::Dgi, 4).hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn json_fills_defaults_and_rejects_unknown_fields() {
        let c = ExperimentConfig::from_json(r#"{"suite": "outer", "seed": 9}"#).unwrap();
        assert_eq!(c.suite, Suite::Outer);
        assert_eq!(c.levels, 2);
        assert!(ExperimentConfig::from_json(r#"{"sweet": 1}"#).is_err());
    }
}
