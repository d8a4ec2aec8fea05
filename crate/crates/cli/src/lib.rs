//! Command-line experiment runner for the hm-lab library: seeded configurations,
//! verification suites, CSV and JSON reports.

pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use config::{ExperimentConfig, Suite};
pub use error::{CliError, Result};
pub use report::{Kind, Row, RunReport};
pub use suites::run;
