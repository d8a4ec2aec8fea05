//! Fixture reuse under `$HM_LAB_CACHE`.

use std::path::{Path, PathBuf};

use hm_lab::embedding::FrequencyLadder;
use hm_lab::TorusGrid;

use crate::error::Result;

pub const CACHE_VAR: &str = "HM_LAB_CACHE";

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Builds the ladder, or reads it from `cache` when present there.
pub fn ladder(cache: Option<&Path>, levels: usize, eps: f64, grid: TorusGrid) -> Result<FrequencyLadder> {
    let Some(dir) = cache else {
        return Ok(FrequencyLadder::build(levels, eps, grid)?);
    };
    let path = dir.join(format!("ladder_l{levels}_m{}_eps{eps}.json", grid.m()));
    if let Ok(s) = std::fs::read_to_string(&path) {
        if let Ok(l) = FrequencyLadder::from_json(&s) {
            if l.levels() == levels && l.eps() == eps && l.grid() == grid {
                return Ok(l);
            }
        }
    }
    let l = FrequencyLadder::build(levels, eps, grid)?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, l.to_json()?)?;
    Ok(l)
}
