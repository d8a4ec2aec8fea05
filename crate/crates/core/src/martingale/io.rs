//! Martingale files: a JSON manifest plus one little-endian f64 tensor per difference.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Martingale, ProductFunction};
use crate::error::{LabError, Result};
use crate::torus::TorusGrid;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub depth: usize,
    pub m: usize,
    #[serde(rename = "F0")]
    pub f0: [f64; 2],
    pub diffs: Vec<String>,
}

fn encode(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(LabError::Io(format!("tensor file length {} is not a multiple of 16", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

/// Writes `manifest.json` and `diff_k.bin` into `dir`, creating it if needed.
pub fn write_martingale(dir: &Path, f: &Martingale) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(f.depth());
    for (i, d) in f.diffs().iter().enumerate() {
        let name = format!("diff_{}.bin", i + 1);
        fs::write(dir.join(&name), encode(d.values()))?;
        names.push(name);
    }
    let manifest = Manifest {
        depth: f.depth(),
        m: f.grid().m(),
        f0: [f.start().re, f.start().im],
        diffs: names,
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub fn read_martingale(dir: &Path) -> Result<Martingale> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?;
    if manifest.diffs.len() != manifest.depth {
        return Err(LabError::Io(format!(
            "manifest lists {} files for depth {}",
            manifest.diffs.len(),
            manifest.depth
        )));
    }
    let grid = TorusGrid::new(manifest.m)?;
    let diffs = manifest
        .diffs
        .iter()
        .enumerate()
        .map(|(i, name)| ProductFunction::new(grid, i + 1, decode(&fs::read(dir.join(name))?)?))
        .collect::<Result<Vec<_>>>()?;
    Martingale::new(grid, Complex64::new(manifest.f0[0], manifest.f0[1]), diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{random_hardy, AmplitudeLaw, HardyConfig};

    #[test]
    fn round_trip_is_bitwise() {
        let g = TorusGrid::new(16).unwrap();
        let mut cfg = HardyConfig::new(2, 1, AmplitudeLaw::Gaussian, 9);
        cfg.start = Complex64::new(0.25, -1.5);
        let f = random_hardy(g, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_martingale(dir.path(), &f).unwrap();
        assert_eq!(manifest.diffs, vec!["diff_1.bin", "diff_2.bin"]);
        assert_eq!(fs::metadata(dir.path().join("diff_2.bin")).unwrap().len(), 256 * 16);
        assert_eq!(read_martingale(dir.path()).unwrap(), f);
    }

    #[test]
    fn truncated_tensor_is_rejected() {
        let g = TorusGrid::new(16).unwrap();
        let f = random_hardy(g, &HardyConfig::new(1, 1, AmplitudeLaw::Gaussian, 9)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_martingale(dir.path(), &f).unwrap();
        fs::write(dir.path().join("diff_1.bin"), [0u8; 20]).unwrap();
        assert!(read_martingale(dir.path()).is_err());
    }
}
