//! Martingales adapted to the coordinate filtration of `T^n`.
//!
//! A function on `T^k` is a dense tensor of `m^k` samples, row-major with the
//! last coordinate fastest, so the fibre over a prefix is a contiguous run of
//! `m` values.

mod empirical;
mod io;
mod norms;
mod random;
mod structure;
mod transform;

use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};
use crate::torus::{TorusFunction, TorusGrid};

pub use empirical::{garnett_jones_ratio, lepingle_ratio, DyadicFamily, GarnettJones};
pub use io::{read_martingale, write_martingale, Manifest, MANIFEST};
pub use norms::{maximal_norm, norm_a, norm_h1, norm_l1, norm_p, NormSet};
pub use random::{random_dyadic, random_hardy, random_martingale, AmplitudeLaw, DyadicConfig, HardyConfig};
pub use structure::{
    cosine_part, dyadic_project, is_dyadic, is_hardy, is_regular, projection_p, randomize, sine_part,
    SignPattern,
};
pub(crate) use structure::{first_non_dyadic_step, first_non_hardy_step};
pub use transform::{steering_weights, transform, SteeringWeights, ZERO_FIBRE};

pub const DEPTH_CAP: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFunction {
    grid: TorusGrid,
    arity: usize,
    values: Vec<Complex64>,
}

impl ProductFunction {
    pub fn new(grid: TorusGrid, arity: usize, values: Vec<Complex64>) -> Result<Self> {
        if arity > DEPTH_CAP {
            return Err(LabError::DepthCap { depth: arity, cap: DEPTH_CAP });
        }
        let len = grid.m().pow(arity as u32);
        if values.len() != len {
            return Err(LabError::Config(format!(
                "tensor of arity {arity} on m = {} needs {len} values, got {}",
                grid.m(),
                values.len()
            )));
        }
        Ok(Self { grid, arity, values })
    }

    pub(crate) fn from_vec(grid: TorusGrid, arity: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.m().pow(arity as u32));
        Self { grid, arity, values }
    }

    pub fn constant(grid: TorusGrid, arity: usize, c: Complex64) -> Self {
        Self::from_vec(grid, arity, vec![c; grid.m().pow(arity as u32)])
    }

    pub fn zeros(grid: TorusGrid, arity: usize) -> Self {
        Self::constant(grid, arity, ZERO)
    }

    pub fn scalar(grid: TorusGrid, c: Complex64) -> Self {
        Self::constant(grid, 0, c)
    }

    /// Builds a tensor from a function of the node indices.
    pub fn from_indices(grid: TorusGrid, arity: usize, f: impl Fn(&[usize]) -> Complex64) -> Self {
        let m = grid.m();
        let len = m.pow(arity as u32);
        let mut idx = vec![0usize; arity];
        let mut values = Vec::with_capacity(len);
        for flat in 0..len {
            let mut r = flat;
            for a in (0..arity).rev() {
                idx[a] = r % m;
                r /= m;
            }
            values.push(f(&idx));
        }
        Self::from_vec(grid, arity, values)
    }

    /// Builds a tensor from a function of the node angles.
    pub fn from_angles(grid: TorusGrid, arity: usize, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let angles = grid.angles();
        Self::from_indices(grid, arity, |idx| {
            let t: Vec<f64> = idx.iter().map(|&i| angles[i]).collect();
            f(&t)
        })
    }

    /// x ↦ f(x_coord) on `T^arity`.
    pub fn from_coordinate(grid: TorusGrid, arity: usize, coord: usize, f: &TorusFunction) -> Result<Self> {
        if coord >= arity {
            return Err(LabError::ArityMismatch { expected: arity, found: coord + 1 });
        }
        if f.m() != grid.m() {
            return Err(LabError::GridMismatch(grid.m(), f.m()));
        }
        let vals = f.values();
        Ok(Self::from_indices(grid, arity, |idx| vals[idx[coord]]))
    }

    /// Fibres indexed by the prefix: (x, y) ↦ fibres[x](y).
    pub fn from_fibres(grid: TorusGrid, arity: usize, fibres: &[TorusFunction]) -> Result<Self> {
        if arity == 0 {
            return Err(LabError::ArityZero);
        }
        let n = grid.m().pow(arity as u32 - 1);
        if fibres.len() != n {
            return Err(LabError::Config(format!("expected {n} fibres, got {}", fibres.len())));
        }
        let mut values = Vec::with_capacity(n * grid.m());
        for f in fibres {
            if f.m() != grid.m() {
                return Err(LabError::GridMismatch(grid.m(), f.m()));
            }
            values.extend_from_slice(f.values());
        }
        Ok(Self::from_vec(grid, arity, values))
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of an arity-0 function.
    pub fn as_scalar(&self) -> Option<Complex64> {
        (self.arity == 0).then(|| self.values[0])
    }

    /// Number of prefixes, `m^(arity−1)`.
    pub fn fibre_count(&self) -> usize {
        if self.arity == 0 {
            0
        } else {
            self.values.len() / self.grid.m()
        }
    }

    /// Values along the last coordinate over prefix `x`.
    pub fn fibre(&self, x: usize) -> &[Complex64] {
        let m = self.grid.m();
        &self.values[x * m..(x + 1) * m]
    }

    pub fn fibre_fn(&self, x: usize) -> TorusFunction {
        TorusFunction::new(self.grid, self.fibre(x).to_vec()).expect("fibre length matches grid")
    }

    pub fn fibres(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.grid.m())
    }

    /// E_{k−1}: averages out the last coordinate.
    pub fn cond_expect_prev(&self) -> Result<Self> {
        if self.arity == 0 {
            return Err(LabError::ArityZero);
        }
        let m = self.grid.m() as f64;
        let values = self.fibres().map(|f| f.iter().sum::<Complex64>() / m).collect();
        Ok(Self::from_vec(self.grid, self.arity - 1, values))
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// The same function viewed on `T^arity` with trailing dummy coordinates.
    pub fn broadcast(&self, arity: usize) -> Self {
        assert!(arity >= self.arity, "broadcast cannot drop coordinates");
        let rep = self.grid.m().pow((arity - self.arity) as u32);
        let mut values = Vec::with_capacity(self.values.len() * rep);
        for &v in &self.values {
            values.extend(std::iter::repeat_n(v, rep));
        }
        Self::from_vec(self.grid, arity, values)
    }

    /// Applies `op` to every line along `axis` (0-based).
    pub fn map_axis(&self, axis: usize, op: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Self {
        assert!(axis < self.arity, "axis out of range");
        let m = self.grid.m();
        let inner = m.pow((self.arity - axis - 1) as u32);
        let outer = self.values.len() / (m * inner);
        let mut out = vec![ZERO; self.values.len()];
        let mut line = vec![ZERO; m];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * m * inner + i;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = self.values[base + j * inner];
                }
                let res = op(&line);
                for (j, r) in res.into_iter().enumerate() {
                    out[base + j * inner] = r;
                }
            }
        }
        Self::from_vec(self.grid, self.arity, out)
    }

    /// θ ↦ −θ in coordinate `axis`; a permutation of the tensor entries.
    pub fn reflect_axis(&self, axis: usize) -> Self {
        self.map_axis(axis, |line| line.iter().rev().copied().collect())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_vec(self.grid, self.arity, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_vec(
            self.grid,
            self.arity,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch(self.grid.m(), other.grid.m()));
        }
        if self.arity != other.arity {
            return Err(LabError::ArityMismatch { expected: self.arity, found: other.arity });
        }
        Ok(())
    }
}

impl Add for &ProductFunction {
    type Output = ProductFunction;
    fn add(self, rhs: &ProductFunction) -> ProductFunction {
        self.zip_with(rhs, |a, b| a + b).expect("incompatible tensors in addition")
    }
}

impl Sub for &ProductFunction {
    type Output = ProductFunction;
    fn sub(self, rhs: &ProductFunction) -> ProductFunction {
        self.zip_with(rhs, |a, b| a - b).expect("incompatible tensors in subtraction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Martingale {
    grid: TorusGrid,
    start: Complex64,
    diffs: Vec<ProductFunction>,
}

impl Martingale {
    /// `diffs[k−1]` is ΔF_k, a function on `T^k`.
    pub fn new(grid: TorusGrid, start: Complex64, diffs: Vec<ProductFunction>) -> Result<Self> {
        if diffs.len() > DEPTH_CAP {
            return Err(LabError::DepthCap { depth: diffs.len(), cap: DEPTH_CAP });
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.grid() != grid {
                return Err(LabError::GridMismatch(grid.m(), d.grid().m()));
            }
            if d.arity() != i + 1 {
                return Err(LabError::ArityMismatch { expected: i + 1, found: d.arity() });
            }
        }
        Ok(Self { grid, start, diffs })
    }

    pub fn zero(grid: TorusGrid, depth: usize) -> Result<Self> {
        Self::new(grid, ZERO, (1..=depth).map(|k| ProductFunction::zeros(grid, k)).collect())
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.diffs.len()
    }

    #[inline]
    pub fn start(&self) -> Complex64 {
        self.start
    }

    /// ΔF_k for k = 1..=depth.
    pub fn diff(&self, k: usize) -> &ProductFunction {
        &self.diffs[k - 1]
    }

    pub fn diffs(&self) -> &[ProductFunction] {
        &self.diffs
    }

    /// F_k on `T^k`.
    pub fn partial_sum(&self, k: usize) -> ProductFunction {
        let mut acc = ProductFunction::scalar(self.grid, self.start);
        for d in &self.diffs[..k] {
            acc = &acc.broadcast(d.arity()) + d;
        }
        acc
    }

    /// F_0, …, F_n.
    pub fn partial_sums(&self) -> Vec<ProductFunction> {
        let mut out = vec![ProductFunction::scalar(self.grid, self.start)];
        for d in &self.diffs {
            let next = &out.last().expect("non-empty").broadcast(d.arity()) + d;
            out.push(next);
        }
        out
    }

    pub fn terminal(&self) -> ProductFunction {
        self.partial_sum(self.depth())
    }

    /// max |E_{k−1} ΔF_k|; zero for a martingale.
    pub fn martingale_defect(&self) -> f64 {
        self.diffs
            .iter()
            .map(|d| d.cond_expect_prev().expect("arity ≥ 1").sup_norm())
            .fold(0.0, f64::max)
    }

    pub fn map_diffs(&self, start: Complex64, f: impl Fn(usize, &ProductFunction) -> ProductFunction) -> Self {
        Self {
            grid: self.grid,
            start,
            diffs: self.diffs.iter().enumerate().map(|(i, d)| f(i + 1, d)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64 + Copy) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch(self.grid.m(), other.grid.m()));
        }
        if self.depth() != other.depth() {
            return Err(LabError::DepthMismatch(self.depth(), other.depth()));
        }
        let diffs = self
            .diffs
            .iter()
            .zip(&other.diffs)
            .map(|(a, b)| a.zip_with(b, f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: self.grid, start: f(self.start, other.start), diffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = (self.start - other.start).norm();
        for (a, b) in self.diffs.iter().zip(&other.diffs) {
            d = d.max(a.max_abs_diff(b));
        }
        d
    }

    /// Largest modulus over all differences and the start.
    pub fn scale_hint(&self) -> f64 {
        self.diffs.iter().map(|d| d.sup_norm()).fold(self.start.norm(), f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct MartingaleRepr {
    m: usize,
    start: [f64; 2],
    diffs: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Martingale {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MartingaleRepr {
            m: self.grid.m(),
            start: [self.start.re, self.start.im],
            diffs: self
                .diffs
                .iter()
                .map(|d| d.values().iter().map(|v| [v.re, v.im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Martingale {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MartingaleRepr::deserialize(d)?;
        let grid = TorusGrid::new(r.m).map_err(serde::de::Error::custom)?;
        let diffs = r
            .diffs
            .into_iter()
            .enumerate()
            .map(|(i, v)| ProductFunction::new(grid, i + 1, v.into_iter().map(|p| Complex64::new(p[0], p[1])).collect()))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Martingale::new(grid, Complex64::new(r.start[0], r.start[1]), diffs).map_err(serde::de::Error::custom)
    }
}
