//! Functions on the circle sampled on a half-offset grid.
//!
//! Nodes sit at θ_j = π(2j+1)/m, so cos θ_j never vanishes and θ ↦ −θ maps
//! node j to node m−1−j. Coefficients follow the same offset: a monomial
//! e^{ikθ} has values e^{iπk(2j+1)/m}, built from integer angle arithmetic.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

/// Tolerance for mean-zero and analyticity checks.
pub const CHECK_TOL: f64 = 1e-9;
/// Relative tolerance for exact identities.
pub const IDENTITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct TorusGrid {
    m: usize,
}

impl TryFrom<usize> for TorusGrid {
    type Error = LabError;
    fn try_from(m: usize) -> Result<Self> {
        TorusGrid::new(m)
    }
}

impl From<TorusGrid> for usize {
    fn from(g: TorusGrid) -> usize {
        g.m
    }
}

impl TorusGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() {
            return Err(LabError::InvalidGrid(m));
        }
        Ok(Self { m })
    }

    #[inline]
    pub fn m(self) -> usize {
        self.m
    }

    #[inline]
    pub fn angle(self, j: usize) -> f64 {
        PI * (2 * j + 1) as f64 / self.m as f64
    }

    pub fn angles(self) -> Vec<f64> {
        (0..self.m).map(|j| self.angle(j)).collect()
    }

    /// Index of the node at −θ_j.
    #[inline]
    pub fn reflect(self, j: usize) -> usize {
        self.m - 1 - j
    }

    /// e^{iπr/m}.
    #[inline]
    pub fn cis_index(self, r: i64) -> Complex64 {
        let two_m = 2 * self.m as i64;
        let r = r.rem_euclid(two_m);
        let (s, c) = (PI * r as f64 / self.m as f64).sin_cos();
        Complex64::new(c, s)
    }

    /// Value of e^{ikθ} at node j.
    #[inline]
    pub fn monomial_at(self, k: i64, j: usize) -> Complex64 {
        self.cis_index(k * (2 * j as i64 + 1))
    }

    /// sign(cos(kθ_j)); zero only when kθ_j lands on ±π/2.
    #[inline]
    pub fn sign_at(self, k: i64, j: usize) -> f64 {
        let two_m = 2 * self.m as i64;
        let r = (k * (2 * j as i64 + 1)).rem_euclid(two_m);
        let q = self.m as i64 / 2;
        if r < q || r > 3 * q {
            1.0
        } else if r == q || r == 3 * q {
            0.0
        } else {
            -1.0
        }
    }

    pub(crate) fn check_same(self, other: TorusGrid) -> Result<()> {
        if self.m != other.m {
            return Err(LabError::GridMismatch(self.m, other.m));
        }
        Ok(())
    }
}

/// Point of the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(w: Complex64) -> Result<Self> {
        if !(w.norm() <= 1.0 + 1e-12) {
            return Err(LabError::RangeError(format!("|w| = {} exceeds 1", w.norm())));
        }
        Ok(Self(w))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

#[derive(Clone, Default)]
pub struct TorusFunction {
    grid_m: usize,
    values: Vec<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for TorusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusFunction")
            .field("m", &self.grid_m)
            .field("values", &self.values)
            .finish()
    }
}

impl PartialEq for TorusFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid_m == other.grid_m && self.values == other.values
    }
}

impl TorusFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.m() {
            return Err(LabError::GridMismatch(grid.m(), values.len()));
        }
        Ok(Self::from_parts(grid, values))
    }

    fn from_parts(grid: TorusGrid, values: Vec<Complex64>) -> Self {
        Self {
            grid_m: grid.m(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, ZERO)
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        Self::from_parts(grid, vec![c; grid.m()])
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_parts(grid, grid.angles().into_iter().map(f).collect())
    }

    pub fn from_real_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    /// e^{ikθ}, bitwise reproducible across nodes related by symmetry.
    pub fn monomial(grid: TorusGrid, k: i64) -> Self {
        Self::from_parts(grid, (0..grid.m()).map(|j| grid.monomial_at(k, j)).collect())
    }

    /// Trigonometric polynomial Σ c_k e^{ikθ}; requires |k| < m/2.
    pub fn from_coeffs(grid: TorusGrid, coeffs: &[(i64, Complex64)]) -> Result<Self> {
        let m = grid.m();
        let mut spec = vec![ZERO; m];
        for &(k, c) in coeffs {
            if k.unsigned_abs() as usize >= m / 2 {
                return Err(LabError::DegreeOverflow {
                    degree: k.unsigned_abs() as usize,
                    m,
                });
            }
            spec[k.rem_euclid(m as i64) as usize] += c;
        }
        Ok(Self::from_spectrum(grid, spec))
    }

    /// Inverse of [`TorusFunction::spectrum`].
    pub fn from_spectrum(grid: TorusGrid, spec: Vec<Complex64>) -> Self {
        let m = grid.m();
        assert_eq!(spec.len(), m, "spectrum length must equal grid size");
        let mut buf: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == m / 2 {
                    c
                } else {
                    c * grid.cis_index(freq_of(i, m))
                }
            })
            .collect();
        plan(m, true).process(&mut buf);
        let f = Self::from_parts(grid, buf);
        let _ = f.spectrum.set(spec);
        f
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        TorusGrid { m: self.grid_m }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.grid_m
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Coefficients in transform order: slot i holds ĉ(i) for i < m/2 and
    /// ĉ(i − m) for i > m/2. Slot m/2 holds the amplitude D of the Nyquist
    /// component D·sin(mθ/2), which the grid cannot split further.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let m = self.grid_m;
            let grid = self.grid();
            let mut buf = self.values.clone();
            plan(m, false).process(&mut buf);
            let scale = 1.0 / m as f64;
            buf.iter()
                .enumerate()
                .map(|(i, &c)| {
                    if i == m / 2 {
                        c * scale
                    } else {
                        c * grid.cis_index(-freq_of(i, m)) * scale
                    }
                })
                .collect()
        })
    }

    /// ĉ(k). At |k| = m/2 the Nyquist component is split symmetrically.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let m = self.grid_m as i64;
        let spec = self.spectrum();
        if k.abs() < m / 2 {
            spec[k.rem_euclid(m) as usize]
        } else if k.abs() == m / 2 {
            let d = spec[(m / 2) as usize];
            if k > 0 {
                -I * d * 0.5
            } else {
                I * d * 0.5
            }
        } else {
            ZERO
        }
    }

    /// Largest |k| with |ĉ(k)| > tol (m/2 if the Nyquist slot is active).
    pub fn degree(&self, tol: f64) -> usize {
        let m = self.grid_m;
        let spec = self.spectrum();
        if spec[m / 2].norm() > tol {
            return m / 2;
        }
        (1..m / 2)
            .rev()
            .find(|&k| spec[k].norm() > tol || spec[m - k].norm() > tol)
            .unwrap_or(0)
    }

    pub fn mean(&self) -> Complex64 {
        integrate(self)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() / self.grid_m as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid_m as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(Self::from_parts(
            self.grid(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn re(&self) -> Self {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|v| Complex64::new(v.im, 0.0))
    }

    /// f(−θ).
    pub fn reflect(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        Self::from_parts(self.grid(), v)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// ⟨f, σ⟩ = ∫ f·sign(cos θ) dm, paired over antipodal nodes.
    pub fn pair_sign(&self) -> Complex64 {
        pair_sign_slice(self.grid(), &self.values)
    }

    /// Trigonometric interpolant sampled on a grid `factor` times finer.
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        let m = self.grid_m;
        let fine = TorusGrid::new(m * factor)?;
        let spec = self.spectrum();
        let mf = fine.m();
        let mut out = vec![ZERO; mf];
        for k in 1..m / 2 {
            out[k] = spec[k];
            out[mf - k] = spec[m - k];
        }
        out[0] = spec[0];
        if factor > 1 {
            let d = spec[m / 2];
            out[m / 2] = -I * d * 0.5;
            out[mf - m / 2] = I * d * 0.5;
        } else {
            out[m / 2] = spec[m / 2];
        }
        Ok(Self::from_spectrum(fine, out))
    }

    /// z ↦ f(z^n), built spectrally. Requires n·deg(f) < m/2.
    pub fn dilate(&self, n: usize, tol: f64) -> Result<Self> {
        let m = self.grid_m;
        let deg = self.degree(tol);
        if deg >= m / 2 || deg * n >= m / 2 {
            return Err(LabError::DegreeOverflow { degree: deg * n, m });
        }
        let coeffs: Vec<(i64, Complex64)> = (-(deg as i64)..=deg as i64)
            .map(|k| (k * n as i64, self.coeff(k)))
            .collect();
        Self::from_coeffs(self.grid(), &coeffs)
    }

    /// Positive-frequency coefficients for evaluation inside the disk.
    pub fn analytic_poly(&self, tol: f64) -> Result<AnalyticPoly> {
        let m = self.grid_m;
        let spec = self.spectrum();
        let scale = spec.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let bad = |c: Complex64| c.norm() > tol * scale;
        if bad(spec[0]) {
            return Err(LabError::NotAnalytic { index: 0, modulus: spec[0].norm() });
        }
        if bad(spec[m / 2]) {
            return Err(LabError::NotAnalytic {
                index: -(m as i64) / 2,
                modulus: spec[m / 2].norm(),
            });
        }
        for k in 1..m / 2 {
            if bad(spec[m - k]) {
                return Err(LabError::NotAnalytic {
                    index: -(k as i64),
                    modulus: spec[m - k].norm(),
                });
            }
        }
        let cut = 1e-14 * scale;
        let top = (1..m / 2).rev().find(|&k| spec[k].norm() > cut).unwrap_or(0);
        Ok(AnalyticPoly {
            coeffs: (1..=top).map(|k| spec[k]).collect(),
        })
    }
}

/// Σ_{j≥1} c_j w^j.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPoly {
    coeffs: Vec<Complex64>,
}

impl AnalyticPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * w
    }
}

#[inline]
fn freq_of(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

pub(crate) fn pair_sign_slice(grid: TorusGrid, v: &[Complex64]) -> Complex64 {
    let m = grid.m();
    let half = m / 2;
    let mut acc = ZERO;
    for j in 0..half {
        let d = v[j] - v[j + half];
        if grid.sign_at(1, j) > 0.0 {
            acc += d;
        } else {
            acc -= d;
        }
    }
    acc / m as f64
}

/// (1/m)·Σ f(θ_j).
pub fn integrate(f: &TorusFunction) -> Complex64 {
    f.values.iter().sum::<Complex64>() / f.m() as f64
}

/// Multiplier −i·sign(n); kills the mean and the Nyquist component.
pub fn hilbert(f: &TorusFunction) -> TorusFunction {
    let m = f.m();
    let spec: Vec<Complex64> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(i, &c)| match i {
            0 => ZERO,
            i if i == m / 2 => ZERO,
            i if i < m / 2 => -I * c,
            _ => I * c,
        })
        .collect();
    TorusFunction::from_spectrum(f.grid(), spec)
}

/// h = u + iHu.
pub fn analytic_complete(u: &TorusFunction, tol: f64) -> Result<TorusFunction> {
    let c0 = u.coeff(0).norm();
    if c0 > tol {
        return Err(LabError::NonZeroMean(c0));
    }
    let hu = hilbert(u);
    u.zip_with(&hu, |a, b| a + I * b)
}

/// (u, v) with u(θ) = ½(h(θ) + h(−θ)) and v = h − u.
pub fn even_odd_split(h: &TorusFunction) -> (TorusFunction, TorusFunction) {
    let grid = h.grid();
    let m = grid.m();
    let vals = h.values();
    let u: Vec<Complex64> = (0..m).map(|j| (vals[j] + vals[grid.reflect(j)]) * 0.5).collect();
    let v: Vec<Complex64> = vals.iter().zip(&u).map(|(a, b)| a - b).collect();
    (TorusFunction::from_parts(grid, u), TorusFunction::from_parts(grid, v))
}

/// q = exp(log(1−p) + iH log(1−p)), written as (1−p)·e^{iH log(1−p)}.
pub fn outer_function(p: &TorusFunction, tol: f64) -> Result<TorusFunction> {
    let mut clamped = Vec::with_capacity(p.m());
    for (j, v) in p.values().iter().enumerate() {
        if v.im.abs() > tol {
            return Err(LabError::RangeError(format!("p has imaginary part {} at node {j}", v.im)));
        }
        if !(v.re >= -tol && v.re <= 0.5 + tol) {
            return Err(LabError::RangeError(format!("p = {} at node {j} is outside [0, 1/2]", v.re)));
        }
        clamped.push(v.re.clamp(0.0, 0.5));
    }
    let log_mod = TorusFunction::from_parts(
        p.grid(),
        clamped.iter().map(|&x| Complex64::new((-x).ln_1p(), 0.0)).collect(),
    );
    let conj_log = hilbert(&log_mod);
    Ok(TorusFunction::from_parts(
        p.grid(),
        clamped
            .iter()
            .zip(conj_log.values())
            .map(|(&x, h)| Complex64::from_polar(1.0 - x, h.re))
            .collect(),
    ))
}

/// F_a = Σ_{|j|≤a} (1 − |j|/(a+1)) e^{ijθ}.
pub fn fejer_kernel(grid: TorusGrid, a: usize) -> Result<TorusFunction> {
    if a >= grid.m() / 2 {
        return Err(LabError::DegreeOverflow { degree: a, m: grid.m() });
    }
    let coeffs: Vec<(i64, Complex64)> = (-(a as i64)..=a as i64)
        .map(|j| {
            let w = 1.0 - j.unsigned_abs() as f64 / (a + 1) as f64;
            (j, Complex64::new(w, 0.0))
        })
        .collect();
    TorusFunction::from_coeffs(grid, &coeffs)
}

/// σ(θ) = sign(cos θ).
pub fn sign_re(grid: TorusGrid) -> TorusFunction {
    sign_re_dilated(grid, 1)
}

/// σ(z^n) = sign(cos nθ).
pub fn sign_re_dilated(grid: TorusGrid, n: i64) -> TorusFunction {
    TorusFunction::from_parts(
        grid,
        (0..grid.m())
            .map(|j| Complex64::new(grid.sign_at(n, j), 0.0))
            .collect(),
    )
}

/// Analytic extension Σ_{j≥1} ĉ(j) w^j.
pub fn disk_eval(h: &TorusFunction, w: DiskPoint) -> Result<Complex64> {
    Ok(h.analytic_poly(CHECK_TOL)?.eval(w.value()))
}

/// Spectral product; the Nyquist product lives on cos(mθ/2), which vanishes on the grid.
pub fn convolve(f: &TorusFunction, g: &TorusFunction) -> Result<TorusFunction> {
    f.grid().check_same(g.grid())?;
    let m = f.m();
    let spec: Vec<Complex64> = f
        .spectrum()
        .iter()
        .zip(g.spectrum())
        .enumerate()
        .map(|(i, (&a, &b))| if i == m / 2 { ZERO } else { a * b })
        .collect();
    Ok(TorusFunction::from_spectrum(f.grid(), spec))
}

impl Add for &TorusFunction {
    type Output = TorusFunction;
    fn add(self, rhs: &TorusFunction) -> TorusFunction {
        self.zip_with(rhs, |a, b| a + b).expect("grid mismatch in addition")
    }
}

impl Sub for &TorusFunction {
    type Output = TorusFunction;
    fn sub(self, rhs: &TorusFunction) -> TorusFunction {
        self.zip_with(rhs, |a, b| a - b).expect("grid mismatch in subtraction")
    }
}

impl Mul for &TorusFunction {
    type Output = TorusFunction;
    fn mul(self, rhs: &TorusFunction) -> TorusFunction {
        self.zip_with(rhs, |a, b| a * b).expect("grid mismatch in product")
    }
}

impl Neg for &TorusFunction {
    type Output = TorusFunction;
    fn neg(self) -> TorusFunction {
        self.map(|v| -v)
    }
}

#[derive(Serialize, Deserialize)]
struct TorusFunctionRepr {
    m: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for TorusFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TorusFunctionRepr {
            m: self.grid_m,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TorusFunctionRepr::deserialize(d)?;
        let grid = TorusGrid::new(r.m).map_err(serde::de::Error::custom)?;
        TorusFunction::new(grid, r.values.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}
