//! Functions with spectrum in the lacunary set E and their transfer to T^M.

use std::collections::HashMap;

use num_complex::Complex64;

use super::kernels::kernel_k;
use super::ladder::FrequencyLadder;
use crate::error::{LabError, Result};
use crate::martingale::{Martingale, ProductFunction};
use crate::torus::{convolve, TorusFunction, TorusGrid, CHECK_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients on the box Π[−a_i, a_i]; the tuple k stands for z^{Σ k_i n_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunaryFunction<'a> {
    ladder: &'a FrequencyLadder,
    coeffs: Vec<Complex64>,
}

impl<'a> LacunaryFunction<'a> {
    pub fn zeros(ladder: &'a FrequencyLadder) -> Self {
        Self { ladder, coeffs: vec![ZERO; ladder.box_size()] }
    }

    /// Coefficients in box index order.
    pub fn from_coeffs(ladder: &'a FrequencyLadder, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != ladder.box_size() {
            return Err(LabError::Config(format!(
                "expected {} lacunary coefficients, got {}",
                ladder.box_size(),
                coeffs.len()
            )));
        }
        Ok(Self { ladder, coeffs })
    }

    /// Reads the spectrum of `f`; any coefficient off E_M above tolerance is an error.
    pub fn from_torus(f: &TorusFunction, ladder: &'a FrequencyLadder) -> Result<Self> {
        ladder.grid().check_same(f.grid())?;
        let m = f.m() as i64;
        let spec = f.spectrum();
        let tol = CHECK_TOL * spec.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let lookup: HashMap<i64, usize> = ladder.frequencies().into_iter().enumerate().map(|(i, q)| (q, i)).collect();
        let mut out = Self::zeros(ladder);
        for (slot, &c) in spec.iter().enumerate() {
            let q = if (slot as i64) < m / 2 { slot as i64 } else { slot as i64 - m };
            match lookup.get(&q) {
                Some(&i) if slot as i64 != m / 2 => out.coeffs[i] = c,
                _ if c.norm() > tol => return Err(LabError::UnsupportedFrequency(q.abs())),
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn ladder(&self) -> &FrequencyLadder {
        self.ladder
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, tuple: &[i64]) -> Complex64 {
        self.ladder.index(tuple).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, tuple: &[i64], c: Complex64) -> Result<()> {
        let i = self
            .ladder
            .index(tuple)
            .ok_or_else(|| LabError::UnsupportedFrequency(self.ladder.frequency(tuple)))?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn to_torus(&self) -> Result<TorusFunction> {
        let pairs: Vec<(i64, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, &c)| (self.ladder.frequency(&self.ladder.tuple(i)), c))
            .collect();
        TorusFunction::from_coeffs(self.ladder.grid(), &pairs)
    }

    /// T f: the start is f̂(0) and ΔF_m(w) collects the tuples whose last
    /// non-zero entry is k_m, as Σ c_k Π_{j≤m} w_j^{k_j}.
    pub fn transfer(&self, grid: TorusGrid) -> Result<Martingale> {
        let a = self.ladder.a();
        if let Some(&top) = a.iter().max() {
            if top >= grid.m() / 2 {
                return Err(LabError::DegreeOverflow { degree: top, m: grid.m() });
            }
        }
        let levels = self.ladder.levels();
        let start = self.coeff(&vec![0; levels]);
        let diffs = (1..=levels)
            .map(|m| {
                // Tuples with k_{m+1..M} = 0 sit at stride `tail` inside the box.
                let tail = self.ladder.box_size() / self.ladder.box_size_in(m);
                let zero_tail = (0..levels - m).fold(0, |acc, i| acc * (2 * a[m + i] + 1) + a[m + i]);
                let sub: Vec<Complex64> = (0..self.ladder.box_size_in(m))
                    .map(|i| {
                        if (i % (2 * a[m - 1] + 1)) == a[m - 1] {
                            ZERO
                        } else {
                            self.coeffs[i * tail + zero_tail]
                        }
                    })
                    .collect();
                ProductFunction::new(grid, m, synthesize(sub, &a[..m], grid))
            })
            .collect::<Result<Vec<_>>>()?;
        Martingale::new(grid, start, diffs)
    }
}

/// Evaluates Σ c_k Π w_j^{k_j} on the product grid, one axis at a time.
fn synthesize(mut data: Vec<Complex64>, a: &[usize], grid: TorusGrid) -> Vec<Complex64> {
    let mut dims: Vec<usize> = a.iter().map(|&x| 2 * x + 1).collect();
    let n_out = grid.m();
    for axis in 0..dims.len() {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let n_in = dims[axis];
        let table: Vec<Complex64> = (0..n_out)
            .flat_map(|y| (0..n_in).map(move |k| grid.monomial_at(k as i64 - a[axis] as i64, y)))
            .collect();
        let mut out = vec![ZERO; outer * n_out * inner];
        for o in 0..outer {
            for y in 0..n_out {
                let row = &table[y * n_in..(y + 1) * n_in];
                let dst = &mut out[(o * n_out + y) * inner..(o * n_out + y + 1) * inner];
                for (k, &t) in row.iter().enumerate() {
                    let src = &data[(o * n_in + k) * inner..(o * n_in + k + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += t * s;
                    }
                }
            }
        }
        dims[axis] = n_out;
        data = out;
    }
    data
}

/// Smallest power-of-two grid, at least 16, that resolves every a_k.
pub fn transfer_grid(ladder: &FrequencyLadder) -> TorusGrid {
    let top = ladder.a().iter().copied().max().unwrap_or(1);
    TorusGrid::new((2 * (top + 1)).next_power_of_two().max(16)).expect("power of two")
}

/// T f on the default transfer grid, with f given as a torus function.
pub fn transfer_t(f: &TorusFunction, ladder: &FrequencyLadder) -> Result<Martingale> {
    LacunaryFunction::from_torus(f, ladder)?.transfer(transfer_grid(ladder))
}

/// J g = T(K * g).
pub fn operator_j(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<Martingale> {
    transfer_t(&convolve(&kernel_k(ladder)?, g)?, ladder)
}
