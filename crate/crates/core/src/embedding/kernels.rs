//! The Fejér-product kernel K, the sign σ-algebra Σ, and the kernels A, B.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ladder::FrequencyLadder;
use crate::error::Result;
use crate::torus::{convolve, TorusFunction};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// K(z) = Π F_{a_k}(z^{n_k}).
pub fn kernel_k(ladder: &FrequencyLadder) -> Result<TorusFunction> {
    let mut k = TorusFunction::constant(ladder.grid(), ONE);
    for level in 1..=ladder.levels() {
        k = k.zip_with(&ladder.dilated_fejer(level)?, |x, y| x * y)?;
    }
    Ok(k)
}

/// Sign pattern of (σ(z^{n_k}))_k at grid point j; bit k−1 set when σ(z^{n_k}) = 1.
pub fn atom_of(ladder: &FrequencyLadder, j: usize) -> usize {
    let g = ladder.grid();
    ladder
        .n()
        .iter()
        .enumerate()
        .filter(|(_, &n)| g.sign_at(n, j) > 0.0)
        .fold(0, |acc, (k, _)| acc | (1 << k))
}

/// b_S(z) = Π_{k∈S} σ(z^{n_k}), with S a bit mask.
pub fn sigma_basis(ladder: &FrequencyLadder, s: usize) -> TorusFunction {
    let g = ladder.grid();
    let values = (0..g.m())
        .map(|j| {
            let v: f64 = ladder
                .n()
                .iter()
                .enumerate()
                .filter(|(k, _)| s & (1 << k) != 0)
                .map(|(_, &n)| g.sign_at(n, j))
                .product();
            Complex64::new(v, 0.0)
        })
        .collect();
    TorusFunction::new(g, values).expect("grid-sized values")
}

/// c_S = ∫ g·b_S for every S ⊆ {1..M}.
pub fn sigma_coefficients(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<Vec<Complex64>> {
    ladder.grid().check_same(g.grid())?;
    Ok((0..1usize << ladder.levels())
        .map(|s| {
            let b = sigma_basis(ladder, s);
            g.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<Complex64>() / g.m() as f64
        })
        .collect())
}

/// E_Σ g: the average of g over each sign atom, i.e. the orthogonal
/// projection onto span{b_S}.
pub fn sigma_project(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<TorusFunction> {
    ladder.grid().check_same(g.grid())?;
    let atoms: Vec<usize> = (0..g.m()).map(|j| atom_of(ladder, j)).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); 1 << ladder.levels()];
    let mut counts = vec![0usize; sums.len()];
    for (&a, v) in atoms.iter().zip(g.values()) {
        sums[a] += v;
        counts[a] += 1;
    }
    let values = atoms.iter().map(|&a| sums[a] / counts[a] as f64).collect();
    TorusFunction::new(g.grid(), values)
}

/// Sign patterns τ ∈ {±1}^M occurring as (σ(ζ^{n_k}))_k on the grid.
pub fn realized_patterns(ladder: &FrequencyLadder) -> Vec<Vec<f64>> {
    let mut seen = vec![false; 1 << ladder.levels()];
    for j in 0..ladder.grid().m() {
        seen[atom_of(ladder, j)] = true;
    }
    seen.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(a, _)| (0..ladder.levels()).map(|k| if a & (1 << k) != 0 { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// z ↦ Π(1 + s_k(z^{n_k})τ_k), the kernel A(·, ζ) for σ(ζ^{n_k}) = τ_k.
pub fn kernel_a(ladder: &FrequencyLadder, tau: &[f64]) -> Result<TorusFunction> {
    let mut out = TorusFunction::constant(ladder.grid(), ONE);
    for (k, &t) in tau.iter().enumerate() {
        let s = ladder.dilated_smoothed_sign(k + 1)?;
        out = out.zip_with(&s, |x, y| x * (ONE + y * t))?;
    }
    Ok(out)
}

/// z ↦ Π(1 + σ(z^{n_k})τ_k), the kernel B(·, ζ).
pub fn kernel_b(ladder: &FrequencyLadder, tau: &[f64]) -> TorusFunction {
    let g = ladder.grid();
    let values = (0..g.m())
        .map(|j| {
            let v: f64 = tau.iter().zip(ladder.n()).map(|(&t, &n)| 1.0 + g.sign_at(n, j) * t).product();
            Complex64::new(v, 0.0)
        })
        .collect();
    TorusFunction::new(g, values).expect("grid-sized values")
}

/// R g = K * (E_Σ g).
pub fn operator_r(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<TorusFunction> {
    convolve(&kernel_k(ladder)?, &sigma_project(g, ladder)?)
}

/// R g = ∫A(·,ζ)g(ζ)dm(ζ) = Σ_S c_S Π_{k∈S} s_k(z^{n_k}).
pub fn operator_r_kernel(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<TorusFunction> {
    let c = sigma_coefficients(g, ladder)?;
    let s = (1..=ladder.levels()).map(|k| ladder.dilated_smoothed_sign(k)).collect::<Result<Vec<_>>>()?;
    let grid = ladder.grid();
    let values = (0..grid.m())
        .map(|j| {
            c.iter()
                .enumerate()
                .map(|(set, &cs)| {
                    (0..s.len()).filter(|k| set & (1 << k) != 0).fold(cs, |acc, k| acc * s[k].values()[j])
                })
                .sum()
        })
        .collect();
    TorusFunction::new(grid, values)
}

/// sup |K*(E_Σ g) − ∫A g| between the two evaluations of R.
pub fn r_route_gap(g: &TorusFunction, ladder: &FrequencyLadder) -> Result<f64> {
    Ok(operator_r(g, ladder)?.max_abs_diff(&operator_r_kernel(g, ladder)?))
}

/// Σ_S c_S b_S with complex Gaussian c_S.
pub fn random_sigma_measurable(ladder: &FrequencyLadder, rng: &mut impl Rng) -> TorusFunction {
    let mut out = TorusFunction::zeros(ladder.grid());
    for s in 0..1usize << ladder.levels() {
        let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        out = &out + &sigma_basis(ladder, s).scale(c);
    }
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::torus::TorusGrid;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sigma_projection_is_a_positive_unital_idempotent(
            a1 in 1usize..4, a2 in 4usize..6,
            re in prop::collection::vec(0.0f64..1.0, 256),
            im in prop::collection::vec(-1.0f64..1.0, 256),
        ) {
            let l = FrequencyLadder::with_orders(TorusGrid::new(256).unwrap(), vec![a1, a2], 0.2).unwrap();
            let g = TorusFunction::new(l.grid(), re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect()).unwrap();
            let p = sigma_project(&g, &l).unwrap();
            prop_assert!(sigma_project(&p, &l).unwrap().max_abs_diff(&p) < 1e-10);
            prop_assert!(p.values().iter().all(|v| v.re >= -1e-12));
            prop_assert!((p.mean() - g.mean()).norm() < 1e-10);
            let k = kernel_k(&l).unwrap();
            prop_assert!(k.values().iter().all(|v| v.re >= -1e-10));
        }
    }
}
