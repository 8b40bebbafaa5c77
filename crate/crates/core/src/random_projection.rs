//! Gaussian random-projection approximation `X R Rᵀ Xᵀ` of a PSD matrix
//! `M = X Xᵀ`, and its comparison with spectral truncation.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{argument, Result};
use crate::rng::{derive_seed, seeded};
use crate::spectral::{self, EigenDecomposition};

/// Symmetric square root of a PSD matrix, with negative eigenvalues clipped.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    x: Array2<f64>,
    clip_mass: f64,
}

impl PsdFactor {
    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// Sum of `|λ|` over the clipped negative eigenvalues.
    pub fn clip_mass(&self) -> f64 {
        self.clip_mass
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

/// `X = U diag(sqrt(max(λ, 0))) Uᵀ`.
pub fn factor_psd(matrix: ArrayView2<'_, f64>) -> Result<PsdFactor> {
    factor_from_decomposition(&spectral::eigendecompose(matrix)?)
}

/// As [`factor_psd`], reusing a complete decomposition.
pub fn factor_from_decomposition(eig: &EigenDecomposition) -> Result<PsdFactor> {
    if !eig.is_complete() {
        return Err(argument("square root needs every eigenvector"));
    }
    let v = eig.eigenvectors();
    let roots: Vec<f64> = eig.eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).collect();
    let clip_mass = eig.eigenvalues().iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let mut scaled = v.to_owned();
    for (mut col, &s) in scaled.axis_iter_mut(Axis(1)).zip(&roots) {
        col *= s;
    }
    Ok(PsdFactor {
        x: scaled.dot(&v.t()),
        clip_mass,
    })
}

/// `X R Rᵀ Xᵀ` with `R` an `n×d` matrix of i.i.d. `N(0, 1/d)` entries drawn
/// from the generator for `seed`.
pub fn jl_approximation(factor: &PsdFactor, d: usize, seed: u64) -> Result<Array2<f64>> {
    let n = factor.n();
    if d == 0 || d > n {
        return Err(argument(format!("rank d must lie in 1..={n}, got {d}")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut rng = seeded(seed);
    let r = Array2::from_shape_simple_fn((n, d), || scale * rng.sample::<f64, _>(StandardNormal));
    let y = factor.x.dot(&r);
    let mut out = y.dot(&y.t());
    // Exact symmetry regardless of summation order.
    for i in 0..n {
        for j in 0..i {
            let v = out[[i, j]];
            out[[j, i]] = v;
        }
    }
    Ok(out)
}

/// `sqrt(log n / d)`: the rate shape of the JL max-entry error, constant 1.
pub fn jl_error_bound(n: usize, d: usize) -> Result<f64> {
    if n < 2 || d == 0 {
        return Err(argument(format!("need n ≥ 2 and d ≥ 1, got n = {n}, d = {d}")));
    }
    Ok(((n as f64).ln() / d as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub rank: usize,
    pub spectral_max_error: f64,
    pub jl_median_max_error: f64,
    /// [`jl_error_bound`]; a shape, not a certified bound.
    pub jl_rate_shape: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<ComparisonRow>,
}

fn max_abs_diff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Spectral-truncation and median JL max-entry errors at each rank. Trial `t`
/// uses seed `derive_seed(seed, t)`, shared across ranks.
pub fn compare_methods(
    matrix: ArrayView2<'_, f64>,
    ranks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Comparison> {
    let eig = spectral::eigendecompose(matrix)?;
    compare_with_decomposition(matrix, &eig, ranks, trials, seed)
}

pub fn compare_with_decomposition(
    matrix: ArrayView2<'_, f64>,
    eig: &EigenDecomposition,
    ranks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Comparison> {
    let n = eig.dim();
    if trials == 0 {
        return Err(argument("trials must be at least 1"));
    }
    if ranks.is_empty() {
        return Err(argument("no ranks requested"));
    }
    if let Some(&d) = ranks.iter().find(|&&d| d == 0 || d > n) {
        return Err(argument(format!("rank {d} outside 1..={n}")));
    }
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let sweep = spectral::error_sweep(matrix, eig, &sorted)?;
    let factor = factor_from_decomposition(eig)?;

    let mut rows = Vec::with_capacity(sorted.len());
    for errs in &sweep.rows {
        let d = errs.rank;
        let mut jl: Vec<f64> = (0..trials as u64)
            .map(|t| {
                let approx = jl_approximation(&factor, d, derive_seed(seed, t))?;
                Ok(max_abs_diff(matrix, approx.view()))
            })
            .collect::<Result<_>>()?;
        rows.push(ComparisonRow {
            rank: d,
            spectral_max_error: errs.max_entry_error,
            jl_median_max_error: median(&mut jl),
            jl_rate_shape: if n >= 2 { jl_error_bound(n, d)? } else { f64::NAN },
        });
    }
    Ok(Comparison { n, trials, rows })
}
