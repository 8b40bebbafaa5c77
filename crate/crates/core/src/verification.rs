//! Numerical checks of the identities and concentration facts behind the
//! delocalisation argument: the principal-minor eigenvector identity, Cauchy
//! interlacing, the sup-norm statistic, sample-vs-population eigenvalues and
//! the distance between a random vector and a fixed subspace.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand_distr::StandardNormal;

use crate::analytic::AnalyticSpectrum;
use crate::error::{argument, Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::spectral::{self, EigenDecomposition};

/// Eigenvalue separation below which an index is skipped by
/// [`minor_identity_check`].
pub const COINCIDENCE_THRESHOLD: f64 = 1e-6;

/// Default threshold grid for [`subspace_distance_experiment`].
pub const DEFAULT_THRESHOLDS: [f64; 4] = [8.0, 10.0, 12.0, 16.0];

/// Split of a symmetric matrix into its first entry, the rest of its first
/// column and the eigen-system of the bottom-right minor.
#[derive(Debug, Clone)]
pub struct MinorDecomposition {
    pub z: f64,
    pub y: Array1<f64>,
    pub minor: Array2<f64>,
    pub minor_eig: EigenDecomposition,
}

impl MinorDecomposition {
    pub fn new(matrix: ArrayView2<'_, f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n < 2 || matrix.ncols() != n {
            return Err(argument(format!(
                "need a square matrix of size at least 2, got {:?}",
                matrix.dim()
            )));
        }
        let minor = matrix.slice(s![1.., 1..]).to_owned();
        let minor_eig = spectral::eigendecompose(minor.view())?;
        Ok(MinorDecomposition {
            z: matrix[[0, 0]],
            y: matrix.slice(s![1.., 0]).to_owned(),
            minor,
            minor_eig,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinorIdentityReport {
    /// `max_l |û_l(1)² − rhs_l| / max(û_l(1)², 1e-12)` over retained `l`.
    pub max_relative_discrepancy: f64,
    pub checked: usize,
    /// 0-based indices `l` whose eigenvalue comes within the threshold of a
    /// minor eigenvalue.
    pub skipped: Vec<usize>,
}

/// Compares `û_l(1)²` with `1 / (1 + Σ_j (λ̃_j − λ̂_l)^{-2} (ũ_jᵀ y)²)`.
pub fn minor_identity_check(matrix: ArrayView2<'_, f64>) -> Result<MinorIdentityReport> {
    let minor = MinorDecomposition::new(matrix)?;
    let eig = spectral::eigendecompose(matrix)?;
    minor_identity_from_parts(&eig, &minor)
}

pub fn minor_identity_from_parts(
    eig: &EigenDecomposition,
    minor: &MinorDecomposition,
) -> Result<MinorIdentityReport> {
    check_sizes(eig, minor)?;
    let n = eig.dim();
    let minor_values = minor.minor_eig.eigenvalues();
    let proj: Vec<f64> = (0..n - 1)
        .map(|j| minor.minor_eig.eigenvector(j).dot(&minor.y))
        .collect();
    let mut worst = 0.0_f64;
    let mut skipped = Vec::new();
    for l in 0..n {
        let lambda = eig.eigenvalues()[l];
        let gap = minor_values
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min((v - lambda).abs()));
        if gap < COINCIDENCE_THRESHOLD {
            skipped.push(l);
            continue;
        }
        let sum: f64 = minor_values
            .iter()
            .zip(&proj)
            .map(|(&v, &p)| p * p / ((v - lambda) * (v - lambda)))
            .sum();
        let rhs = 1.0 / (1.0 + sum);
        let lhs = eig.eigenvector(l)[0].powi(2);
        worst = worst.max((lhs - rhs).abs() / lhs.max(1e-12));
    }
    Ok(MinorIdentityReport {
        max_relative_discrepancy: worst,
        checked: n - skipped.len(),
        skipped,
    })
}

fn check_sizes(eig: &EigenDecomposition, minor: &MinorDecomposition) -> Result<()> {
    if minor.minor_eig.dim() + 1 != eig.dim() {
        return Err(argument(format!(
            "minor has size {} but matrix has size {}",
            minor.minor_eig.dim(),
            eig.dim()
        )));
    }
    Ok(())
}

/// Largest violation of `λ̂_{i+1} ≤ λ̃_i ≤ λ̂_i` (descending order); 0 when
/// the eigenvalues interlace.
pub fn interlacing_check(eig: &EigenDecomposition, minor: &MinorDecomposition) -> Result<f64> {
    check_sizes(eig, minor)?;
    let full = eig.eigenvalues();
    let part = minor.minor_eig.eigenvalues();
    Ok(part
        .iter()
        .enumerate()
        .map(|(i, &m)| (full[i + 1] - m).max(m - full[i]).max(0.0))
        .fold(0.0, f64::max))
}

/// `sqrt(n) · max_{l>d} ‖û_l‖_∞`.
pub fn delocalisation_report(eig: &EigenDecomposition, d: usize) -> Result<f64> {
    Ok((eig.dim() as f64).sqrt() * spectral::sup_norm_tail(eig, d)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    /// 1-based sample index; paired with population index `index - 1`.
    pub index: usize,
    pub sample: f64,
    pub population: f64,
    pub absolute: f64,
    pub relative: f64,
}

/// `λ̂_i / n` against the analytic `λ_i` for the leading `m` indices.
/// `eigenvalues` are the Gram-matrix eigenvalues, descending.
pub fn eigenvalue_deviation_report(
    eigenvalues: ArrayView1<'_, f64>,
    spectrum: &AnalyticSpectrum,
    m: usize,
) -> Result<Vec<DeviationRow>> {
    let n = eigenvalues.len();
    if m == 0 || m > n {
        return Err(argument(format!("count must lie in 1..={n}, got {m}")));
    }
    let population = spectrum.leading_eigenvalues(m)?;
    Ok(population
        .iter()
        .enumerate()
        .map(|(i, &pop)| {
            let sample = eigenvalues[i] / n as f64;
            let absolute = (sample - pop).abs();
            DeviationRow {
                index: i + 1,
                sample,
                population: pop,
                absolute,
                relative: absolute / pop,
            }
        })
        .collect())
}

/// Distribution of the i.i.d. vector entries, all supported in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryLaw {
    Bernoulli { p: f64 },
    Uniform01,
    /// `scale · Bernoulli(p)` with `0 < scale ≤ 1`.
    Scaled { p: f64, scale: f64 },
}

impl EntryLaw {
    fn validate(&self) -> Result<()> {
        let (p, scale) = match *self {
            EntryLaw::Bernoulli { p } => (p, 1.0),
            EntryLaw::Uniform01 => return Ok(()),
            EntryLaw::Scaled { p, scale } => (p, scale),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(argument(format!("Bernoulli parameter must lie in (0, 1), got {p}")));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(argument(format!("scale must lie in (0, 1], got {scale}")));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            EntryLaw::Bernoulli { p } => p,
            EntryLaw::Uniform01 => 0.5,
            EntryLaw::Scaled { p, scale } => scale * p,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            EntryLaw::Bernoulli { p } => p * (1.0 - p),
            EntryLaw::Uniform01 => 1.0 / 12.0,
            EntryLaw::Scaled { p, scale } => scale * scale * p * (1.0 - p),
        }
    }

    fn sample(&self, rng: &mut impl rand::Rng) -> f64 {
        match *self {
            EntryLaw::Bernoulli { p } => f64::from(u8::from(rng.random_bool(p))),
            EntryLaw::Uniform01 => rng.random::<f64>(),
            EntryLaw::Scaled { p, scale } => scale * f64::from(u8::from(rng.random_bool(p))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceExperiment {
    pub n: usize,
    pub q: usize,
    pub law: EntryLaw,
    pub trials: usize,
    /// Vector draws per random subspace; `1` gives a fresh subspace per trial.
    pub trials_per_subspace: usize,
    pub thresholds: Vec<f64>,
    pub seed: u64,
}

impl SubspaceExperiment {
    pub fn new(n: usize, q: usize, law: EntryLaw, trials: usize, seed: u64) -> Self {
        SubspaceExperiment {
            n,
            q,
            law,
            trials,
            trials_per_subspace: 100,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFrequencyReport {
    pub n: usize,
    pub q: usize,
    pub variance: f64,
    pub trials: usize,
    pub subspaces: usize,
    pub seed: u64,
    /// Ascending.
    pub thresholds: Vec<f64>,
    /// Fraction of trials with `|‖π_H(y)‖ − σ√q| ≥ t`.
    pub frequencies: Vec<f64>,
    /// `4 exp(−t²/32)`.
    pub bounds: Vec<f64>,
    pub mean_distance: f64,
}

impl TailFrequencyReport {
    pub fn all_within_bound(&self) -> bool {
        self.frequencies.iter().zip(&self.bounds).all(|(f, b)| f <= b)
    }
}

/// `4 exp(−t²/32)`.
pub fn subspace_tail_bound(t: f64) -> f64 {
    4.0 * (-t * t / 32.0).exp()
}

/// Orthonormal basis (as rows) of a uniformly random `q`-dimensional subspace
/// of the orthogonal complement of `avoid` (a unit vector).
fn random_subspace(n: usize, q: usize, avoid: ArrayView1<'_, f64>, rng: &mut impl rand::Rng) -> Array2<f64> {
    let mut basis = Array2::<f64>::zeros((q, n));
    let mut k = 0;
    while k < q {
        let mut v: Array1<f64> = Array1::from_shape_simple_fn(n, || rng.sample(StandardNormal));
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            let a = avoid.dot(&v);
            v.scaled_add(-a, &avoid);
            let done = basis.slice(s![..k, ..]);
            let coeffs = done.dot(&v);
            v -= &done.t().dot(&coeffs);
        }
        let norm = v.dot(&v).sqrt();
        if norm < 1e-8 {
            continue;
        }
        basis.row_mut(k).assign(&(v / norm));
        k += 1;
    }
    basis
}

/// Monte Carlo tail frequencies of `|‖π_H(y)‖ − σ√q|`.
///
/// `H` is drawn uniformly among `q`-dimensional subspaces orthogonal to the
/// mean vector, so `π_H(E y) = 0`. Each subspace serves
/// `trials_per_subspace` consecutive draws of `y`; block `b` uses seed
/// `derive_seed(seed, b)`.
pub fn subspace_distance_experiment(exp: &SubspaceExperiment) -> Result<TailFrequencyReport> {
    let SubspaceExperiment { n, q, law, trials, trials_per_subspace, seed, .. } = *exp;
    law.validate()?;
    let variance = law.variance();
    let required = (64.0 / variance).ceil() as usize;
    if q < required {
        return Err(Error::HypothesisViolation(format!(
            "q = {q} is below the required minimum 64/σ² = {required}"
        )));
    }
    if q >= n {
        return Err(argument(format!("q = {q} must be smaller than n = {n}")));
    }
    if trials == 0 || trials_per_subspace == 0 {
        return Err(argument("trials and trials_per_subspace must be positive"));
    }
    let mut thresholds = exp.thresholds.clone();
    if thresholds.is_empty() || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(argument("threshold grid must be non-empty and finite"));
    }
    thresholds.sort_unstable_by(f64::total_cmp);

    let centre = (variance * q as f64).sqrt();
    let avoid = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    let mut counts = vec![0usize; thresholds.len()];
    let mut distance_sum = 0.0;
    let blocks = trials.div_ceil(trials_per_subspace);
    let mut y = Array1::<f64>::zeros(n);
    for b in 0..blocks {
        let mut rng = seeded(derive_seed(seed, b as u64));
        let basis = random_subspace(n, q, avoid.view(), &mut rng);
        let draws = trials_per_subspace.min(trials - b * trials_per_subspace);
        for _ in 0..draws {
            y.mapv_inplace(|_| law.sample(&mut rng));
            let p = basis.dot(&y);
            let dist = p.dot(&p).sqrt();
            distance_sum += dist;
            let dev = (dist - centre).abs();
            for (c, &t) in counts.iter_mut().zip(&thresholds) {
                if dev >= t {
                    *c += 1;
                }
            }
        }
    }
    let tf = trials as f64;
    Ok(TailFrequencyReport {
        n,
        q,
        variance,
        trials,
        subspaces: blocks,
        seed,
        frequencies: counts.iter().map(|&c| c as f64 / tf).collect(),
        bounds: thresholds.iter().map(|&t| subspace_tail_bound(t)).collect(),
        thresholds,
        mean_distance: distance_sum / tf,
    })
}
