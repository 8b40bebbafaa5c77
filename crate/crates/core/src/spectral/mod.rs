//! Symmetric eigendecomposition, optimal rank-`d` truncation and per-rank
//! error sweeps.
//!
//! Eigenvalues are ordered descending algebraically. For positive
//! semi-definite kernel matrices that coincides with ordering by magnitude up
//! to round-off; when a matrix has genuinely negative eigenvalues the
//! truncation keeps the algebraically largest ones, which is not the
//! Frobenius-optimal choice. The spectral error reported by [`error_sweep`]
//! always uses the largest-magnitude discarded eigenvalue.

mod solver;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{argument, Error, Result};
use solver::Tridiagonal;

pub use solver::MAX_SWEEPS;

/// Eigenvalues `λ_1 ≥ … ≥ λ_n` with orthonormal eigenvectors.
///
/// All `n` eigenvalues are always present. The eigenvectors may cover only
/// the leading `m ≤ n` eigenvalues (see [`leading_eigenpairs`]); operations
/// that need trailing eigenvectors fail on such a partial decomposition.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Array1<f64>,
    /// Row `l` is the eigenvector paired with `eigenvalues[l]`.
    basis: Array2<f64>,
}

impl EigenDecomposition {
    /// Builds a decomposition from eigenvalues and eigenvectors stored as
    /// columns. Pairs are sorted descending and the sign convention applied.
    pub fn from_parts(eigenvalues: Array1<f64>, eigenvectors: ArrayView2<'_, f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(argument(format!(
                "expected {n}x{n} eigenvectors, got {:?}",
                eigenvectors.dim()
            )));
        }
        let basis = eigenvectors.t().as_standard_layout().into_owned();
        let (values, basis) = sorted_pairs(eigenvalues.to_vec(), basis.into_raw_vec_and_offset().0, n, n);
        Ok(EigenDecomposition {
            eigenvalues: Array1::from(values),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvectors held, counted from the largest eigenvalue.
    pub fn vector_count(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_complete(&self) -> bool {
        self.vector_count() == self.dim()
    }

    pub fn eigenvalues(&self) -> ArrayView1<'_, f64> {
        self.eigenvalues.view()
    }

    /// Eigenvectors as columns, `n x m`.
    pub fn eigenvectors(&self) -> ArrayView2<'_, f64> {
        self.basis.t()
    }

    /// Eigenvector `l` (zero-based), paired with `eigenvalues()[l]`.
    pub fn eigenvector(&self, l: usize) -> ArrayView1<'_, f64> {
        self.basis.row(l)
    }
}

/// Sorts pairs by descending eigenvalue and makes the largest-magnitude
/// coordinate of each vector positive (lowest index on ties).
fn sorted_pairs(values: Vec<f64>, rows: Vec<f64>, m: usize, n: usize) -> (Vec<f64>, Array2<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut basis = Array2::<f64>::zeros((m, n));
    for (dst, &src) in order.iter().take(m).enumerate() {
        let row = &rows[src * n..(src + 1) * n];
        let flip = sign_flip(row);
        basis
            .row_mut(dst)
            .iter_mut()
            .zip(row)
            .for_each(|(d, &s)| *d = if flip { -s } else { s });
    }
    (sorted, basis)
}

fn sign_flip(v: &[f64]) -> bool {
    let mut best = 0.0;
    let mut sign = false;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = x < 0.0;
        }
    }
    sign
}

fn checked_buffer(matrix: ArrayView2<'_, f64>) -> Result<(Vec<f64>, usize)> {
    let (n, m) = matrix.dim();
    if n != m {
        return Err(argument(format!("matrix must be square, got {n}x{m}")));
    }
    if n == 0 {
        return Err(argument("matrix is empty"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(argument("matrix has non-finite entries"));
    }
    let scale = max_abs(matrix);
    for i in 0..n {
        for j in 0..i {
            if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-10 * scale {
                return Err(argument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let buffer = matrix.as_standard_layout().into_owned().into_raw_vec_and_offset().0;
    Ok((buffer, n))
}

/// Full eigendecomposition of a symmetric matrix (lower triangle referenced).
pub fn eigendecompose(matrix: ArrayView2<'_, f64>) -> Result<EigenDecomposition> {
    let (a, n) = checked_buffer(matrix)?;
    let (values, rows) = Tridiagonal::reduce(a, n).full()?;
    let (values, basis) = sorted_pairs(values, rows, n, n);
    Ok(EigenDecomposition {
        eigenvalues: Array1::from(values),
        basis,
    })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(matrix: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    let (a, n) = checked_buffer(matrix)?;
    let mut values = Tridiagonal::reduce(a, n).eigenvalues()?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(Array1::from(values))
}

/// All eigenvalues plus eigenvectors for the `k` largest, computed by inverse
/// iteration on the tridiagonal form. Intended for well-separated leading
/// eigenvalues; nearly equal eigenvalues are re-orthogonalised against each
/// other.
pub fn leading_eigenpairs(matrix: ArrayView2<'_, f64>, k: usize) -> Result<EigenDecomposition> {
    let (a, n) = checked_buffer(matrix)?;
    if k > n {
        return Err(argument(format!("requested {k} eigenvectors of a {n}x{n} matrix")));
    }
    let tri = Tridiagonal::reduce(a, n);
    if k == n {
        let (values, rows) = tri.full()?;
        let (values, basis) = sorted_pairs(values, rows, n, n);
        return Ok(EigenDecomposition {
            eigenvalues: Array1::from(values),
            basis,
        });
    }
    let (values, rows) = tri.leading(k)?;
    let mut basis = Array2::<f64>::zeros((k, n));
    for l in 0..k {
        let row = &rows[l * n..(l + 1) * n];
        let flip = sign_flip(row);
        basis
            .row_mut(l)
            .iter_mut()
            .zip(row)
            .for_each(|(d, &s)| *d = if flip { -s } else { s });
    }
    Ok(EigenDecomposition {
        eigenvalues: Array1::from(values),
        basis,
    })
}

fn check_rank(eig: &EigenDecomposition, d: usize) -> Result<()> {
    if d > eig.dim() {
        return Err(argument(format!("rank {d} exceeds dimension {}", eig.dim())));
    }
    Ok(())
}

fn check_vectors(eig: &EigenDecomposition, upto: usize) -> Result<()> {
    if upto > eig.vector_count() {
        return Err(Error::Capability(format!(
            "needs {upto} eigenvectors, decomposition holds {}",
            eig.vector_count()
        )));
    }
    Ok(())
}

/// `Σ_{l ≤ d} λ_l u_l u_lᵀ`.
pub fn truncate(eig: &EigenDecomposition, d: usize) -> Result<Array2<f64>> {
    check_rank(eig, d)?;
    check_vectors(eig, d)?;
    let n = eig.dim();
    let mut out = Array2::<f64>::zeros((n, n));
    for l in 0..d {
        rank_one_update(&mut out, eig.eigenvector(l), eig.eigenvalues[l]);
    }
    Ok(out)
}

/// Rank-`d` approximation keeping the `d` largest-magnitude eigenvalues,
/// which is Frobenius- and spectral-norm optimal for any symmetric matrix.
/// Coincides with [`truncate`] when the discarded eigenvalues are
/// non-negative; differs on indefinite matrices.
pub fn best_rank_approximation(eig: &EigenDecomposition, d: usize) -> Result<Array2<f64>> {
    check_rank(eig, d)?;
    check_vectors(eig, eig.dim())?;
    let n = eig.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let mut out = Array2::<f64>::zeros((n, n));
    for &l in &order[..d] {
        rank_one_update(&mut out, eig.eigenvector(l), eig.eigenvalues[l]);
    }
    Ok(out)
}

/// `a += scale · u uᵀ`, symmetric.
fn rank_one_update(a: &mut Array2<f64>, u: ArrayView1<'_, f64>, scale: f64) {
    let n = u.len();
    let u: Vec<f64> = u.to_vec();
    let buf = a.as_slice_mut().expect("standard layout");
    for i in 0..n {
        let s = scale * u[i];
        let row = &mut buf[i * n..(i + 1) * n];
        row.iter_mut().zip(&u).for_each(|(x, &uj)| *x += s * uj);
    }
}

/// `Σ_{l > d} |λ_l|`.
pub fn tail_abs_sum(eig: &EigenDecomposition, d: usize) -> Result<f64> {
    check_rank(eig, d)?;
    Ok(eig.eigenvalues.iter().skip(d).map(|v| v.abs()).sum())
}

/// `max_{l > d} ‖u_l‖_∞`.
pub fn sup_norm_tail(eig: &EigenDecomposition, d: usize) -> Result<f64> {
    let n = eig.dim();
    if d >= n {
        return Err(argument(format!("empty tail: d = {d}, n = {n}")));
    }
    check_vectors(eig, n)?;
    Ok(eig
        .basis
        .rows()
        .into_iter()
        .skip(d)
        .map(|row| row.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max))
}

/// Errors of the rank-`d` truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankErrors {
    pub rank: usize,
    /// `‖K − K_d‖_max`.
    pub max_entry_error: f64,
    /// `‖K − K_d‖_F`, evaluated as `sqrt(Σ_{l>d} λ_l²)`.
    pub frobenius_error: f64,
    /// Largest-magnitude discarded eigenvalue.
    pub spectral_error: f64,
    pub tail_abs_sum: f64,
    /// `max_{l>d} ‖u_l‖_∞`; `None` when trailing eigenvectors were not
    /// computed, `0` at `d = n`.
    pub sup_norm: Option<f64>,
}

impl RankErrors {
    /// `Σ_{l>d} |λ_l| · (max_{l>d} ‖u_l‖_∞)²`, the bound on the max-entry error.
    pub fn entrywise_bound(&self) -> Option<f64> {
        self.sup_norm.map(|s| self.tail_abs_sum * s * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSweepResult {
    pub n: usize,
    pub rows: Vec<RankErrors>,
}

impl RankSweepResult {
    pub fn ranks(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.rank).collect()
    }

    pub fn at_rank(&self, d: usize) -> Option<&RankErrors> {
        self.rows.iter().find(|r| r.rank == d)
    }
}

/// Residual norms of the truncation at each requested rank.
///
/// The residual `R_d = R_{d-1} − λ_d u_d u_dᵀ` is updated in place, starting
/// from `R_0 = K`, so the whole sweep costs `O(n² · max rank)`. The ranks
/// must be ascending and at most the number of stored eigenvectors.
pub fn error_sweep(
    matrix: ArrayView2<'_, f64>,
    eig: &EigenDecomposition,
    ranks: &[usize],
) -> Result<RankSweepResult> {
    let n = eig.dim();
    if matrix.dim() != (n, n) {
        return Err(argument(format!(
            "matrix is {:?} but decomposition has dimension {n}",
            matrix.dim()
        )));
    }
    if ranks.windows(2).any(|w| w[0] > w[1]) {
        return Err(argument("ranks must be sorted ascending"));
    }
    if let Some(&top) = ranks.last() {
        check_rank(eig, top)?;
        check_vectors(eig, top)?;
    }

    let values = eig.eigenvalues.as_slice().expect("contiguous");
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let complete = eig.is_complete();

    let mut residual = matrix.as_standard_layout().into_owned();
    let mut applied = 0;
    let mut rows = Vec::with_capacity(ranks.len());
    for &d in ranks {
        while applied < d {
            rank_one_update(&mut residual, eig.eigenvector(applied), -values[applied]);
            applied += 1;
        }
        let max_entry_error = if d == n {
            0.0
        } else {
            residual.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
        };
        let frobenius_error = squares[d..].iter().sum::<f64>().sqrt();
        let spectral_error = if d == n {
            0.0
        } else {
            values[d].abs().max(values[n - 1].abs())
        };
        let sup_norm = if d == n {
            Some(0.0)
        } else if complete {
            Some(sup_norm_tail(eig, d)?)
        } else {
            None
        };
        rows.push(RankErrors {
            rank: d,
            max_entry_error,
            frobenius_error,
            spectral_error,
            tail_abs_sum: tail_abs_sum(eig, d)?,
            sup_norm,
        });
    }
    Ok(RankSweepResult { n, rows })
}

/// `‖A‖_max`.
pub fn max_abs(matrix: ArrayView2<'_, f64>) -> f64 {
    matrix.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn two_by_two_by_hand() {
        let k = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = eigendecompose(k.view()).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues()[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues()[1], 1.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Sign convention: largest-magnitude coordinate positive, lowest index on ties.
        assert_abs_diff_eq!(eig.eigenvector(0)[0], s, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvector(0)[1], s, epsilon = 1e-14);
        assert!(eig.eigenvector(1)[0] * eig.eigenvector(1)[1] < 0.0);
        assert!(eig.eigenvector(1)[0].abs() >= eig.eigenvector(1)[1].abs() - 1e-15);
    }

    #[test]
    fn diagonal_with_negative_entry() {
        let k = array![[5.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, -1.0]];
        let eig = eigendecompose(k.view()).unwrap();
        assert_eq!(eig.eigenvalues().to_vec(), vec![5.0, 2.0, -1.0]);
        for l in 0..3 {
            for i in 0..3 {
                let e = if i == l { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(eig.eigenvector(l)[i], e, epsilon = 1e-15);
            }
        }
        assert_eq!(tail_abs_sum(&eig, 1).unwrap(), 3.0);
        assert_eq!(tail_abs_sum(&eig, 3).unwrap(), 0.0);
        assert!(tail_abs_sum(&eig, 4).is_err());
    }

    #[test]
    fn identity_has_unit_spectrum_and_localised_vectors() {
        let eye = Array2::<f64>::eye(6);
        let eig = eigendecompose(eye.view()).unwrap();
        assert!(eig.eigenvalues().iter().all(|&v| v == 1.0));
        for d in 0..6 {
            assert_eq!(sup_norm_tail(&eig, d).unwrap(), 1.0);
        }
        assert!(sup_norm_tail(&eig, 6).is_err());
    }

    #[test]
    fn one_by_one() {
        let eig = eigendecompose(array![[0.7]].view()).unwrap();
        assert_eq!(eig.eigenvalues()[0], 0.7);
        assert_eq!(sup_norm_tail(&eig, 0).unwrap(), 1.0);
    }

    #[test]
    fn truncate_rank_one_by_hand() {
        let k = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = eigendecompose(k.view()).unwrap();
        let k1 = truncate(&eig, 1).unwrap();
        for v in k1.iter() {
            assert_abs_diff_eq!(*v, 1.5, epsilon = 1e-14);
        }
        assert_eq!(truncate(&eig, 0).unwrap(), Array2::<f64>::zeros((2, 2)));
        assert!(truncate(&eig, 3).is_err());
        let full = truncate(&eig, 2).unwrap();
        for (a, b) in full.iter().zip(k.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn sweep_two_by_two_by_hand() {
        let k = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = eigendecompose(k.view()).unwrap();
        let sweep = error_sweep(k.view(), &eig, &[0, 1, 2]).unwrap();
        let r0 = sweep.at_rank(0).unwrap();
        assert_abs_diff_eq!(r0.frobenius_error, 10f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(r0.max_entry_error, 2.0, epsilon = 1e-14);
        let r1 = sweep.at_rank(1).unwrap();
        assert_abs_diff_eq!(r1.max_entry_error, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r1.frobenius_error, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r1.spectral_error, 1.0, epsilon = 1e-14);
        let r2 = sweep.at_rank(2).unwrap();
        assert_eq!(
            (r2.max_entry_error, r2.frobenius_error, r2.spectral_error),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn sweep_rejects_bad_ranks() {
        let k = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = eigendecompose(k.view()).unwrap();
        assert!(error_sweep(k.view(), &eig, &[1, 0]).is_err());
        assert!(error_sweep(k.view(), &eig, &[0, 3]).is_err());
    }

    #[test]
    fn rejects_asymmetric_or_non_square() {
        assert!(eigendecompose(array![[1.0, 2.0], [0.0, 1.0]].view()).is_err());
        assert!(eigendecompose(Array2::<f64>::zeros((2, 3)).view()).is_err());
        assert!(eigendecompose(array![[f64::NAN]].view()).is_err());
    }

    #[test]
    fn partial_decomposition_limits() {
        let k = array![[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]];
        let part = leading_eigenpairs(k.view(), 1).unwrap();
        let full = eigendecompose(k.view()).unwrap();
        assert_eq!(part.vector_count(), 1);
        for (a, b) in part.eigenvalues().iter().zip(full.eigenvalues()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        for i in 0..3 {
            assert_abs_diff_eq!(part.eigenvector(0)[i], full.eigenvector(0)[i], epsilon = 1e-12);
        }
        assert!(matches!(truncate(&part, 2), Err(Error::Capability(_))));
        assert!(matches!(sup_norm_tail(&part, 0), Err(Error::Capability(_))));
        let sweep = error_sweep(k.view(), &part, &[0, 1]).unwrap();
        assert!(sweep.rows.iter().all(|r| r.sup_norm.is_none()));
    }
}
