//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit-shift QL
//! iteration. The reduction defers each rank-2 update to the next column's
//! sweep, so the trailing block is read and written once per column. Only the
//! lower triangle of the row-major input is referenced.
//!
//! Three entry points share the reduction:
//! - [`Tridiagonal::eigenvalues`]: values only, `O(n^2)` after reduction;
//! - [`Tridiagonal::full`]: all eigenpairs, rotations applied to rows of `Q^T`;
//! - [`Tridiagonal::leading`]: all values plus the leading eigenvectors by
//!   inverse iteration on the tridiagonal matrix.

use crate::error::{Error, Result};

/// QL iterations allowed per eigenvalue before reporting non-convergence.
pub const MAX_SWEEPS: usize = 30;

/// Tridiagonal form `Q^T A Q = T` with `Q` kept as Householder reflectors.
pub(crate) struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    off: Vec<f64>,
    /// Reflector `k` lives in column `k`, rows `k+1..n`, of this row-major buffer.
    reflectors: Vec<f64>,
    tau: Vec<f64>,
}

impl Tridiagonal {
    /// Reduces the symmetric row-major `n x n` matrix `a`.
    pub(crate) fn reduce(mut a: Vec<f64>, n: usize) -> Self {
        assert_eq!(a.len(), n * n);
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut tau = vec![0.0; n.saturating_sub(2)];

        // Deferred update A <- A - u w^T - w u^T on the current trailing block.
        let mut pu = vec![0.0; n];
        let mut pw = vec![0.0; n];
        let mut pending = false;
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];

        for k in 0..n {
            if pending {
                for i in k..n {
                    a[i * n + k] -= pu[i] * pw[k] + pw[i] * pu[k];
                }
            }
            diag[k] = a[k * n + k];
            if k + 1 >= n {
                break;
            }
            if k + 2 == n {
                off[k] = a[(k + 1) * n + k];
                continue;
            }

            let lo = k + 1;
            let x0 = a[lo * n + k];
            let scale = (lo..n).fold(0.0_f64, |m, i| m.max(a[i * n + k].abs()));
            let tail: f64 = if scale > 0.0 {
                (lo + 1..n)
                    .map(|i| (a[i * n + k] / scale).powi(2))
                    .sum::<f64>()
            } else {
                0.0
            };

            let reflect = tail > 0.0;
            if reflect {
                let norm = scale * ((x0 / scale).powi(2) + tail).sqrt();
                let beta = -norm.copysign(x0);
                tau[k] = (beta - x0) / beta;
                let inv = 1.0 / (x0 - beta);
                v[lo] = 1.0;
                a[lo * n + k] = 1.0;
                for i in lo + 1..n {
                    let vi = a[i * n + k] * inv;
                    v[i] = vi;
                    a[i * n + k] = vi;
                }
                off[k] = beta;
            } else {
                // Column already reduced; store a null reflector.
                tau[k] = 0.0;
                off[k] = x0;
                a[lo * n + k] = 1.0;
                for i in lo + 1..n {
                    a[i * n + k] = 0.0;
                }
            }

            if !pending && !reflect {
                continue;
            }

            p[lo..n].iter_mut().for_each(|x| *x = 0.0);
            for i in lo..n {
                let row = &mut a[i * n + lo..=i * n + i];
                let (row_off, diag_entry) = row.split_at_mut(i - lo);
                let span = lo..i;
                let (ui, wi, vi) = (pu[i], pw[i], v[i]);
                let mut acc = 0.0;
                if pending {
                    acc += sweep_row_pending(
                        row_off,
                        &pu[span.clone()],
                        &pw[span.clone()],
                        &v[span.clone()],
                        &mut p[span],
                        ui,
                        wi,
                        vi,
                        reflect,
                    );
                    diag_entry[0] -= 2.0 * ui * wi;
                } else {
                    acc += sweep_row(row_off, &v[span.clone()], &mut p[span], vi);
                }
                if reflect {
                    p[i] += acc + diag_entry[0] * vi;
                }
            }

            if reflect {
                let t = tau[k];
                let mut pv = 0.0;
                for i in lo..n {
                    p[i] *= t;
                    pv += p[i] * v[i];
                }
                let half = 0.5 * t * pv;
                for i in lo..n {
                    pu[i] = v[i];
                    pw[i] = p[i] - half * v[i];
                }
                pending = true;
            } else {
                pending = false;
            }
        }

        Tridiagonal {
            n,
            diag,
            off,
            reflectors: a,
            tau,
        }
    }

    pub(crate) fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, self.norm_bound(), None)?;
        Ok(d)
    }

    /// All eigenpairs. Returns the eigenvalues (unsorted) and a row-major
    /// `n x n` buffer whose row `l` is the eigenvector paired with value `l`.
    pub(crate) fn full(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let mut zt = self.accumulate_q();
        transpose_in_place(&mut zt, n);
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        implicit_ql(&mut d, &mut e, self.norm_bound(), Some((&mut zt, n)))?;
        Ok((d, zt))
    }

    /// All eigenvalues, sorted descending, plus the eigenvectors of the `k`
    /// largest as rows of a row-major `k x n` buffer.
    pub(crate) fn leading(&self, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let mut values = self.eigenvalues()?;
        values.sort_by(|a, b| b.total_cmp(a));
        let norm = self.norm_bound();
        let cluster_gap = 1e-3 * norm;
        let mut local: Vec<Vec<f64>> = Vec::with_capacity(k);
        for l in 0..k {
            let shift = values[l];
            let mut x: Vec<f64> = (0..n).map(|i| start_vector(i, l)).collect();
            normalize(&mut x);
            let lu = ShiftedLu::factor(&self.diag, &self.off, shift, norm);
            let neighbours: Vec<usize> = (0..l)
                .filter(|&j| (values[j] - shift).abs() < cluster_gap)
                .collect();
            for _ in 0..5 {
                lu.solve(&mut x);
                for &j in &neighbours {
                    let dot: f64 = x.iter().zip(&local[j]).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(&local[j]).for_each(|(a, b)| *a -= dot * b);
                }
                normalize(&mut x);
            }
            local.push(x);
        }

        let mut out = vec![0.0; k * n];
        for (l, x) in local.into_iter().enumerate() {
            let row = &mut out[l * n..(l + 1) * n];
            row.copy_from_slice(&x);
            self.apply_q(row);
        }
        Ok((values, out))
    }

    fn norm_bound(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }

    fn reflector_count(&self) -> usize {
        self.tau.len()
    }

    /// `x <- Q x` with `Q = H_0 H_1 ... H_{n-3}`.
    fn apply_q(&self, x: &mut [f64]) {
        let n = self.n;
        for k in (0..self.reflector_count()).rev() {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let dot: f64 = (k + 1..n).map(|i| self.reflectors[i * n + k] * x[i]).sum();
            let s = t * dot;
            for i in k + 1..n {
                x[i] -= s * self.reflectors[i * n + k];
            }
        }
    }

    /// Explicit `Q` as a row-major `n x n` buffer (backward accumulation).
    fn accumulate_q(&self) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        let mut r = vec![0.0; n];
        let mut v = vec![0.0; n];
        for k in (0..self.reflector_count()).rev() {
            let t = self.tau[k];
            if t == 0.0 {
                continue;
            }
            let lo = k + 1;
            for i in lo..n {
                v[i] = self.reflectors[i * n + k];
            }
            r[lo..n].iter_mut().for_each(|x| *x = 0.0);
            for i in lo..n {
                let vi = v[i];
                let row = &q[i * n + lo..i * n + n];
                r[lo..n].iter_mut().zip(row).for_each(|(acc, &m)| *acc += vi * m);
            }
            for i in lo..n {
                let s = t * v[i];
                let row = &mut q[i * n + lo..i * n + n];
                row.iter_mut().zip(&r[lo..n]).for_each(|(m, &rj)| *m -= s * rj);
            }
        }
        q
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn sweep_row_pending(
    row: &mut [f64],
    u: &[f64],
    w: &[f64],
    v: &[f64],
    p: &mut [f64],
    ui: f64,
    wi: f64,
    vi: f64,
    reflect: bool,
) -> f64 {
    if !reflect {
        for ((a, &uj), &wj) in row.iter_mut().zip(u).zip(w) {
            *a -= ui * wj + wi * uj;
        }
        return 0.0;
    }
    const LANES: usize = 4;
    let mut acc = [0.0; LANES];
    let len = row.len();
    let split = len - len % LANES;
    let (rh, rt) = row.split_at_mut(split);
    let (ph, pt) = p.split_at_mut(split);
    for ((((a, u), w), v), p) in rh
        .chunks_exact_mut(LANES)
        .zip(u.chunks_exact(LANES))
        .zip(w.chunks_exact(LANES))
        .zip(v.chunks_exact(LANES))
        .zip(ph.chunks_exact_mut(LANES))
    {
        for l in 0..LANES {
            let x = a[l] - (ui * w[l] + wi * u[l]);
            a[l] = x;
            acc[l] += x * v[l];
            p[l] += x * vi;
        }
    }
    let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (j, (a, p)) in rt.iter_mut().zip(pt.iter_mut()).enumerate() {
        let jj = split + j;
        let x = *a - (ui * w[jj] + wi * u[jj]);
        *a = x;
        total += x * v[jj];
        *p += x * vi;
    }
    total
}

#[inline]
fn sweep_row(row: &[f64], v: &[f64], p: &mut [f64], vi: f64) -> f64 {
    const LANES: usize = 4;
    let mut acc = [0.0; LANES];
    let len = row.len();
    let split = len - len % LANES;
    let (ph, pt) = p.split_at_mut(split);
    for ((a, v), p) in row[..split]
        .chunks_exact(LANES)
        .zip(v.chunks_exact(LANES))
        .zip(ph.chunks_exact_mut(LANES))
    {
        for l in 0..LANES {
            acc[l] += a[l] * v[l];
            p[l] += a[l] * vi;
        }
    }
    let mut total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (j, p) in pt.iter_mut().enumerate() {
        let jj = split + j;
        total += row[jj] * v[jj];
        *p += row[jj] * vi;
    }
    total
}

/// Implicit-shift QL on the symmetric tridiagonal `(d, e)`, `e[i]` coupling
/// `i` and `i + 1` and `e[n-1] = 0`. When `zt` is given, rotations are applied
/// to its rows so that row `l` tracks the eigenvector of `d[l]`.
///
/// An off-diagonal entry is dropped when it is negligible relative to its
/// neighbouring diagonal entries or to `norm`; the reduction is only
/// backward stable to `eps · ‖A‖`, so the absolute test loses nothing and
/// stops graded tails from stalling.
fn implicit_ql(
    d: &mut [f64],
    e: &mut [f64],
    norm: f64,
    mut zt: Option<(&mut Vec<f64>, usize)>,
) -> Result<()> {
    let n = d.len();
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: MAX_SWEEPS,
                    residual: e[l].abs(),
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some((z, n)) = zt.as_mut() {
                    rotate_rows(z, *n, i, s, c);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_rows(z: &mut [f64], n: usize, i: usize, s: f64, c: f64) {
    let (head, tail) = z.split_at_mut((i + 1) * n);
    let lower = &mut head[i * n..];
    let upper = &mut tail[..n];
    for (zi, zi1) in lower.iter_mut().zip(upper.iter_mut()) {
        let f = *zi1;
        *zi1 = s * *zi + c * f;
        *zi = c * *zi - s * f;
    }
}

fn transpose_in_place(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Deterministic, non-degenerate start vector for inverse iteration.
fn start_vector(i: usize, l: usize) -> f64 {
    let h = (i as u64 + 1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((l as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    let h = (h ^ (h >> 31)).wrapping_mul(0x94D0_49BB_1331_11EB);
    0.5 + ((h >> 11) as f64) / ((1u64 << 53) as f64)
}

/// LU factorisation with partial pivoting of `T - shift I`.
struct ShiftedLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, norm: f64) -> Self {
        let n = diag.len();
        let tiny = f64::EPSILON * norm;
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];

        // Current pivot-candidate row, entries at columns (i, i + 1).
        let mut a0 = diag[0] - shift;
        let mut a1 = if n > 1 { off[0] } else { 0.0 };
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a0.abs() < tiny { tiny } else { a0 };
                break;
            }
            let b0 = off[i];
            let b1 = diag[i + 1] - shift;
            let b2 = if i + 2 < n { off[i + 1] } else { 0.0 };
            if b0.abs() > a0.abs() {
                swapped[i] = true;
                u0[i] = b0;
                u1[i] = b1;
                u2[i] = b2;
                let m = a0 / b0;
                mult[i] = m;
                a0 = a1 - m * b1;
                a1 = -m * b2;
            } else {
                let piv = if a0.abs() < tiny { tiny } else { a0 };
                u0[i] = piv;
                u1[i] = a1;
                u2[i] = 0.0;
                let m = b0 / piv;
                mult[i] = m;
                a0 = b1 - m * a1;
                a1 = b2;
            }
        }
        ShiftedLu {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = f(i, j);
            }
        }
        a
    }

    fn test_matrix(n: usize) -> Vec<f64> {
        dense(n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            ((i + 1.0) * (j + 2.0)).sin() + if i == j { 0.5 * i } else { 0.0 }
        })
    }

    #[test]
    fn tridiagonal_preserves_trace_and_frobenius() {
        let n = 17;
        let a = test_matrix(n);
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let frob: f64 = a.iter().map(|x| x * x).sum();
        let t = Tridiagonal::reduce(a, n);
        let t_trace: f64 = t.diag.iter().sum();
        let t_frob: f64 = t.diag.iter().map(|x| x * x).sum::<f64>()
            + 2.0 * t.off.iter().map(|x| x * x).sum::<f64>();
        assert!((trace - t_trace).abs() < 1e-12 * frob.sqrt());
        assert!((frob - t_frob).abs() < 1e-12 * frob);
    }

    #[test]
    fn full_decomposition_satisfies_eigen_equation() {
        let n = 23;
        let a = test_matrix(n);
        let (values, zt) = Tridiagonal::reduce(a.clone(), n).full().unwrap();
        for l in 0..n {
            let z = &zt[l * n..(l + 1) * n];
            for i in 0..n {
                let az: f64 = (0..n).map(|j| a[i * n + j] * z[j]).sum();
                assert!((az - values[l] * z[i]).abs() < 1e-11, "pair {l} row {i}");
            }
        }
    }

    #[test]
    fn leading_vectors_match_full_decomposition() {
        let n = 30;
        let a = test_matrix(n);
        let tri = Tridiagonal::reduce(a.clone(), n);
        let (values, rows) = tri.leading(4).unwrap();
        for l in 0..4 {
            let z = &rows[l * n..(l + 1) * n];
            for i in 0..n {
                let az: f64 = (0..n).map(|j| a[i * n + j] * z[j]).sum();
                assert!((az - values[l] * z[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn already_tridiagonal_input_uses_null_reflectors() {
        let n = 6;
        let a = dense(n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let mut values = Tridiagonal::reduce(a, n).eigenvalues().unwrap();
        values.sort_by(|a, b| b.total_cmp(a));
        for (k, v) in values.iter().enumerate() {
            let j = (n - k) as f64;
            let expect = 2.0 - 2.0 * (j * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_solve_inverts_tridiagonal() {
        let diag = [4.0, -1.0, 0.5, 3.0, 2.0];
        let off = [1.0, 2.0, -0.7, 0.3];
        let shift = 0.25;
        let lu = ShiftedLu::factor(&diag, &off, shift, 10.0);
        let b = [1.0, -2.0, 0.5, 3.0, 1.5];
        let mut x = b;
        lu.solve(&mut x);
        for i in 0..5 {
            let mut r = (diag[i] - shift) * x[i];
            if i > 0 {
                r += off[i - 1] * x[i - 1];
            }
            if i + 1 < 5 {
                r += off[i] * x[i + 1];
            }
            assert!((r - b[i]).abs() < 1e-12);
        }
    }
}
