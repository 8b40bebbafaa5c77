//! Kernel functions, bandwidth selection and Gram matrix construction.

use std::fmt;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{argument, Error, Result};

/// Half-integer Matérn smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaternSmoothness {
    /// ν = 1/2, the exponential kernel.
    Half,
    /// ν = 3/2.
    ThreeHalves,
    /// ν = 5/2.
    FiveHalves,
}

impl MaternSmoothness {
    pub fn nu(self) -> f64 {
        match self {
            MaternSmoothness::Half => 0.5,
            MaternSmoothness::ThreeHalves => 1.5,
            MaternSmoothness::FiveHalves => 2.5,
        }
    }

    pub fn from_nu(nu: f64) -> Result<Self> {
        match nu {
            0.5 => Ok(MaternSmoothness::Half),
            1.5 => Ok(MaternSmoothness::ThreeHalves),
            2.5 => Ok(MaternSmoothness::FiveHalves),
            other => Err(argument(format!(
                "Matérn smoothness must be 1/2, 3/2 or 5/2, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Matern(MaternSmoothness),
    /// Squared-exponential kernel, the ν → ∞ Matérn limit.
    Rbf,
    /// `f(<x, y>)` with a finite power series `f`.
    DotProduct,
}

/// A kernel family with validated parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    bandwidth: f64,
    coefficients: Vec<f64>,
}

impl KernelSpec {
    pub fn matern(smoothness: MaternSmoothness, bandwidth: f64) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        Ok(KernelSpec {
            family: KernelFamily::Matern(smoothness),
            bandwidth,
            coefficients: Vec::new(),
        })
    }

    pub fn rbf(bandwidth: f64) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        Ok(KernelSpec {
            family: KernelFamily::Rbf,
            bandwidth,
            coefficients: Vec::new(),
        })
    }

    /// Dot-product kernel `Σ_i b_i <x, y>^i`. All coefficients must be
    /// nonnegative, which keeps the kernel positive definite on the sphere.
    pub fn dot_product(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(argument("dot-product kernel needs at least one coefficient"));
        }
        if let Some((i, b)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || **b < 0.0)
        {
            return Err(argument(format!(
                "dot-product coefficient b_{i} = {b} must be finite and nonnegative"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::DotProduct,
            bandwidth: f64::NAN,
            coefficients,
        })
    }

    /// Same family with a different bandwidth. Fails for dot-product kernels.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        match self.family {
            KernelFamily::Matern(s) => KernelSpec::matern(s, bandwidth),
            KernelFamily::Rbf => KernelSpec::rbf(bandwidth),
            KernelFamily::DotProduct => Err(argument("dot-product kernels have no bandwidth")),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> Option<f64> {
        match self.family {
            KernelFamily::DotProduct => None,
            _ => Some(self.bandwidth),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Short identifier used in file names and plot legends.
    pub fn label(&self) -> &'static str {
        match self.family {
            KernelFamily::Matern(MaternSmoothness::Half) => "matern12",
            KernelFamily::Matern(MaternSmoothness::ThreeHalves) => "matern32",
            KernelFamily::Matern(MaternSmoothness::FiveHalves) => "matern52",
            KernelFamily::Rbf => "rbf",
            KernelFamily::DotProduct => "dot_product",
        }
    }

    /// Kernel value as a function of the Euclidean distance, for radial kernels.
    pub fn radial(&self, r: f64) -> Option<f64> {
        let w = self.bandwidth;
        let value = match self.family {
            KernelFamily::Matern(MaternSmoothness::Half) => (-r / w).exp(),
            KernelFamily::Matern(MaternSmoothness::ThreeHalves) => {
                let s = 3f64.sqrt() * r / w;
                (1.0 + s) * (-s).exp()
            }
            KernelFamily::Matern(MaternSmoothness::FiveHalves) => {
                let s = 5f64.sqrt() * r / w;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelFamily::Rbf => (-r * r / (2.0 * w * w)).exp(),
            KernelFamily::DotProduct => return None,
        };
        Some(value)
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::DotProduct => {
                let t: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                self.coefficients.iter().rev().fold(0.0, |acc, b| acc * t + b)
            }
            _ => {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                self.radial(r2.sqrt()).unwrap_or(f64::NAN)
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bandwidth() {
            Some(w) => write!(f, "{}(ω={w})", self.label()),
            None => write!(f, "{}({:?})", self.label(), self.coefficients),
        }
    }
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if bandwidth.is_finite() && bandwidth > 0.0 {
        Ok(())
    } else {
        Err(argument(format!("bandwidth must be positive and finite, got {bandwidth}")))
    }
}

/// `n` observations in `p` dimensions, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
}

impl Dataset {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, p) = points.dim();
        if n == 0 || p == 0 {
            return Err(argument(format!("dataset must be non-empty, got {n}x{p}")));
        }
        if let Some(((i, j), v)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(argument(format!("non-finite value {v} at row {i}, column {j}")));
        }
        Ok(Dataset {
            points: points.as_standard_layout().into_owned(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return Err(argument(format!(
                "row {i} has {} values, expected {p}",
                rows[i].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), p), flat)
            .map_err(|e| argument(e.to_string()))?;
        Dataset::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn p(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.p();
        &self.points.as_slice().expect("standard layout")[i * p..(i + 1) * p]
    }

    pub fn into_points(self) -> Array2<f64> {
        self.points
    }
}

/// Symmetric matrix of pairwise kernel evaluations.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: Array2<f64>,
    kernel: KernelSpec,
}

impl GramMatrix {
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// Evaluates `k(x, y)`.
pub fn evaluate(kernel: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(argument(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(argument("non-finite kernel argument"));
    }
    Ok(kernel.eval_unchecked(x, y))
}

/// Builds `K(i, j) = k(x_i, x_j)`. Each unordered pair is evaluated once and
/// mirrored, so the result is symmetric bit for bit.
pub fn gram_matrix(kernel: &KernelSpec, data: &Dataset) -> Result<GramMatrix> {
    let n = data.n();
    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let xi = data.row(i);
        for j in 0..=i {
            let v = kernel.eval_unchecked(xi, data.row(j));
            if !v.is_finite() {
                return Err(argument(format!("kernel value at ({i}, {j}) is not finite")));
            }
            values[[i, j]] = v;
            values[[j, i]] = v;
        }
    }
    Ok(GramMatrix {
        values,
        kernel: kernel.clone(),
    })
}

/// Median of the `n(n-1)/2` pairwise Euclidean distances. An even count
/// averages the two central order statistics.
pub fn median_heuristic(data: &Dataset) -> Result<f64> {
    let n = data.n();
    if n < 2 {
        return Err(argument("median heuristic needs at least two points"));
    }
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let xi = data.row(i);
        for j in 0..i {
            let d2: f64 = xi
                .iter()
                .zip(data.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            distances.push(d2.sqrt());
        }
    }
    let m = distances.len();
    let upper = m / 2;
    let (lower_part, hi, _) = distances.select_nth_unstable_by(upper, f64::total_cmp);
    let hi = *hi;
    let median = if m % 2 == 1 {
        hi
    } else {
        let lo = lower_part.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    };
    if median <= 0.0 {
        return Err(Error::DegenerateData(
            "median pairwise distance is zero".to_string(),
        ));
    }
    Ok(median)
}

/// Centres every column and rescales it to unit sample variance (divisor `n - 1`).
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let n = data.n();
    if n < 2 {
        return Err(argument("standardization needs at least two rows"));
    }
    let mut points = data.points().to_owned();
    for (j, mut column) in points.axis_iter_mut(Axis(1)).enumerate() {
        let mean = column.sum() / n as f64;
        let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var <= 0.0 {
            return Err(Error::DegenerateData(format!(
                "column {j} has zero variance"
            )));
        }
        let sd = var.sqrt();
        column.mapv_inplace(|v| (v - mean) / sd);
    }
    Dataset::new(points)
}
