//! Synthetic data generators and CSV input/output.
//!
//! Generators are pure functions of their parameters and seed. Gaussian
//! variates come from `rand_distr::StandardNormal` (ziggurat) on a ChaCha8
//! stream, which is exact and platform independent.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{argument, Error, Result};
use crate::kernels::Dataset;
use crate::rng::seeded;

/// Gaussian mixture with unit isotropic components and means `μ₀·e_j` on the
/// first `k` axes, components chosen uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmSpec {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub mean_magnitude: f64,
    pub seed: u64,
}

impl Default for GmmSpec {
    fn default() -> Self {
        GmmSpec {
            n: 1000,
            p: 10,
            k: 10,
            mean_magnitude: 10.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticSpec {
    Gmm(GmmSpec),
    Gaussian { n: usize, p: usize, sigma: f64, seed: u64 },
    Sphere { n: usize, p: usize, seed: u64 },
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Dataset> {
        match *self {
            SyntheticSpec::Gmm(spec) => gmm_synthetic(&spec),
            SyntheticSpec::Gaussian { n, p, sigma, seed } => gaussian_synthetic(n, p, sigma, seed),
            SyntheticSpec::Sphere { n, p, seed } => sphere_uniform(n, p, seed),
        }
    }
}

fn check_shape(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(argument(format!("need n ≥ 1 and p ≥ 1, got n = {n}, p = {p}")));
    }
    Ok(())
}

pub fn gmm_synthetic(spec: &GmmSpec) -> Result<Dataset> {
    gmm_synthetic_labelled(spec).map(|(data, _)| data)
}

/// As [`gmm_synthetic`], also returning each point's component.
pub fn gmm_synthetic_labelled(spec: &GmmSpec) -> Result<(Dataset, Vec<usize>)> {
    check_shape(spec.n, spec.p)?;
    if spec.k == 0 || spec.k > spec.p {
        return Err(argument(format!(
            "component count k = {} must lie in 1..=p = {}",
            spec.k, spec.p
        )));
    }
    if !spec.mean_magnitude.is_finite() {
        return Err(argument("mean magnitude must be finite"));
    }
    let mut rng = seeded(spec.seed);
    let mut points = Array2::zeros((spec.n, spec.p));
    let mut labels = Vec::with_capacity(spec.n);
    for mut row in points.rows_mut() {
        let j = rng.random_range(0..spec.k);
        labels.push(j);
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        row[j] += spec.mean_magnitude;
    }
    Ok((Dataset::new(points)?, labels))
}

/// i.i.d. rows from `N(0, σ² I_p)`.
pub fn gaussian_synthetic(n: usize, p: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    check_shape(n, p)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(argument(format!("σ must be non-negative, got {sigma}")));
    }
    let mut rng = seeded(seed);
    let points = Array2::from_shape_simple_fn((n, p), || sigma * rng.sample::<f64, _>(StandardNormal));
    Dataset::new(points)
}

/// Uniform points on `S^{p-1}`: normalised standard Gaussian vectors.
pub fn sphere_uniform(n: usize, p: usize, seed: u64) -> Result<Dataset> {
    check_shape(n, p)?;
    if p < 2 {
        return Err(argument(format!("sphere sampling needs p ≥ 2, got {p}")));
    }
    let mut rng = seeded(seed);
    let mut points = Array2::zeros((n, p));
    for mut row in points.rows_mut() {
        loop {
            row.mapv_inplace(|_| rng.sample::<f64, _>(StandardNormal));
            let norm = row.dot(&row).sqrt();
            if norm > 1e-300 {
                row /= norm;
                break;
            }
        }
    }
    Dataset::new(points)
}

/// `count` rows chosen uniformly without replacement, in original order.
pub fn subsample(data: &Dataset, count: usize, seed: u64) -> Result<Dataset> {
    let n = data.n();
    if count == 0 || count > n {
        return Err(argument(format!("count must lie in 1..={n}, got {count}")));
    }
    let mut rows = index::sample(&mut seeded(seed), n, count).into_vec();
    rows.sort_unstable();
    Dataset::new(data.points().select(ndarray::Axis(0), &rows))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ColumnSelection {
    #[default]
    All,
    Indices(Vec<usize>),
    /// Header names; requires `has_header`.
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub columns: ColumnSelection,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: false,
            columns: ColumnSelection::All,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let selected: Option<Vec<usize>> = match &options.columns {
        ColumnSelection::All => None,
        ColumnSelection::Indices(ix) => {
            if ix.is_empty() {
                return Err(argument("column selection is empty"));
            }
            Some(ix.clone())
        }
        ColumnSelection::Names(names) => {
            if !options.has_header {
                return Err(argument("selecting columns by name requires a header"));
            }
            let header = reader
                .headers()
                .map_err(|e| parse_err(1, e.to_string()))?
                .clone();
            let ix = names
                .iter()
                .map(|name| {
                    header
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| parse_err(1, format!("no column named {name:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if ix.is_empty() {
                return Err(argument("column selection is empty"));
            }
            Some(ix)
        }
    };

    let mut width: Option<usize> = None;
    let mut flat = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    format!("ragged row: {} fields, expected {w}", record.len()),
                ));
            }
            Some(_) => {}
        }
        let mut push = |col: usize| -> Result<()> {
            let cell = record
                .get(col)
                .ok_or_else(|| parse_err(line, format!("column {col} out of range ({} fields)", record.len())))?;
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column {col}: non-numeric value {cell:?}")))?;
            flat.push(v);
            Ok(())
        };
        match &selected {
            None => (0..record.len()).try_for_each(&mut push)?,
            Some(ix) => ix.iter().copied().try_for_each(&mut push)?,
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::DegenerateData(format!("{} contains no data rows", path.display())));
    }
    let p = flat.len() / rows;
    let points = Array2::from_shape_vec((rows, p), flat).map_err(|e| argument(e.to_string()))?;
    Dataset::new(points)
}

/// Writes one row per point with 17 significant digits, which round-trips
/// every `f64` exactly.
pub fn save_csv(path: impl AsRef<Path>, data: &Dataset, header: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    if let Some(h) = header {
        if h.len() != data.p() {
            return Err(argument(format!("header has {} names for {} columns", h.len(), data.p())));
        }
        writeln!(out, "{}", h.join(",")).map_err(io)?;
    }
    for row in data.points().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}
