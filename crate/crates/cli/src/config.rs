//! JSON experiment configuration. Every field is optional; the defaults
//! reproduce the synthetic GMM experiment with the Matérn grid and the median
//! heuristic.

use std::path::{Path, PathBuf};

use kernel_lowrank::datasets::{
    gaussian_synthetic, gmm_synthetic, load_csv, sphere_uniform, ColumnSelection, CsvOptions,
    GmmSpec,
};
use kernel_lowrank::kernels::{median_heuristic, standardize, Dataset, KernelSpec, MaternSmoothness};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub standardize: bool,
    pub kernels: Vec<KernelConfig>,
    pub bandwidth: BandwidthPolicy,
    pub ranks: RankGrid,
    pub jl_trials: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig::default(),
            standardize: false,
            kernels: vec![
                KernelConfig::Matern { nu: 0.5 },
                KernelConfig::Matern { nu: 1.5 },
                KernelConfig::Matern { nu: 2.5 },
                KernelConfig::Rbf,
            ],
            bandwidth: BandwidthPolicy::MedianHeuristic,
            ranks: RankGrid::Auto,
            jl_trials: 50,
            output_dir: PathBuf::from("results"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Gmm {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_p")]
        p: usize,
        #[serde(default = "default_p")]
        k: usize,
        #[serde(default = "default_mean")]
        mean_magnitude: f64,
    },
    Gaussian {
        n: usize,
        p: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Sphere {
        n: usize,
        p: usize,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        columns: Option<Vec<usize>>,
    },
}

fn default_n() -> usize {
    1000
}
fn default_p() -> usize {
    10
}
fn default_mean() -> f64 {
    10.0
}
fn default_sigma() -> f64 {
    1.0
}
fn default_delimiter() -> char {
    ','
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Gmm {
            n: default_n(),
            p: default_p(),
            k: default_p(),
            mean_magnitude: default_mean(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Matern { nu: f64 },
    Rbf,
    DotProduct { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthPolicy {
    MedianHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankGrid {
    Auto,
    Explicit(Vec<usize>),
}

impl<'de> Deserialize<'de> for RankGrid {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<usize>),
        }
        match Raw::deserialize(de)? {
            Raw::Word(w) if w == "auto" => Ok(RankGrid::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "ranks must be \"auto\" or a list, got {w:?}"
            ))),
            Raw::List(v) => Ok(RankGrid::Explicit(v)),
        }
    }
}

impl std::str::FromStr for RankGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "auto" {
            return Ok(RankGrid::Auto);
        }
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad rank {t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(RankGrid::Explicit)
    }
}

/// Geometric grid of 30 points from 1 to `n`, plus 0 and `n`, deduplicated.
pub fn auto_ranks(n: usize) -> Vec<usize> {
    let mut ranks = vec![0, n];
    if n >= 1 {
        let top = (n as f64).ln();
        for k in 0..30 {
            let r = (top * k as f64 / 29.0).exp().round() as usize;
            ranks.push(r.clamp(1, n));
        }
    }
    ranks.sort_unstable();
    ranks.dedup();
    ranks
}

impl RankGrid {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>, CliError> {
        let mut ranks = match self {
            RankGrid::Auto => auto_ranks(n),
            RankGrid::Explicit(v) => v.clone(),
        };
        if ranks.is_empty() {
            return Err(CliError::Usage("rank grid is empty".into()));
        }
        if let Some(&r) = ranks.iter().find(|&&r| r > n) {
            return Err(CliError::Usage(format!("rank {r} exceeds n = {n}")));
        }
        ranks.sort_unstable();
        ranks.dedup();
        Ok(ranks)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn dataset(&self) -> Result<Dataset, CliError> {
        let data = match &self.dataset {
            DatasetConfig::Gmm { n, p, k, mean_magnitude } => gmm_synthetic(&GmmSpec {
                n: *n,
                p: *p,
                k: *k,
                mean_magnitude: *mean_magnitude,
                seed: self.seed,
            }),
            DatasetConfig::Gaussian { n, p, sigma } => gaussian_synthetic(*n, *p, *sigma, self.seed),
            DatasetConfig::Sphere { n, p } => sphere_uniform(*n, *p, self.seed),
            DatasetConfig::Csv { path, delimiter, has_header, columns } => {
                if !delimiter.is_ascii() {
                    return Err(CliError::Usage(format!("delimiter {delimiter:?} is not ASCII")));
                }
                let options = CsvOptions {
                    delimiter: *delimiter as u8,
                    has_header: *has_header,
                    columns: columns.clone().map_or(ColumnSelection::All, ColumnSelection::Indices),
                };
                load_csv(path, &options)
            }
        }
        .map_err(|e| CliError::from_library("loading data", e))?;
        if self.standardize {
            standardize(&data).map_err(|e| CliError::from_library("standardizing", e))
        } else {
            Ok(data)
        }
    }

    pub fn kernels(&self, data: &Dataset) -> Result<Vec<KernelSpec>, CliError> {
        if self.kernels.is_empty() {
            return Err(CliError::Usage("config lists no kernels".into()));
        }
        let bandwidth = match self.bandwidth {
            BandwidthPolicy::Fixed(w) => w,
            BandwidthPolicy::MedianHeuristic => {
                median_heuristic(data).map_err(|e| CliError::from_library("median heuristic", e))?
            }
        };
        self.kernels
            .iter()
            .map(|k| {
                match k {
                    KernelConfig::Matern { nu } => MaternSmoothness::from_nu(*nu)
                        .and_then(|s| KernelSpec::matern(s, bandwidth)),
                    KernelConfig::Rbf => KernelSpec::rbf(bandwidth),
                    KernelConfig::DotProduct { coefficients } => {
                        KernelSpec::dot_product(coefficients.clone())
                    }
                }
                .map_err(|e| CliError::Usage(format!("kernel {k:?}: {e}")))
            })
            .collect()
    }
}
