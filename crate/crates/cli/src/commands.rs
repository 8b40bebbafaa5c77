use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use kernel_lowrank::analytic::{
    required_rank, sphere_harmonic_count, sphere_rates, tensor_spectrum, theorem1_rate,
    DecayHypothesis, GaussianRbfSpectrum, SphereSpectrumParams, AnalyticSpectrum,
};
use kernel_lowrank::datasets::gaussian_synthetic;
use kernel_lowrank::kernels::{gram_matrix, KernelSpec};
use kernel_lowrank::random_projection::compare_with_decomposition;
use kernel_lowrank::rng::derive_seed;
use kernel_lowrank::spectral::{self, eigendecompose, error_sweep};
use kernel_lowrank::verification::{
    delocalisation_report, eigenvalue_deviation_report, interlacing_check, minor_identity_check,
    subspace_distance_experiment, EntryLaw, MinorDecomposition, SubspaceExperiment,
};
use ndarray::Array2;

use crate::config::ExperimentConfig;
use crate::error::{io_error, CliError};
use crate::output::{line_plot_svg, num, Series, Table};

fn lib<T>(stage: &str, r: kernel_lowrank::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from_library(stage, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// File stems `<prefix>_<label>`, suffixed `_2`, `_3`, … on repeats.
fn stems(prefix: &str, kernels: &[KernelSpec]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    kernels
        .iter()
        .map(|k| {
            let count = seen.entry(k.label()).or_insert(0);
            *count += 1;
            if *count == 1 {
                format!("{prefix}_{}", k.label())
            } else {
                format!("{prefix}_{}_{count}", k.label())
            }
        })
        .collect()
}

pub fn sweep(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let data = config.dataset()?;
    let kernels = config.kernels(&data)?;
    let ranks = config.ranks.resolve(data.n())?;
    ensure_dir(out)?;
    let mut written = Vec::new();
    let mut series = Vec::new();
    for (kernel, stem) in kernels.iter().zip(stems("sweep", &kernels)) {
        let gram = lib(&format!("gram matrix ({kernel})"), gram_matrix(kernel, &data))?;
        let eig = lib(&format!("eigendecomposition ({kernel})"), eigendecompose(gram.values()))?;
        let result = lib(&format!("error sweep ({kernel})"), error_sweep(gram.values(), &eig, &ranks))?;
        let mut table = Table::new(&[
            "rank",
            "max_entry_error",
            "frobenius_error",
            "spectral_error",
            "tail_abs_sum",
            "sup_norm",
            "entrywise_bound",
        ]);
        for r in &result.rows {
            table.push(vec![
                r.rank.to_string(),
                num(r.max_entry_error),
                num(r.frobenius_error),
                num(r.spectral_error),
                num(r.tail_abs_sum),
                r.sup_norm.map_or(String::new(), num),
                r.entrywise_bound().map_or(String::new(), num),
            ]);
        }
        let path = out.join(format!("{stem}.csv"));
        table.write(&path)?;
        written.push(path);
        series.push(Series {
            label: kernel.to_string(),
            points: result
                .rows
                .iter()
                .map(|r| (r.rank as f64, r.max_entry_error))
                .collect(),
        });
    }
    let svg = line_plot_svg(
        &format!("Maximum entrywise error against rank (n = {})", data.n()),
        "rank d",
        "max |K - K_d|",
        &series,
    );
    let path = out.join("sweep.svg");
    fs::write(&path, svg).map_err(|e| io_error(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn compare(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if config.jl_trials == 0 {
        return Err(CliError::Usage("jl_trials must be at least 1".into()));
    }
    let data = config.dataset()?;
    let kernels = config.kernels(&data)?;
    // Random projections have rank at least 1.
    let ranks: Vec<usize> = config
        .ranks
        .resolve(data.n())?
        .into_iter()
        .filter(|&d| d > 0)
        .collect();
    if ranks.is_empty() {
        return Err(CliError::Usage("compare needs at least one rank ≥ 1".into()));
    }
    ensure_dir(out)?;
    let mut written = Vec::new();
    for (i, (kernel, stem)) in kernels.iter().zip(stems("compare", &kernels)).enumerate() {
        let gram = lib(&format!("gram matrix ({kernel})"), gram_matrix(kernel, &data))?;
        let eig = lib(&format!("eigendecomposition ({kernel})"), eigendecompose(gram.values()))?;
        let cmp = lib(
            &format!("random projection comparison ({kernel})"),
            compare_with_decomposition(
                gram.values(),
                &eig,
                &ranks,
                config.jl_trials,
                derive_seed(config.seed, i as u64),
            ),
        )?;
        let mut table = Table::new(&["rank", "spectral_max_error", "jl_median_max_error", "jl_rate_shape"]);
        for r in &cmp.rows {
            table.push(vec![
                r.rank.to_string(),
                num(r.spectral_max_error),
                num(r.jl_median_max_error),
                num(r.jl_rate_shape),
            ]);
        }
        let path = out.join(format!("{stem}.csv"));
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identity,
    Interlacing,
    Delocalisation,
    Subspace,
    Eigdev,
    All,
}

struct CheckRow {
    check: String,
    statistic: f64,
    threshold: Option<f64>,
    seed: u64,
}

impl CheckRow {
    fn passed(&self) -> Option<bool> {
        self.threshold.map(|t| self.statistic <= t)
    }
}

/// `n×n` matrix of i.i.d. standard normal entries.
fn random_matrix(n: usize, seed: u64) -> Result<Array2<f64>, CliError> {
    Ok(lib("sampling", gaussian_synthetic(n, n, 1.0, seed))?.into_points())
}

fn rbf_1d_eigen(n: usize, seed: u64) -> Result<spectral::EigenDecomposition, CliError> {
    let data = lib("sampling", gaussian_synthetic(n, 1, 1.0, seed))?;
    let gram = lib("gram matrix", gram_matrix(&KernelSpec::rbf(1.0).expect("valid"), &data))?;
    lib("eigendecomposition", eigendecompose(gram.values()))
}

fn run_suite(suite: Suite, seed: u64, rows: &mut Vec<CheckRow>) -> Result<(), CliError> {
    match suite {
        Suite::Identity => {
            for inst in 0..20 {
                let s = derive_seed(seed, inst);
                let a = random_matrix(50, s)?;
                let k = a.dot(&a.t()) / 50.0;
                let rep = lib("principal-minor identity", minor_identity_check(k.view()))?;
                rows.push(CheckRow {
                    check: format!("identity[{inst}] ({} skipped)", rep.skipped.len()),
                    statistic: rep.max_relative_discrepancy,
                    threshold: Some(1e-6),
                    seed: s,
                });
            }
        }
        Suite::Interlacing => {
            for inst in 0..20 {
                let s = derive_seed(seed, 100 + inst);
                let a = random_matrix(100, s)?;
                let k = (&a + &a.t()) / 2.0;
                let eig = lib("eigendecomposition", eigendecompose(k.view()))?;
                let minor = lib("minor", MinorDecomposition::new(k.view()))?;
                rows.push(CheckRow {
                    check: format!("interlacing[{inst}]"),
                    statistic: lib("interlacing", interlacing_check(&eig, &minor))?,
                    threshold: Some(1e-10),
                    seed: s,
                });
            }
        }
        Suite::Delocalisation => {
            let n = 1000;
            let spectrum = GaussianRbfSpectrum::new(1.0, 1.0, 1).expect("valid");
            let d = lib("required rank", required_rank(n, &lib("hypothesis", spectrum.decay_hypothesis())?, 1.0))?;
            let s = derive_seed(seed, 200);
            let eig = rbf_1d_eigen(n, s)?;
            rows.push(CheckRow {
                check: format!("delocalisation n={n} d={d}"),
                statistic: lib("delocalisation", delocalisation_report(&eig, d))?,
                threshold: Some(10.0),
                seed: s,
            });
        }
        Suite::Subspace => {
            let s = derive_seed(seed, 300);
            let exp = SubspaceExperiment::new(1024, 256, EntryLaw::Bernoulli { p: 0.5 }, 10_000, s);
            let rep = lib("subspace experiment", subspace_distance_experiment(&exp))?;
            for ((t, f), b) in rep.thresholds.iter().zip(&rep.frequencies).zip(&rep.bounds) {
                rows.push(CheckRow {
                    check: format!("subspace t={t}"),
                    statistic: *f,
                    threshold: Some(*b),
                    seed: s,
                });
            }
        }
        Suite::Eigdev => {
            let n = 1000;
            let s = derive_seed(seed, 400);
            let eig = rbf_1d_eigen(n, s)?;
            let spectrum = AnalyticSpectrum::GaussianRbf(GaussianRbfSpectrum::new(1.0, 1.0, 1).expect("valid"));
            let rep = lib("deviation report", eigenvalue_deviation_report(eig.eigenvalues(), &spectrum, 5))?;
            for r in rep {
                rows.push(CheckRow {
                    check: format!("eigdev i={} (sample {:.6}, analytic {:.6})", r.index, r.sample, r.population),
                    statistic: r.relative,
                    threshold: None,
                    seed: s,
                });
            }
        }
        Suite::All => {
            for s in [Suite::Identity, Suite::Interlacing, Suite::Delocalisation, Suite::Subspace, Suite::Eigdev] {
                run_suite(s, seed, rows)?;
            }
        }
    }
    Ok(())
}

/// Runs the selected checks, prints a table and writes `verify.csv`.
/// Returns whether every thresholded check passed.
pub fn verify(suite: Suite, seed: u64, out: &Path) -> Result<bool, CliError> {
    let mut rows = Vec::new();
    run_suite(suite, seed, &mut rows)?;
    ensure_dir(out)?;
    let mut table = Table::new(&["check", "statistic", "threshold", "passed", "seed"]);
    println!("{:<48} {:>12} {:>12} {:>6} {:>20}", "check", "statistic", "threshold", "status", "seed");
    let mut all = true;
    for r in &rows {
        let status = match r.passed() {
            Some(true) => "pass",
            Some(false) => {
                all = false;
                "FAIL"
            }
            None => "info",
        };
        println!(
            "{:<48} {:>12.4e} {:>12} {:>6} {:>20}",
            r.check,
            r.statistic,
            r.threshold.map_or("-".to_string(), |t| format!("{t:.4e}")),
            status,
            r.seed
        );
        table.push(vec![
            format!("\"{}\"", r.check.replace('"', "'")),
            num(r.statistic),
            r.threshold.map_or(String::new(), num),
            r.passed().map_or(String::new(), |p| p.to_string()),
            r.seed.to_string(),
        ]);
    }
    let path = out.join("verify.csv");
    table.write(&path)?;
    for r in rows.iter().filter(|r| r.passed() == Some(false)) {
        eprintln!("failed check: {} (seed {})", r.check, r.seed);
    }
    Ok(all)
}

#[derive(Debug, Clone, clap::Args)]
pub struct SpectrumArgs {
    /// υ = 2σ²/ω²; overrides --sigma/--omega.
    #[arg(long)]
    pub upsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Dimension of the Gaussian measure.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Number of leading eigenvalues.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Sphere dimension p (S^{p-1}); switches to the dot-product setting.
    #[arg(long)]
    pub sphere_dim: Option<usize>,
    /// Polynomial coefficient decay a (sphere setting).
    #[arg(long, conflicts_with = "ratio")]
    pub coef_decay: Option<f64>,
    /// Geometric coefficient ratio r (sphere setting).
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Universal constant C in the geometric-case β (a convention).
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
}

fn describe(h: &DecayHypothesis) -> String {
    match *h {
        DecayHypothesis::Polynomial { alpha, r } => {
            format!("hypothesis P: alpha = {}, r = {}", num(alpha), num(r))
        }
        DecayHypothesis::Exponential { beta, gamma, s } => format!(
            "hypothesis E: beta = {}, gamma = {}, s = {}",
            num(beta),
            num(gamma),
            num(s)
        ),
    }
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    if let Some(p) = args.sphere_dim {
        let params = match (args.coef_decay, args.ratio) {
            (Some(a), None) => SphereSpectrumParams::polynomial(p, a),
            (None, Some(r)) => SphereSpectrumParams::geometric(p, r, args.constant),
            _ => {
                return Err(CliError::Usage(
                    "sphere setting needs exactly one of --coef-decay or --ratio".into(),
                ))
            }
        };
        let params = lib("sphere parameters", params)?;
        println!("{}", describe(&lib("sphere rates", sphere_rates(&params))?));
        println!("degree,harmonic_count");
        for l in 0..args.count {
            println!("{l},{}", lib("harmonic count", sphere_harmonic_count(l, p))?);
        }
        return Ok(());
    }
    let spec = match args.upsilon {
        Some(u) => GaussianRbfSpectrum::from_upsilon(u, args.p),
        None => GaussianRbfSpectrum::new(args.sigma, args.omega, args.p),
    };
    let spec = lib("spectrum parameters", spec)?;
    println!(
        "upsilon = {}, c = {}, q = {}",
        num(spec.upsilon()),
        num(spec.c()),
        num(spec.q())
    );
    println!("{}", describe(&lib("hypothesis", spec.decay_hypothesis())?));
    println!("index,eigenvalue");
    for (i, v) in lib("tensor spectrum", tensor_spectrum(&spec, args.count))?.iter().enumerate() {
        println!("{i},{}", num(*v));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HypothesisKind {
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "E", alias = "e")]
    E,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub hypothesis: HypothesisKind,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Eigenfunction growth exponent under P.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Eigenfunction growth exponent under E.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Sample sizes; repeat or separate with commas.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [100usize, 1000, 10_000, 100_000])]
    pub n: Vec<usize>,
    /// Multiplier c in the P-case rank threshold.
    #[arg(long, default_value_t = 1.0)]
    pub multiplier: f64,
}

pub fn rates(args: &RatesArgs) -> Result<(), CliError> {
    let hyp = match args.hypothesis {
        HypothesisKind::P => {
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::Usage("hypothesis P needs --alpha".into()))?;
            DecayHypothesis::polynomial(alpha, args.r)
        }
        HypothesisKind::E => {
            let beta = args
                .beta
                .ok_or_else(|| CliError::Usage("hypothesis E needs --beta".into()))?;
            DecayHypothesis::exponential(beta, args.gamma, args.s)
        }
    };
    let hyp = lib("hypothesis", hyp)?;
    println!("{}", describe(&hyp));
    println!("n,required_rank,rate");
    for &n in &args.n {
        let d = lib("required rank", required_rank(n, &hyp, args.multiplier))?;
        let rate = lib("rate", theorem1_rate(n, &hyp))?;
        println!("{n},{d},{}", num(rate));
    }
    Ok(())
}
