use approx::assert_abs_diff_eq;
use kernel_lowrank::analytic::{
    exp_tail_bound, poly_tail_bound, rbf_gaussian_eigenfunction, rbf_gaussian_eigenvalue,
    tensor_multiplicity, tensor_spectrum, GaussianRbfSpectrum,
};
use kernel_lowrank::rng::seeded;
use kernel_lowrank::spectral::{
    eigendecompose, error_sweep, leading_eigenpairs, sup_norm_tail, truncate,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = seeded(seed);
    Array2::from_shape_simple_fn((n, m), || rng.sample::<f64, _>(StandardNormal))
}

fn psd(n: usize, seed: u64) -> Array2<f64> {
    let a = gaussian(n, n, seed);
    a.dot(&a.t()) / n as f64
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncation_beats_random_rank_d_candidates(seed in 0u64..1000, d in 1usize..8) {
        let n = 12;
        let k = psd(n, seed);
        let eig = eigendecompose(k.view()).unwrap();
        let best = frobenius(&(&k - &truncate(&eig, d).unwrap()));
        for c in 0..20 {
            let u = gaussian(n, d, seed * 100 + c);
            let v = gaussian(d, n, seed * 100 + c + 50);
            let candidate = u.dot(&v);
            prop_assert!(best <= frobenius(&(&k - &candidate)) + 1e-12);
        }
    }

    #[test]
    fn pythagoras_for_truncation(seed in 0u64..1000, d in 0usize..15) {
        let k = psd(15, seed);
        let eig = eigendecompose(k.view()).unwrap();
        let kd = truncate(&eig, d).unwrap();
        let lhs = frobenius(&k).powi(2);
        let rhs = frobenius(&kd).powi(2) + frobenius(&(&k - &kd)).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn sweep_is_monotone_and_bounded(seed in 0u64..1000) {
        let n = 20;
        let k = psd(n, seed);
        let eig = eigendecompose(k.view()).unwrap();
        let ranks: Vec<usize> = (0..=n).collect();
        let sweep = error_sweep(k.view(), &eig, &ranks).unwrap();
        for w in sweep.rows.windows(2) {
            prop_assert!(w[1].frobenius_error <= w[0].frobenius_error + 1e-12);
            prop_assert!(w[1].tail_abs_sum <= w[0].tail_abs_sum + 1e-12);
        }
        for row in &sweep.rows {
            prop_assert!(row.max_entry_error <= row.entrywise_bound().unwrap() + 1e-12);
        }
    }

    #[test]
    fn exp_tail_bound_dominates_partial_sums(
        d in 1usize..40,
        beta in 0.05f64..3.0,
        gamma in 0.3f64..=1.0,
    ) {
        let partial: f64 = (d + 1..d + 200_000).map(|i| (-beta * (i as f64).powf(gamma)).exp()).sum();
        prop_assert!(partial <= exp_tail_bound(d, beta, gamma).unwrap());
    }

    #[test]
    fn poly_tail_bound_dominates_partial_sums(d in 1usize..40, alpha in 1.1f64..5.0) {
        let partial: f64 = (d + 1..d + 200_000).map(|i| (i as f64).powf(-alpha)).sum();
        prop_assert!(partial <= poly_tail_bound(d, alpha).unwrap());
    }
}

#[test]
fn incremental_residual_matches_direct_truncation() {
    let k = psd(30, 7);
    let eig = eigendecompose(k.view()).unwrap();
    let sweep = error_sweep(k.view(), &eig, &[1, 5, 15]).unwrap();
    for row in &sweep.rows {
        let direct = &k - &truncate(&eig, row.rank).unwrap();
        let max = direct.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert_abs_diff_eq!(row.max_entry_error, max, epsilon = 1e-9);
        assert_abs_diff_eq!(row.frobenius_error, frobenius(&direct), epsilon = 1e-9);
    }
}

#[test]
fn spectral_error_matches_power_iteration() {
    let k = psd(40, 11);
    let eig = eigendecompose(k.view()).unwrap();
    let d = 6;
    let residual = &k - &truncate(&eig, d).unwrap();
    let mut v = Array1::from_elem(40, 1.0);
    let mut norm = 0.0;
    for _ in 0..2000 {
        let w = residual.dot(&v);
        norm = w.dot(&w).sqrt();
        v = w / norm;
    }
    let sweep = error_sweep(k.view(), &eig, &[d]).unwrap();
    assert!((sweep.rows[0].spectral_error - norm).abs() <= 1e-4 * norm);
}

#[test]
fn leading_pairs_agree_with_full_decomposition() {
    let k = psd(60, 5);
    let full = eigendecompose(k.view()).unwrap();
    let lead = leading_eigenpairs(k.view(), 8).unwrap();
    for l in 0..8 {
        assert_abs_diff_eq!(full.eigenvalues()[l], lead.eigenvalues()[l], epsilon = 1e-10);
        let dot = full.eigenvector(l).dot(&lead.eigenvector(l));
        assert_abs_diff_eq!(dot.abs(), 1.0, epsilon = 1e-8);
    }
}

#[test]
fn haar_eigenvectors_are_delocalised() {
    let n = 1000;
    let a = gaussian(n, n, 99);
    let sym = (&a + &a.t()) / 2.0;
    let eig = eigendecompose(sym.view()).unwrap();
    assert!(sup_norm_tail(&eig, 0).unwrap() <= 0.3);
}

#[test]
fn eigenfunctions_are_orthonormal_under_the_design() {
    let spec = GaussianRbfSpectrum::new(1.3, 0.9, 1).unwrap();
    let mut rng = seeded(31);
    let samples = 1_000_000;
    let m = 11;
    let mut gram = Array2::<f64>::zeros((m, m));
    let mut u = vec![0.0; m];
    for _ in 0..samples {
        let x = 1.3 * rng.sample::<f64, _>(StandardNormal);
        for (i, slot) in u.iter_mut().enumerate() {
            *slot = rbf_gaussian_eigenfunction(i, x, &spec).unwrap();
        }
        for i in 0..m {
            for j in 0..=i {
                gram[[i, j]] += u[i] * u[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(gram[[i, j]] / samples as f64, target, epsilon = 0.02);
        }
    }
}

#[test]
fn mercer_expansion_recovers_kernel() {
    let (sigma, omega) = (1.0, 0.8);
    let spec = GaussianRbfSpectrum::new(sigma, omega, 1).unwrap();
    let (x, y) = (0.3, -0.5);
    let series: f64 = (0..60)
        .map(|i| {
            rbf_gaussian_eigenvalue(i, &spec).unwrap()
                * rbf_gaussian_eigenfunction(i, x, &spec).unwrap()
                * rbf_gaussian_eigenfunction(i, y, &spec).unwrap()
        })
        .sum();
    let exact = (-(x - y) * (x - y) / (2.0 * omega * omega)).exp();
    assert_abs_diff_eq!(series, exact, epsilon = 1e-10);
}

fn envelope(spec: &GaussianRbfSpectrum, x: f64) -> f64 {
    let s = spec.sigma();
    1.09 * (1.0 + 2.0 * spec.upsilon()).powf(0.125) * (x * x / (4.0 * s * s)).exp()
}

#[test]
fn eigenfunctions_obey_growing_envelope() {
    let spec = GaussianRbfSpectrum::new(1.0, 1.0, 1).unwrap();
    for i in 0..=40 {
        for step in 0..=400 {
            let x = -10.0 + step as f64 * 0.05;
            let u = rbf_gaussian_eigenfunction(i, x, &spec).unwrap();
            assert!(u.abs() <= envelope(&spec, x), "i={i} x={x} u={u}");
        }
    }
}

#[test]
fn eigenfunctions_are_not_uniformly_bounded() {
    // A uniform bound 1.09 (1+2υ)^{1/8} is violated well inside the support.
    let spec = GaussianRbfSpectrum::new(1.0, 1.0, 1).unwrap();
    let uniform = 1.09 * (1.0 + 2.0 * spec.upsilon()).powf(0.125);
    let peak = (0..=40)
        .flat_map(|i| (0..=200).map(move |s| (i, s as f64 * 0.025)))
        .map(|(i, x)| rbf_gaussian_eigenfunction(i, x, &spec).unwrap().abs())
        .fold(0.0_f64, f64::max);
    assert!(peak > 2.0 * uniform, "peak {peak} vs {uniform}");
}

#[test]
fn tensor_spectrum_mass_and_multiplicity() {
    let spec = GaussianRbfSpectrum::new(1.0, 1.5, 3).unwrap();
    let (c, q) = (spec.c(), spec.q());
    let top = 60;
    let count: f64 = (0..top).map(|deg| tensor_multiplicity(deg, 3)).sum();
    let values = tensor_spectrum(&spec, count as usize).unwrap();
    assert_eq!(values.len(), count as usize);
    let mass: f64 = values.iter().sum();
    assert_abs_diff_eq!(mass, (c / (1.0 - q)).powi(3), epsilon = 1e-8);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    assert_abs_diff_eq!(values[0], c.powi(3), epsilon = 1e-15);
    assert_eq!(values.iter().filter(|&&v| (v - c.powi(3) * q).abs() < 1e-14).count(), 3);
}
