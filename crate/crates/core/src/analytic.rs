//! Closed-form eigen-systems, decay hypotheses, series tail bounds and the
//! entrywise-error rate curves.
//!
//! Two settings have explicit spectra:
//!
//! * the squared-exponential kernel `exp(-(x-y)²/2ω²)` under an isotropic
//!   Gaussian measure `N(0, σ² I_p)`. With `υ = 2σ²/ω²` the univariate
//!   eigenvalues are `c·q^i`, `c = sqrt(2/(1+υ+sqrt(1+2υ)))`,
//!   `q = υ/(1+υ+sqrt(1+2υ))`, so the decay rate is `β = -log q`, and the
//!   eigenfunctions are scaled Hermite functions. The multivariate spectrum is
//!   the `p`-fold tensor product;
//! * dot-product kernels under the uniform measure on the sphere `S^{p-1}`,
//!   where only the decay parameters and the harmonic counts are available.
//!
//! The eigenfunction display uses its own exponent constant, which for this
//! normalisation equals `υ` (not the decay rate `β`, despite the customary
//! reuse of the letter). [`GaussianRbfSpectrum::eigenfunction_exponent`]
//! returns it.

use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{argument, Error, Result};

/// Default largest eigenfunction index evaluated.
pub const DEFAULT_EIGENFUNCTION_CAP: usize = 60;

/// Squared-exponential kernel with bandwidth `ω` under `N(0, σ² I_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRbfSpectrum {
    sigma: f64,
    omega: f64,
    p: usize,
    index_cap: usize,
}

impl GaussianRbfSpectrum {
    pub fn new(sigma: f64, omega: f64, p: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(argument(format!("data scale σ must be positive, got {sigma}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(argument(format!("bandwidth ω must be positive, got {omega}")));
        }
        if p == 0 {
            return Err(argument("dimension must be at least 1"));
        }
        Ok(GaussianRbfSpectrum {
            sigma,
            omega,
            p,
            index_cap: DEFAULT_EIGENFUNCTION_CAP,
        })
    }

    /// Spectrum with `σ = 1` and `ω = sqrt(2/υ)`.
    pub fn from_upsilon(upsilon: f64, p: usize) -> Result<Self> {
        if !(upsilon.is_finite() && upsilon > 0.0) {
            return Err(argument(format!("υ must be positive, got {upsilon}")));
        }
        GaussianRbfSpectrum::new(1.0, (2.0 / upsilon).sqrt(), p)
    }

    pub fn with_index_cap(mut self, cap: usize) -> Self {
        self.index_cap = cap;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `υ = 2σ²/ω²`.
    pub fn upsilon(&self) -> f64 {
        2.0 * self.sigma * self.sigma / (self.omega * self.omega)
    }

    fn denominator(&self) -> f64 {
        let u = self.upsilon();
        1.0 + u + (1.0 + 2.0 * u).sqrt()
    }

    /// Leading constant `c` of the univariate eigenvalues `c·q^i`.
    pub fn c(&self) -> f64 {
        (2.0 / self.denominator()).sqrt()
    }

    /// Ratio `q` of the univariate eigenvalues, in `(0, 1)`.
    pub fn q(&self) -> f64 {
        self.upsilon() / self.denominator()
    }

    /// Exponential decay rate `β = log((1+υ+sqrt(1+2υ))/υ) = -log q`.
    pub fn beta(&self) -> f64 {
        (self.denominator() / self.upsilon()).ln()
    }

    /// Exponent constant of the eigenfunction formula; equals `υ`.
    pub fn eigenfunction_exponent(&self) -> f64 {
        self.upsilon()
    }

    /// Hypothesis (E) with `γ = 1` and bounded-growth exponent `s = 0`.
    pub fn decay_hypothesis(&self) -> Result<DecayHypothesis> {
        DecayHypothesis::exponential(self.beta(), 1.0, 0.0)
    }
}

/// `β` as a function of `υ`.
pub fn beta_of_upsilon(upsilon: f64) -> Result<f64> {
    Ok(GaussianRbfSpectrum::from_upsilon(upsilon, 1)?.beta())
}

fn require_univariate(spec: &GaussianRbfSpectrum) -> Result<()> {
    if spec.p != 1 {
        return Err(argument(format!(
            "univariate formula requested for p = {}; use tensor_spectrum",
            spec.p
        )));
    }
    Ok(())
}

/// `λ_i = c·q^i`, `i ≥ 0`.
pub fn rbf_gaussian_eigenvalue(i: usize, spec: &GaussianRbfSpectrum) -> Result<f64> {
    require_univariate(spec)?;
    Ok(spec.c() * spec.q().powi(i as i32))
}

/// `H_i(t) / sqrt(2^i i!)` via the three-term recurrence with the
/// normalisation folded in, so no factorial is ever formed.
pub fn normalized_hermite(i: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if i == 0 {
        return prev;
    }
    let mut cur = std::f64::consts::SQRT_2 * t;
    for k in 1..i {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Eigenfunction `u_i(x)`, orthonormal in `L²(N(0, σ²))`:
///
/// `u_i(x) = (1+2υ)^{1/8} exp(-(x²/2σ²)(sqrt(1+2υ)-1)/2) h_i((1/4+υ/2)^{1/4} x/σ)`
/// with `h_i` from [`normalized_hermite`].
pub fn rbf_gaussian_eigenfunction(i: usize, x: f64, spec: &GaussianRbfSpectrum) -> Result<f64> {
    require_univariate(spec)?;
    if i > spec.index_cap {
        return Err(Error::Capability(format!(
            "eigenfunction index {i} exceeds cap {}",
            spec.index_cap
        )));
    }
    if !x.is_finite() {
        return Err(argument("non-finite evaluation point"));
    }
    let b = spec.eigenfunction_exponent();
    let s = spec.sigma;
    let root = (1.0 + 2.0 * b).sqrt();
    let envelope = (1.0 + 2.0 * b).powf(0.125) * (-(x * x) / (2.0 * s * s) * (root - 1.0) / 2.0).exp();
    let t = (0.25 + b / 2.0).powf(0.25) * x / s;
    Ok(envelope * normalized_hermite(i, t))
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, j| acc * (n - k + j) as f64 / j as f64)
}

/// The `m` largest eigenvalues of the `p`-variate spectrum, descending, with
/// multiplicities expanded. Total degree `i` contributes `c^p q^i` with
/// multiplicity `C(i+p-1, p-1)`.
pub fn tensor_spectrum(spec: &GaussianRbfSpectrum, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(argument("count must be at least 1"));
    }
    let p = spec.p;
    let lead = spec.c().powi(p as i32);
    let q = spec.q();
    let mut out = Vec::with_capacity(m);
    let mut degree = 0usize;
    while out.len() < m {
        let multiplicity = binomial_f64(degree + p - 1, p - 1);
        let value = lead * q.powi(degree as i32);
        let take = (m - out.len()).min(multiplicity.min(m as f64) as usize);
        out.extend(std::iter::repeat_n(value, take));
        degree += 1;
    }
    Ok(out)
}

/// Multiplicity of total degree `i` in the `p`-variate tensor spectrum.
pub fn tensor_multiplicity(degree: usize, p: usize) -> f64 {
    binomial_f64(degree + p - 1, p - 1)
}

/// Number of spherical harmonics of degree `l` on `S^{p-1}`:
/// `N_0 = 1`, `N_l = ((2l+p-2)/l)·C(l+p-3, p-2)`.
pub fn sphere_harmonic_count(l: usize, p: usize) -> Result<u64> {
    if p < 3 {
        return Err(argument(format!("sphere dimension p must be at least 3, got {p}")));
    }
    if l == 0 {
        return Ok(1);
    }
    let overflow = || Error::Capability(format!("N_l overflows for l = {l}, p = {p}"));
    let top = (l + p - 3) as u128;
    let k = ((p - 2) as u128).min(top + 2 - p as u128);
    let mut binom: u128 = 1;
    for j in 1..=k {
        binom = binom
            .checked_mul(top - k + j)
            .ok_or_else(overflow)?
            / j;
    }
    let numerator = binom
        .checked_mul((2 * l + p - 2) as u128)
        .ok_or_else(overflow)?;
    u64::try_from(numerator / l as u128).map_err(|_| overflow())
}

/// Coefficient decay of a dot-product kernel `Σ b_i t^i` on `S^{p-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereDecay {
    /// `b_i = O(i^{-a})`.
    Polynomial { a: f64 },
    /// `b_i = O(r^i)`; `constant` is the unspecified universal constant in
    /// the resulting `β`, a convention rather than a derived value.
    Geometric { ratio: f64, constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpectrumParams {
    p: usize,
    decay: SphereDecay,
}

impl SphereSpectrumParams {
    /// Polynomial coefficient decay; requires `a > (p² - 4p + 5)/2`.
    pub fn polynomial(p: usize, a: f64) -> Result<Self> {
        check_sphere_dimension(p)?;
        if !a.is_finite() {
            return Err(argument("coefficient decay a must be finite"));
        }
        check_polynomial_threshold(p, a)?;
        Ok(SphereSpectrumParams {
            p,
            decay: SphereDecay::Polynomial { a },
        })
    }

    /// Geometric coefficient decay with ratio `r ∈ (0, 1)`; the universal
    /// constant defaults to 1 in [`SphereSpectrumParams::geometric_default`].
    pub fn geometric(p: usize, ratio: f64, constant: f64) -> Result<Self> {
        check_sphere_dimension(p)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(argument(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        if !(constant.is_finite() && constant > 0.0) {
            return Err(argument(format!("constant must be positive, got {constant}")));
        }
        Ok(SphereSpectrumParams {
            p,
            decay: SphereDecay::Geometric { ratio, constant },
        })
    }

    pub fn geometric_default(p: usize, ratio: f64) -> Result<Self> {
        SphereSpectrumParams::geometric(p, ratio, 1.0)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn decay(&self) -> SphereDecay {
        self.decay
    }
}

fn check_sphere_dimension(p: usize) -> Result<()> {
    if p < 3 {
        return Err(argument(format!("sphere dimension p must be at least 3, got {p}")));
    }
    Ok(())
}

fn check_polynomial_threshold(p: usize, a: f64) -> Result<()> {
    let pf = p as f64;
    let threshold = (pf * pf - 4.0 * pf + 5.0) / 2.0;
    if a <= threshold {
        return Err(Error::HypothesisViolation(format!(
            "coefficient decay a = {a} must exceed (p²-4p+5)/2 = {threshold} for p = {p}"
        )));
    }
    Ok(())
}

/// Decay parameters implied by a sphere dot-product kernel.
///
/// Polynomial: `α = (2a+p-3)/(p-2)` with eigenfunction growth `r = (p-2)/2`.
/// Geometric: `γ = 1/(p-1)`, `β = (p-1)!·log(1/r)/C`, `s = 0`.
pub fn sphere_rates(params: &SphereSpectrumParams) -> Result<DecayHypothesis> {
    let p = params.p;
    let pf = p as f64;
    match params.decay {
        SphereDecay::Polynomial { a } => {
            check_polynomial_threshold(p, a)?;
            let alpha = (2.0 * a + pf - 3.0) / (pf - 2.0);
            DecayHypothesis::polynomial(alpha, (pf - 2.0) / 2.0)
        }
        SphereDecay::Geometric { ratio, constant } => {
            let factorial: f64 = (1..p).map(|k| k as f64).product();
            let beta = factorial * (1.0 / ratio).ln() / constant;
            DecayHypothesis::exponential(beta, 1.0 / (pf - 1.0), 0.0)
        }
    }
}

/// Eigenvalue decay together with the matching eigenfunction growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayHypothesis {
    /// `λ_i = O(i^{-α})`, `‖u_i‖_∞ = O(i^r)`, `α > 2r + 1`.
    Polynomial { alpha: f64, r: f64 },
    /// `λ_i = O(exp(-β i^γ))`, `‖u_i‖_∞ = O(exp(s i^γ))`, `β > 2s`.
    Exponential { beta: f64, gamma: f64, s: f64 },
}

impl DecayHypothesis {
    pub fn polynomial(alpha: f64, r: f64) -> Result<Self> {
        let violated = |m: String| Err(Error::HypothesisViolation(m));
        if !(alpha.is_finite() && alpha > 1.0) {
            return violated(format!("(P) requires α > 1, got α = {alpha}"));
        }
        if !(r.is_finite() && r >= 0.0) {
            return violated(format!("(P) requires r ≥ 0, got r = {r}"));
        }
        if alpha <= 2.0 * r + 1.0 {
            return violated(format!("(P) requires α > 2r + 1, got α = {alpha}, r = {r}"));
        }
        Ok(DecayHypothesis::Polynomial { alpha, r })
    }

    pub fn exponential(beta: f64, gamma: f64, s: f64) -> Result<Self> {
        let violated = |m: String| Err(Error::HypothesisViolation(m));
        if !(beta.is_finite() && beta > 0.0) {
            return violated(format!("(E) requires β > 0, got β = {beta}"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return violated(format!("(E) requires 0 < γ ≤ 1, got γ = {gamma}"));
        }
        if !(s.is_finite() && s >= 0.0) {
            return violated(format!("(E) requires s ≥ 0, got s = {s}"));
        }
        if beta <= 2.0 * s {
            return violated(format!("(E) requires β > 2s, got β = {beta}, s = {s}"));
        }
        Ok(DecayHypothesis::Exponential { beta, gamma, s })
    }
}

/// `d^{1-α}/(α-1)`, the integral-comparison bound on `Σ_{i>d} i^{-α}`.
pub fn poly_tail_bound(d: usize, alpha: f64) -> Result<f64> {
    if d == 0 {
        return Err(argument("d must be at least 1"));
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(argument(format!("series diverges for α = {alpha} ≤ 1")));
    }
    Ok((d as f64).powf(1.0 - alpha) / (alpha - 1.0))
}

/// Upper bound on `Σ_{i>d} exp(-β i^γ)` by comparison with
/// `∫_d^∞ exp(-β t^γ) dt = Γ(1/γ, β d^γ) / (γ β^{1/γ})`.
///
/// For `γ = 1` this is `exp(-β d)/β`. The integral is the bound itself; the
/// further simplification `Γ(s, x) ≤ e^{-x} x^{s-1}` only holds for
/// `s ≤ 1` and is not applied, so the result is a valid bound for every
/// `γ ∈ (0, 1]`. Asymptotically it behaves as `exp(-β d^γ) d^{1-γ}/(βγ)`.
pub fn exp_tail_bound(d: usize, beta: f64, gamma_exp: f64) -> Result<f64> {
    if d == 0 {
        return Err(argument("d must be at least 1"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(argument(format!("β must be positive, got {beta}")));
    }
    if !(gamma_exp > 0.0 && gamma_exp <= 1.0) {
        return Err(argument(format!("γ must lie in (0, 1], got {gamma_exp}")));
    }
    let s = 1.0 / gamma_exp;
    let x = beta * (d as f64).powf(gamma_exp);
    if gamma_exp == 1.0 {
        return Ok((-x).exp() / beta);
    }
    let upper = gamma_ur(s, x) * gamma(s);
    Ok(upper / (gamma_exp * beta.powf(s)))
}

/// Rate of the max-entry error: `n^{-(α-1)/α} log n` under (P), `1/n` under (E).
pub fn theorem1_rate(n: usize, hyp: &DecayHypothesis) -> Result<f64> {
    if n < 2 {
        return Err(argument("n must be at least 2"));
    }
    let nf = n as f64;
    Ok(match *hyp {
        DecayHypothesis::Polynomial { alpha, .. } => nf.powf(-(alpha - 1.0) / alpha) * nf.ln(),
        DecayHypothesis::Exponential { .. } => 1.0 / nf,
    })
}

/// Smallest rank at which the rate applies: `⌈c·n^{1/α}⌉` under (P), the
/// smallest integer strictly above `(log n / β)^{1/γ}` under (E).
pub fn required_rank(n: usize, hyp: &DecayHypothesis, multiplier: f64) -> Result<usize> {
    if n < 2 {
        return Err(argument("n must be at least 2"));
    }
    if !(multiplier.is_finite() && multiplier > 0.0) {
        return Err(argument(format!("multiplier must be positive, got {multiplier}")));
    }
    let nf = n as f64;
    Ok(match *hyp {
        DecayHypothesis::Polynomial { alpha, .. } => {
            let x = multiplier * nf.powf(1.0 / alpha);
            // Absorb round-off on exact powers such as sqrt(100).
            let nearest = x.round();
            if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
                nearest as usize
            } else {
                x.ceil() as usize
            }
        }
        DecayHypothesis::Exponential { beta, gamma, .. } => {
            (nf.ln() / beta).powf(1.0 / gamma).floor() as usize + 1
        }
    })
}

/// Either closed-form setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticSpectrum {
    GaussianRbf(GaussianRbfSpectrum),
    Sphere(SphereSpectrumParams),
}

impl AnalyticSpectrum {
    pub fn decay_hypothesis(&self) -> Result<DecayHypothesis> {
        match self {
            AnalyticSpectrum::GaussianRbf(s) => s.decay_hypothesis(),
            AnalyticSpectrum::Sphere(s) => sphere_rates(s),
        }
    }

    /// Leading `m` population eigenvalues, descending.
    pub fn leading_eigenvalues(&self, m: usize) -> Result<Vec<f64>> {
        match self {
            AnalyticSpectrum::GaussianRbf(s) => tensor_spectrum(s, m),
            AnalyticSpectrum::Sphere(_) => Err(Error::Capability(
                "sphere dot-product spectra have no closed-form eigenvalues here".into(),
            )),
        }
    }

    /// `Γ_i`, the squared residual of the constant function after projecting
    /// onto the first `i` eigenfunctions. Zero in both settings for `i ≥ 1`:
    /// every non-constant eigenfunction integrates to zero.
    pub fn constant_residual(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(argument("Γ_i is defined for i ≥ 1"));
        }
        Ok(0.0)
    }
}

/// `Δ_i = max_{j ≥ i} (λ_j - λ_{j+1})` over the available list, 1-based `i`.
/// On a finite list this is a lower bound on the population supremum.
pub fn eigengap_sup(eigenvalues: &[f64], i: usize) -> Result<f64> {
    if i == 0 {
        return Err(argument("Δ_i is defined for i ≥ 1"));
    }
    if eigenvalues.len() <= i {
        return Err(argument(format!(
            "need more than {i} eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    Ok(eigenvalues[i - 1..]
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisQuantities {
    pub delta: f64,
    pub gamma: f64,
}

/// `Δ_i` from the list and `Γ_i` from the analytic setting. Without an
/// analytic spectrum `Γ_i` is unavailable and a capability error is returned.
pub fn hypothesis_quantities(
    eigenvalues: &[f64],
    i: usize,
    spectrum: Option<&AnalyticSpectrum>,
) -> Result<HypothesisQuantities> {
    let delta = eigengap_sup(eigenvalues, i)?;
    let spectrum = spectrum.ok_or_else(|| {
        Error::Capability("Γ_i is only available for the closed-form settings".into())
    })?;
    Ok(HypothesisQuantities {
        delta,
        gamma: spectrum.constant_residual(i)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ups2() -> GaussianRbfSpectrum {
        GaussianRbfSpectrum::from_upsilon(2.0, 1).unwrap()
    }

    #[test]
    fn upsilon_two_constants() {
        // c = sqrt(2/(3+√5)), q = 2/(3+√5); both golden-ratio expressions.
        let s = ups2();
        let root5 = 5f64.sqrt();
        assert_abs_diff_eq!(s.c(), (2.0 / (3.0 + root5)).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.q(), 2.0 / (3.0 + root5), epsilon = 1e-15);
        assert_abs_diff_eq!(rbf_gaussian_eigenvalue(0, &s).unwrap(), 0.6180340, epsilon = 5e-8);
        assert_abs_diff_eq!(rbf_gaussian_eigenvalue(1, &s).unwrap(), 0.2360680, epsilon = 5e-8);
        assert_abs_diff_eq!(rbf_gaussian_eigenvalue(2, &s).unwrap(), 0.0901699, epsilon = 5e-8);
    }

    #[test]
    fn eigenvalue_ratio_is_constant() {
        for u in [0.1, 1.0, 2.0, 7.5] {
            let s = GaussianRbfSpectrum::from_upsilon(u, 1).unwrap();
            for i in 0..20 {
                let a = rbf_gaussian_eigenvalue(i, &s).unwrap();
                let b = rbf_gaussian_eigenvalue(i + 1, &s).unwrap();
                assert_abs_diff_eq!(b / a, s.q(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn beta_values() {
        assert_abs_diff_eq!(beta_of_upsilon(2.0).unwrap(), ((3.0 + 5f64.sqrt()) / 2.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(beta_of_upsilon(2.0).unwrap(), 0.9624237, epsilon = 5e-8);
        for u in [0.01, 0.3, 1.0, 4.0, 50.0] {
            let s = GaussianRbfSpectrum::from_upsilon(u, 1).unwrap();
            assert_abs_diff_eq!((-s.beta()).exp(), s.q(), epsilon = 1e-14);
        }
        assert!(beta_of_upsilon(100.0).unwrap() < beta_of_upsilon(1.0).unwrap());
        assert!(beta_of_upsilon(0.0).is_err());
        assert!(beta_of_upsilon(-1.0).is_err());
    }

    #[test]
    fn multivariate_requests_rejected_by_univariate_formulas() {
        let s = GaussianRbfSpectrum::from_upsilon(2.0, 2).unwrap();
        assert!(rbf_gaussian_eigenvalue(0, &s).is_err());
        assert!(rbf_gaussian_eigenfunction(0, 0.0, &s).is_err());
    }

    #[test]
    fn eigenfunction_examples() {
        let s = ups2();
        assert_eq!(rbf_gaussian_eigenfunction(1, 0.0, &s).unwrap(), 0.0);
        assert!(matches!(
            rbf_gaussian_eigenfunction(61, 0.0, &s),
            Err(Error::Capability(_))
        ));
        assert!(rbf_gaussian_eigenfunction(61, 0.0, &s.with_index_cap(80)).is_ok());
    }

    #[test]
    fn normalized_hermite_matches_explicit_polynomials() {
        // H_2 = 4t²-2, H_3 = 8t³-12t.
        for t in [-1.3, 0.0, 0.4, 2.2] {
            assert_abs_diff_eq!(normalized_hermite(2, t), (4.0 * t * t - 2.0) / 8f64.sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(
                normalized_hermite(3, t),
                (8.0 * t * t * t - 12.0 * t) / 48f64.sqrt(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn tensor_spectrum_two_dimensions() {
        let s = GaussianRbfSpectrum::from_upsilon(2.0, 2).unwrap();
        let v = tensor_spectrum(&s, 4).unwrap();
        let c2 = s.c() * s.c();
        assert_abs_diff_eq!(v[0], 0.3819660, epsilon = 5e-8);
        assert_abs_diff_eq!(v[0], c2, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], c2 * s.q(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], c2 * s.q(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[3], c2 * s.q() * s.q(), epsilon = 1e-15);
    }

    #[test]
    fn tensor_spectrum_univariate_matches_sequence() {
        let s = ups2();
        let v = tensor_spectrum(&s, 10).unwrap();
        for (i, x) in v.iter().enumerate() {
            assert_abs_diff_eq!(*x, rbf_gaussian_eigenvalue(i, &s).unwrap(), epsilon = 1e-16);
        }
        assert!(tensor_spectrum(&s, 0).is_err());
    }

    #[test]
    fn tensor_multiplicity_stars_and_bars() {
        for i in 0..12 {
            assert_eq!(tensor_multiplicity(i, 3), ((i + 1) * (i + 2) / 2) as f64);
        }
    }

    #[test]
    fn tensor_spectrum_mass_approaches_product() {
        let s = GaussianRbfSpectrum::from_upsilon(1.5, 3).unwrap();
        let total = (s.c() / (1.0 - s.q())).powi(3);
        let partial: Vec<f64> = [10, 100, 2000]
            .iter()
            .map(|&m| tensor_spectrum(&s, m).unwrap().iter().sum())
            .collect();
        assert!(partial.windows(2).all(|w| w[0] < w[1]));
        assert!(partial[2] < total);
        assert!((total - partial[2]) / total < 1e-6);
    }

    #[test]
    fn harmonic_counts() {
        assert_eq!(sphere_harmonic_count(1, 3).unwrap(), 3);
        assert_eq!(sphere_harmonic_count(2, 3).unwrap(), 5);
        for p in 3..12 {
            assert_eq!(sphere_harmonic_count(0, p).unwrap(), 1);
        }
        // S^2: 2l+1; S^3: (l+1)^2.
        for l in 1..30 {
            assert_eq!(sphere_harmonic_count(l, 3).unwrap(), 2 * l as u64 + 1);
            assert_eq!(sphere_harmonic_count(l, 4).unwrap(), ((l + 1) * (l + 1)) as u64);
        }
        assert_eq!(sphere_harmonic_count(1, 10).unwrap(), 10);
        assert!(sphere_harmonic_count(1, 2).is_err());
        assert!(matches!(sphere_harmonic_count(400, 400), Err(Error::Capability(_))));
    }

    #[test]
    fn sphere_rate_examples() {
        let poly = SphereSpectrumParams::polynomial(3, 2.0).unwrap();
        match sphere_rates(&poly).unwrap() {
            DecayHypothesis::Polynomial { alpha, r } => {
                assert_eq!(alpha, 4.0);
                assert_eq!(r, 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
        let geo = SphereSpectrumParams::geometric_default(3, 0.5).unwrap();
        match sphere_rates(&geo).unwrap() {
            DecayHypothesis::Exponential { beta, gamma, .. } => {
                assert_eq!(gamma, 0.5);
                assert_abs_diff_eq!(beta, 2.0 * 2f64.ln(), epsilon = 1e-15);
                assert_abs_diff_eq!(beta, 1.386294, epsilon = 5e-7);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            SphereSpectrumParams::polynomial(3, 1.0),
            Err(Error::HypothesisViolation(_))
        ));
        assert!(SphereSpectrumParams::geometric(3, 1.0, 1.0).is_err());
        assert!(SphereSpectrumParams::polynomial(2, 10.0).is_err());
    }

    #[test]
    fn hypothesis_constraints() {
        assert!(DecayHypothesis::polynomial(0.5, 0.0).is_err());
        assert!(DecayHypothesis::polynomial(3.0, 1.0).is_err());
        assert!(DecayHypothesis::polynomial(3.1, 1.0).is_ok());
        assert!(DecayHypothesis::exponential(1.0, 0.0, 0.0).is_err());
        assert!(DecayHypothesis::exponential(1.0, 1.5, 0.0).is_err());
        assert!(DecayHypothesis::exponential(1.0, 1.0, 0.5).is_err());
        assert!(DecayHypothesis::exponential(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn poly_bound_examples() {
        assert_abs_diff_eq!(poly_tail_bound(10, 2.0).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(poly_tail_bound(1, 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(poly_tail_bound(5, 1.0).is_err());
        assert!(poly_tail_bound(0, 2.0).is_err());
        let b: Vec<f64> = (1..50).map(|d| poly_tail_bound(d, 1.5).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn exp_bound_examples() {
        assert_abs_diff_eq!(exp_tail_bound(5, 1.0, 1.0).unwrap(), (-5.0f64).exp(), epsilon = 1e-17);
        assert_abs_diff_eq!(exp_tail_bound(5, 1.0, 1.0).unwrap(), 0.006738, epsilon = 5e-7);
        assert_abs_diff_eq!(exp_tail_bound(3, 0.5, 1.0).unwrap(), (-1.5f64).exp() / 0.5, epsilon = 1e-15);
        // γ = 1/2: ∫_d^∞ e^{-β√t} dt = 2 e^{-β√d}(β√d + 1)/β².
        let (d, b) = (4usize, 0.7);
        let x = b * (d as f64).sqrt();
        let closed = 2.0 * (-x).exp() * (x + 1.0) / (b * b);
        assert_abs_diff_eq!(exp_tail_bound(d, b, 0.5).unwrap(), closed, epsilon = 1e-12 * closed);
        for (beta, gamma) in [(0.5, 0.5), (1.0, 0.5), (0.5, 1.0), (2.0, 0.3)] {
            let v: Vec<f64> = (1..60).map(|d| exp_tail_bound(d, beta, gamma).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[1] < w[0]), "β={beta} γ={gamma}");
        }
        assert!(exp_tail_bound(0, 1.0, 1.0).is_err());
        assert!(exp_tail_bound(1, 1.0, 0.0).is_err());
        assert!(exp_tail_bound(1, -1.0, 1.0).is_err());
    }

    #[test]
    fn rates_and_ranks() {
        let p2 = DecayHypothesis::polynomial(2.0, 0.0).unwrap();
        assert_abs_diff_eq!(theorem1_rate(10_000, &p2).unwrap(), 0.092103, epsilon = 5e-7);
        let e = DecayHypothesis::exponential(0.9624237, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(theorem1_rate(1000, &e).unwrap(), 0.001, epsilon = 1e-15);
        assert_eq!(required_rank(1000, &e, 1.0).unwrap(), 8);
        assert_eq!(required_rank(100, &p2, 1.0).unwrap(), 10);
        assert_eq!(required_rank(101, &p2, 1.0).unwrap(), 11);
        let n = 1000usize;
        let limit = (n as f64).ln() / n as f64;
        let mut prev = f64::INFINITY;
        for alpha in [2.0, 5.0, 20.0, 200.0] {
            let r = theorem1_rate(n, &DecayHypothesis::polynomial(alpha, 0.0).unwrap()).unwrap();
            assert!(r > limit && r < prev);
            prev = r;
        }
        assert!(theorem1_rate(1, &e).is_err());
    }

    #[test]
    fn required_rank_monotone_in_n() {
        let hyps = [
            DecayHypothesis::polynomial(2.5, 0.5).unwrap(),
            DecayHypothesis::exponential(0.7, 0.5, 0.1).unwrap(),
        ];
        for h in &hyps {
            let ranks: Vec<usize> = (2..5000).step_by(7).map(|n| required_rank(n, h, 1.5).unwrap()).collect();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
            let rates: Vec<f64> = (10..5000).step_by(7).map(|n| theorem1_rate(n, h).unwrap()).collect();
            assert!(rates.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn eigengap_examples() {
        assert_eq!(eigengap_sup(&[3.0, 1.0, 1.0], 1).unwrap(), 2.0);
        assert_eq!(eigengap_sup(&[3.0, 1.0, 1.0], 2).unwrap(), 0.0);
        assert!(eigengap_sup(&[3.0, 1.0], 2).is_err());
        assert!(eigengap_sup(&[3.0, 1.0], 0).is_err());
        let s = ups2();
        let list: Vec<f64> = (0..30).map(|j| rbf_gaussian_eigenvalue(j, &s).unwrap()).collect();
        for i in 1..20 {
            let expect = s.c() * s.q().powi(i as i32 - 1) * (1.0 - s.q());
            assert_abs_diff_eq!(eigengap_sup(&list, i).unwrap(), expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn gamma_quantity_zero_only_for_closed_forms() {
        let spectrum = AnalyticSpectrum::GaussianRbf(ups2());
        let list = spectrum.leading_eigenvalues(10).unwrap();
        for i in 1..9 {
            let h = hypothesis_quantities(&list, i, Some(&spectrum)).unwrap();
            assert_eq!(h.gamma, 0.0);
        }
        let sphere = AnalyticSpectrum::Sphere(SphereSpectrumParams::polynomial(3, 2.0).unwrap());
        assert_eq!(hypothesis_quantities(&list, 1, Some(&sphere)).unwrap().gamma, 0.0);
        assert!(matches!(hypothesis_quantities(&list, 1, None), Err(Error::Capability(_))));
        assert!(matches!(sphere.leading_eigenvalues(3), Err(Error::Capability(_))));
    }
}
