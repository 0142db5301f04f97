//! Model parameterizations and conditional-variance filtering.
//!
//! The variance process is used in its ARCH(∞) form
//!
//!   h_t = φ₀ + w_t Σ_{i≥1} φ_i y²_{t−i},   φ₀ = γ/β(1),
//!
//! truncated at K lags, with the amplitude w_t either fixed (w = 1 is
//! FIGARCH, w < 1 is HGARCH) or the logistic function of the previous
//! squared return (TV-HGARCH). The ARCH(∞) form is taken as the canonical
//! definition: under a time-varying amplitude the β-recursion form would
//! mix amplitudes at different dates, so the recursion is only used as a
//! constant-amplitude test oracle.
//!
//! Presample squared returns are replaced by a proxy value: the in-sample
//! mean of y² for filtering observed data (a standard backcast), zero when
//! generating from empty history.

use crate::error::{Error, Result};
use crate::fracdiff::{arch_inf_coeffs, frac_weights};

/// Amplitude specification of the ARCH(∞) part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeSpec {
    /// Constant amplitude w ∈ (0,1]; w = 1 reduces the model to FIGARCH.
    Fixed(f64),
    /// Logistic time-varying amplitude w_t = exp(η ỹ_t)/(1+exp(η ỹ_t)) with
    /// transition variable ỹ_t = y²_{t−1}; η = 0 gives w_t ≡ 1/2.
    Logistic(f64),
}

impl AmplitudeSpec {
    /// Amplitude at a given transition value.
    pub fn value(&self, y_prev_sq: f64) -> f64 {
        match *self {
            AmplitudeSpec::Fixed(w) => w,
            AmplitudeSpec::Logistic(eta) => amplitude(eta, y_prev_sq),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            AmplitudeSpec::Fixed(w) => {
                if !(w > 0.0 && w <= 1.0) {
                    return Err(Error::Domain(format!(
                        "fixed amplitude must satisfy 0 < w <= 1, got {w}"
                    )));
                }
            }
            AmplitudeSpec::Logistic(eta) => {
                if !(eta >= 0.0 && eta.is_finite()) {
                    return Err(Error::Domain(format!(
                        "smoothness parameter must satisfy eta >= 0, got {eta}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Shape parameters (γ, β_1..β_p, δ_1..δ_q, d) plus the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    pub d: f64,
    pub amplitude: AmplitudeSpec,
}

impl ModelParams {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn q(&self) -> usize {
        self.delta.len()
    }

    /// β(1) = 1 − Σ β_i, the persistence normalizer of the intercept.
    pub fn beta_at_one(&self) -> f64 {
        1.0 - self.beta.iter().sum::<f64>()
    }

    /// φ₀ = γ/β(1).
    pub fn phi0(&self) -> f64 {
        self.gamma / self.beta_at_one()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(Error::Domain(format!(
                "fractional order must satisfy 0 < d < 1, got {}",
                self.d
            )));
        }
        if self.beta.iter().chain(self.delta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("beta/delta coefficients must be finite".into()));
        }
        let beta1 = self.beta_at_one();
        if beta1 <= 0.0 {
            return Err(Error::Domain(format!(
                "beta(1) = {beta1} must be positive"
            )));
        }
        self.amplitude.validate()
    }

    /// Reports whether all truncated ARCH(∞) coefficients are nonnegative.
    /// This is the fit-time admissibility check; it is not enforced here so
    /// that optimizers can probe boundary regions.
    pub fn is_admissible(&self, truncation: usize) -> Result<bool> {
        Ok(arch_inf_coeffs(self, truncation)?.all_nonnegative())
    }
}

/// Conditional-variance path with the amplitude path alongside.
#[derive(Debug, Clone)]
pub struct VariancePath {
    /// h_1..h_T, strictly positive.
    pub h: Vec<f64>,
    /// w_1..w_T in (0,1]; equals 1 only for the FIGARCH amplitude.
    pub w: Vec<f64>,
}

/// Logistic amplitude exp(η ỹ)/(1+exp(η ỹ)), evaluated as 1/(1+exp(−η ỹ))
/// so large η ỹ saturates to 1 without overflow.
pub fn amplitude(eta: f64, y_prev_sq: f64) -> f64 {
    1.0 / (1.0 + (-eta * y_prev_sq).exp())
}

/// Default lag truncation: min(T−1, 1000), at least 1.
pub fn default_truncation(series_len: usize) -> usize {
    series_len.saturating_sub(1).clamp(1, 1000)
}

/// Filters the conditional-variance path with the presample proxy set to
/// the in-sample mean of y².
pub fn filter_variance(y: &[f64], params: &ModelParams, truncation: usize) -> Result<VariancePath> {
    if y.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    let presample = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
    filter_variance_with_presample(y, params, truncation, presample)
}

/// Variance filter with an explicit presample proxy for y²_s, s ≤ 0.
///
/// The same proxy is used as the transition value ỹ_1 for the first
/// observation's amplitude.
pub fn filter_variance_with_presample(
    y: &[f64],
    params: &ModelParams,
    truncation: usize,
    presample: f64,
) -> Result<VariancePath> {
    params.validate()?;
    if y.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    let coeffs = arch_inf_coeffs(params, truncation)?;
    let engine = FilterEngine::new(&coeffs.phi, coeffs.phi0, presample);
    let y2: Vec<f64> = y.iter().map(|v| v * v).collect();

    let mut h = Vec::with_capacity(y.len());
    let mut w = Vec::with_capacity(y.len());
    for t in 1..=y.len() {
        let ytilde = if t >= 2 { y2[t - 2] } else { presample };
        let wt = params.amplitude.value(ytilde);
        let ht = engine.step(&y2, t, wt)?;
        h.push(ht);
        w.push(wt);
    }
    Ok(VariancePath { h, w })
}

/// One-step evaluation machinery shared by filtering, path derivatives and
/// simulation: lag sums Σ φ_i y²_{t−i} with truncation and presample proxy.
pub(crate) struct FilterEngine {
    /// Reversed coefficients, phirev[j] = φ_{K−j}, so the lag sum is a
    /// forward contiguous dot product.
    phirev: Vec<f64>,
    /// tail[m] = Σ_{i>m} φ_i, the weight carried by the presample proxy.
    tail: Vec<f64>,
    phi0: f64,
    presample: f64,
    truncation: usize,
    floor: f64,
}

impl FilterEngine {
    pub(crate) fn new(phi: &[f64], phi0: f64, presample: f64) -> Self {
        let truncation = phi.len();
        let mut phirev = phi.to_vec();
        phirev.reverse();
        let mut tail = vec![0.0; truncation + 1];
        for m in (0..truncation).rev() {
            tail[m] = tail[m + 1] + phi[m];
        }
        FilterEngine {
            phirev,
            tail,
            phi0,
            presample,
            truncation,
            floor: 1e-12 * phi0,
        }
    }

    /// Σ_{i=1..K} φ_i y²_{t−i} with y² taken from `y2` where observed and
    /// from the presample proxy otherwise; t is 1-based.
    #[inline]
    pub(crate) fn lag_sum(&self, y2: &[f64], t: usize) -> f64 {
        let m = (t - 1).min(self.truncation);
        let k = self.truncation;
        dot(&self.phirev[k - m..], &y2[t - 1 - m..t - 1]) + self.tail[m] * self.presample
    }

    /// h_t = φ₀ + w_t · lag_sum, with the positivity floor enforced.
    #[inline]
    pub(crate) fn step(&self, y2: &[f64], t: usize, wt: f64) -> Result<f64> {
        let ht = self.phi0 + wt * self.lag_sum(y2, t);
        if !ht.is_finite() || ht < self.floor {
            return Err(Error::Numerical(format!(
                "conditional variance fell below the positivity floor at t={t} (h={ht:.6e})"
            )));
        }
        Ok(ht)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of the (1,d,1) second-moment check.
#[derive(Debug, Clone, Copy)]
pub struct SecondMomentCheck {
    pub holds: bool,
    /// (δ+g_1) + Σ_{i=2..K}(g_i − δg_{i−1}); the condition is sum < 1.
    pub sum: f64,
    /// Upper bound γ/(1 − sum) for E y², present when the condition holds.
    pub bound: Option<f64>,
}

/// Evaluates the (1,d,1) sufficient condition for a finite second moment:
/// (δ+g_1) + Σ_{i=2..K}(g_i − δ g_{i−1}) < 1.
///
/// The infinite sum telescopes to exactly 1, so at finite truncation the
/// condition typically holds with a bound that grows with K; it is a
/// diagnostic, not a sharp constant.
pub fn check_second_moment_condition(
    params: &ModelParams,
    truncation: usize,
) -> Result<SecondMomentCheck> {
    if params.p() != 1 || params.q() != 1 {
        return Err(Error::UnsupportedOrders(format!(
            "second-moment condition is stated for (1,d,1); got p={}, q={}",
            params.p(),
            params.q()
        )));
    }
    params.validate()?;
    let delta = params.delta[0];
    let g = frac_weights(params.d, truncation.max(1))?;
    let mut sum = delta + g.g(1);
    for i in 2..=g.truncation() {
        sum += g.g(i) - delta * g.g(i - 1);
    }
    let holds = sum < 1.0;
    let bound = if holds {
        Some(params.gamma / (1.0 - sum))
    } else {
        None
    };
    Ok(SecondMomentCheck { holds, sum, bound })
}

/// Outcome of the general m-th moment check S^m μ_m < 1.
#[derive(Debug, Clone, Copy)]
pub struct GeneralMomentCheck {
    pub holds: bool,
    /// S = Σ_{i≤K} φ_i.
    pub s: f64,
    /// μ_m = E(ε²)^m = (2m−1)!! for standard normal innovations.
    pub mu_m: f64,
}

/// Sufficient condition S^m μ_m < 1 for the m-th moment of y², with
/// Gaussian innovation moments μ_m = (2m−1)!!.
pub fn check_general_moment_condition(
    params: &ModelParams,
    m: u32,
    truncation: usize,
) -> Result<GeneralMomentCheck> {
    if m < 1 {
        return Err(Error::Domain("moment order m must be >= 1".into()));
    }
    params.validate()?;
    let coeffs = arch_inf_coeffs(params, truncation)?;
    let s = coeffs.tail_mass;
    let mut mu_m = 1.0;
    for j in 1..=m {
        mu_m *= (2 * j - 1) as f64;
    }
    let holds = s.powi(m as i32) * mu_m < 1.0;
    Ok(GeneralMomentCheck { holds, s, mu_m })
}
