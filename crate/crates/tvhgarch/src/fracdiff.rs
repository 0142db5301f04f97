//! Fractional differencing weights and the ARCH(∞) coefficients of the
//! long-memory filter 1 − δ(B)β(B)⁻¹(1−B)^d.
//!
//! The binomial weights of (1−B)^d = 1 − Σ g_i B^i are
//! g_i = dΓ(i−d)/(Γ(1−d)Γ(i+1)); they are generated by the ratio recursion
//! g_1 = d, g_i = g_{i−1}(i−1−d)/i, which never evaluates Γ at large
//! arguments. The ratio filter's series is then obtained by convolving with
//! δ(B) and long-dividing by β(B).

use crate::error::{Error, Result};
use crate::volmodel::ModelParams;

/// Truncated weights g_1..g_K of (1−B)^d.
#[derive(Debug, Clone)]
pub struct FracWeights {
    pub d: f64,
    /// `weights[i]` holds g_{i+1}.
    pub weights: Vec<f64>,
}

impl FracWeights {
    /// 1-based accessor: g(i) = g_i.
    pub fn g(&self, i: usize) -> f64 {
        self.weights[i - 1]
    }

    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    pub fn partial_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Truncated ARCH(∞) coefficients of 1 − δ(B)β(B)⁻¹(1−B)^d.
#[derive(Debug, Clone)]
pub struct ArchInfWeights {
    /// Intercept φ₀ = γ/β(1).
    pub phi0: f64,
    /// `phi[i]` holds φ_{i+1}.
    pub phi: Vec<f64>,
    /// S_K = Σ_{i≤K} φ_i, monitored against the full-series mass S.
    pub tail_mass: f64,
}

impl ArchInfWeights {
    pub fn truncation(&self) -> usize {
        self.phi.len()
    }

    /// Smallest coefficient; negative values signal an inadmissible
    /// parameter point. Negativity is reported, not rejected, here — the
    /// optimizer decides what to do with boundary probes.
    pub fn min_coeff(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.phi.iter().all(|&v| v >= 0.0)
    }
}

/// Fractional-differencing weights g_1..g_K by the stable ratio recursion.
pub fn frac_weights(d: f64, truncation: usize) -> Result<FracWeights> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order must satisfy 0 < d < 1, got {d}"
        )));
    }
    if truncation < 1 {
        return Err(Error::Domain("truncation K must be >= 1".into()));
    }
    let mut weights = Vec::with_capacity(truncation);
    weights.push(d);
    for i in 2..=truncation {
        let prev = weights[i - 2];
        weights.push(prev * (i as f64 - 1.0 - d) / i as f64);
    }
    Ok(FracWeights { d, weights })
}

/// First K coefficients of the ARCH(∞) representation.
///
/// Steps: convolve (1 − Σδ_j B^j) with (1 − Σ g_i B^i), long-divide by
/// β(B) via the linear recurrence c_k = a_k + Σ β_i c_{k−i}, then negate
/// the order ≥ 1 coefficients. The intercept is φ₀ = γ/β(1).
pub fn arch_inf_coeffs(params: &ModelParams, truncation: usize) -> Result<ArchInfWeights> {
    let series = ratio_series(params, truncation)?;
    let phi: Vec<f64> = series.c[1..].iter().map(|&c| -c).collect();
    let tail_mass = phi.iter().sum();
    Ok(ArchInfWeights {
        phi0: params.gamma / params.beta_at_one(),
        phi,
        tail_mass,
    })
}

/// Upper estimate of the truncated tail Σ_{i>K} φ_i from the hyperbolic
/// decay g_i ~ c·i^{−(1+d)}: since φ_i i^{1+d} decreases toward its limit,
/// Σ_{i>K} φ_i ≤ φ_K K^{1+d} ∫_K^∞ x^{−(1+d)} dx = φ_K·K/d.
pub fn tail_bound(weights: &ArchInfWeights, d: f64) -> f64 {
    let k = weights.truncation();
    debug_assert!(k >= 2);
    let last = weights.phi[k - 1].abs();
    last * k as f64 / d
}

// Power series c_0..c_K of δ(B)β(B)⁻¹(1−B)^d, kept around because the
// analytic coefficient derivatives reuse it.
pub(crate) struct RatioSeries {
    /// c_k of δ(B)β(B)⁻¹(1−B)^d; c_0 = 1, φ_k = −c_k for k ≥ 1.
    pub c: Vec<f64>,
    /// G_k of (1−B)^d; G_0 = 1, G_k = −g_k.
    pub g_series: Vec<f64>,
}

pub(crate) fn ratio_series(params: &ModelParams, truncation: usize) -> Result<RatioSeries> {
    if truncation < 1 {
        return Err(Error::Domain("truncation K must be >= 1".into()));
    }
    let beta1 = params.beta_at_one();
    if beta1 <= 0.0 {
        return Err(Error::Domain(format!(
            "beta(1) = {beta1} must be positive"
        )));
    }
    let g = frac_weights(params.d, truncation)?;

    // G_k of (1-B)^d
    let mut g_series = Vec::with_capacity(truncation + 1);
    g_series.push(1.0);
    g_series.extend(g.weights.iter().map(|&v| -v));

    // a_k of delta(B) * (1-B)^d
    let mut a = g_series.clone();
    for (j, &dj) in params.delta.iter().enumerate() {
        let lag = j + 1;
        for k in lag..=truncation {
            a[k] -= dj * g_series[k - lag];
        }
    }

    // c_k of a(B) / beta(B): long-division recurrence
    let mut c = a;
    for k in 1..=truncation {
        let mut acc = c[k];
        for (i, &bi) in params.beta.iter().enumerate() {
            let lag = i + 1;
            if lag > k {
                break;
            }
            acc += bi * c[k - lag];
        }
        c[k] = acc;
    }

    Ok(RatioSeries { c, g_series })
}

/// Analytic derivatives of (φ₀, φ_1..φ_K) with respect to the shape
/// parameters, ordered [γ, β_1..β_p, δ_1..δ_q, d].
///
/// Obtained from exact series identities: with C = δ(B)β(B)⁻¹(1−B)^d,
///   ∂C/∂β_i = B^i C/β(B),  ∂C/∂δ_j = −B^j (1−B)^d/β(B),
///   ∂C/∂d = C·ln(1−B) = −C(B)·Σ_{m≥1} B^m/m.
pub(crate) struct CoeffGradient {
    /// `dphi0[j]` = ∂φ₀/∂θ_j.
    pub dphi0: Vec<f64>,
    /// `dphi[j][i]` = ∂φ_{i+1}/∂θ_j.
    pub dphi: Vec<Vec<f64>>,
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn coeff_gradient(params: &ModelParams, truncation: usize) -> Result<CoeffGradient> {
    let series = ratio_series(params, truncation)?;
    let c = &series.c;
    let g_series = &series.g_series;
    let p = params.beta.len();
    let q = params.delta.len();
    let beta1 = params.beta_at_one();
    let k_max = truncation;

    // divide a series by beta(B) in place of a fresh vector
    let div_beta = |src: &[f64]| -> Vec<f64> {
        let mut out = src.to_vec();
        for k in 1..=k_max {
            let mut acc = out[k];
            for (i, &bi) in params.beta.iter().enumerate() {
                let lag = i + 1;
                if lag > k {
                    break;
                }
                acc += bi * out[k - lag];
            }
            out[k] = acc;
        }
        out
    };

    let e = div_beta(g_series); // (1-B)^d / beta(B)
    let f = div_beta(c); // C / beta(B)

    let n_params = 2 + p + q;
    let mut dphi0 = vec![0.0; n_params];
    let mut dphi = vec![vec![0.0; k_max]; n_params];

    // gamma
    dphi0[0] = 1.0 / beta1;

    // beta_i: dphi_k = -f_{k-i}, dphi0 = gamma / beta(1)^2
    for i in 1..=p {
        dphi0[i] = params.gamma / (beta1 * beta1);
        for k in i..=k_max {
            dphi[i][k - 1] = -f[k - i];
        }
    }

    // delta_j: dphi_k = e_{k-j}, i.e. the E series shifted by j
    for j in 1..=q {
        dphi[p + j][j - 1..k_max].copy_from_slice(&e[..k_max - j + 1]);
    }

    // d: dphi_k = sum_{m=1..k} c_{k-m} / m
    let d_row = &mut dphi[1 + p + q];
    for k in 1..=k_max {
        let mut acc = 0.0;
        for m in 1..=k {
            acc += c[k - m] / m as f64;
        }
        d_row[k - 1] = acc;
    }

    Ok(CoeffGradient { dphi0, dphi })
}
