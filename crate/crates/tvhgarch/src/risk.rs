//! One-day-ahead VaR forecasting, exception extraction, and the three
//! likelihood-ratio backtests (unconditional coverage, independence,
//! conditional coverage), plus fit/forecast quality metrics.
//!
//! VaR_t(ρ) = F⁻¹(ρ)·σ_t with σ_t the one-step-ahead conditional standard
//! deviation; F⁻¹ is either the standard normal quantile or the empirical
//! quantile of in-sample standardized residuals. All three LR statistics
//! use the exact likelihood forms below, under which LR_CC = LR_UC + LR_IND
//! holds as an algebraic identity; 0·log 0 ≡ 0 throughout.

use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::statfn::{chi2_sf, norm_quantile, LN_2PI};
use crate::volmodel::filter_variance_with_presample;

/// χ²(1) and χ²(2) critical values at the 5% level used for pass markers.
pub const CHI2_CRIT_DF1: f64 = 3.84;
pub const CHI2_CRIT_DF2: f64 = 5.99;

/// Where F⁻¹ comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileSource {
    /// Standard normal quantile (the fitting assumed Gaussian innovations).
    Gaussian,
    /// Empirical quantile of in-sample standardized residuals y_t/σ_t.
    Empirical,
}

/// One-day-ahead forecast standard deviations and VaR paths per level.
#[derive(Debug, Clone)]
pub struct VarForecastSeries {
    pub sigma: Vec<f64>,
    pub levels: Vec<f64>,
    /// `var[k][t]` is VaR_t at level `levels[k]`; negative loss thresholds.
    pub var: Vec<Vec<f64>>,
    pub quantile_source: QuantileSource,
}

/// Rolls the fitted filter through the out-of-sample period with parameters
/// frozen and history growing, then scales quantiles into VaR paths.
pub fn forecast_var(
    y_insample: &[f64],
    y_outsample: &[f64],
    fit: &FitResult,
    levels: &[f64],
    quantile_source: QuantileSource,
) -> Result<VarForecastSeries> {
    if !fit.converged {
        return Err(Error::Numerical(
            "forecasting requires a converged fit".into(),
        ));
    }
    if y_insample.is_empty() || y_outsample.is_empty() {
        return Err(Error::InsufficientData(
            "need non-empty in-sample and out-of-sample segments".into(),
        ));
    }
    if levels.is_empty() {
        return Err(Error::Domain("no VaR levels requested".into()));
    }
    for &rho in levels {
        if !(rho > 0.0 && rho < 0.5) {
            return Err(Error::Domain(format!(
                "VaR level must lie in (0, 0.5), got {rho}"
            )));
        }
    }

    // history grows through the forecast period; the presample proxy stays
    // the in-sample mean (parameters and conventions frozen at fit time)
    let presample = y_insample.iter().map(|v| v * v).sum::<f64>() / y_insample.len() as f64;
    let full: Vec<f64> = y_insample
        .iter()
        .chain(y_outsample.iter())
        .copied()
        .collect();
    let path = filter_variance_with_presample(&full, &fit.params, fit.truncation, presample)?;
    let split = y_insample.len();
    let sigma: Vec<f64> = path.h[split..].iter().map(|&h| h.sqrt()).collect();

    let quantile_at = |rho: f64| -> Result<f64> {
        match quantile_source {
            QuantileSource::Gaussian => norm_quantile(rho),
            QuantileSource::Empirical => {
                let mut z: Vec<f64> = y_insample
                    .iter()
                    .zip(path.h[..split].iter())
                    .map(|(&y, &h)| y / h.sqrt())
                    .collect();
                z.sort_by(|a, b| a.partial_cmp(b).unwrap());
                Ok(empirical_quantile(&z, rho))
            }
        }
    };

    let mut var = Vec::with_capacity(levels.len());
    for &rho in levels {
        let q = quantile_at(rho)?;
        if !(q < 0.0) {
            return Err(Error::Numerical(format!(
                "quantile F^-1({rho}) = {q} is not negative; VaR would not be a loss threshold"
            )));
        }
        var.push(sigma.iter().map(|&s| q * s).collect());
    }

    Ok(VarForecastSeries {
        sigma,
        levels: levels.to_vec(),
        var,
        quantile_source,
    })
}

/// Linear-interpolation empirical quantile of an ascending-sorted sample.
pub(crate) fn empirical_quantile(sorted: &[f64], rho: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n >= 1);
    let pos = rho * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Exception indicators: I_t = 1 iff y_t < VaR_t (strict; a return exactly
/// on the threshold is not an exception).
pub fn exceptions(y_outsample: &[f64], var_path: &[f64]) -> Result<Vec<bool>> {
    if y_outsample.len() != var_path.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} returns vs {} VaR values",
            y_outsample.len(),
            var_path.len()
        )));
    }
    Ok(y_outsample
        .iter()
        .zip(var_path.iter())
        .map(|(&y, &v)| y < v)
        .collect())
}

/// Transition counts over consecutive exception indicators (t = 2..T).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transitions {
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl Transitions {
    pub fn count(indicators: &[bool]) -> Transitions {
        let mut t = Transitions {
            n00: 0,
            n01: 0,
            n10: 0,
            n11: 0,
        };
        for pair in indicators.windows(2) {
            match (pair[0], pair[1]) {
                (false, false) => t.n00 += 1,
                (false, true) => t.n01 += 1,
                (true, false) => t.n10 += 1,
                (true, true) => t.n11 += 1,
            }
        }
        t
    }

    pub fn total(&self) -> usize {
        self.n00 + self.n01 + self.n10 + self.n11
    }
}

#[inline]
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

fn clamp_stat(stat: f64) -> f64 {
    debug_assert!(stat > -1e-9, "LR statistic {stat} too negative");
    stat.max(0.0)
}

/// Kupiec unconditional-coverage statistic and its χ²(1) p-value:
/// LR_UC = −2 log( ρⁿ(1−ρ)^{T−n} / (ξ̂ⁿ(1−ξ̂)^{T−n}) ), ξ̂ = n/T.
pub fn lr_uc(t: usize, n: usize, rho: f64) -> (f64, f64) {
    assert!(t >= 1 && n <= t, "lr_uc requires 0 <= n <= T, T >= 1");
    assert!(rho > 0.0 && rho < 1.0, "lr_uc requires 0 < rho < 1");
    let tf = t as f64;
    let nf = n as f64;
    let xi = nf / tf;
    let ll_null = xlogy(nf, rho) + xlogy(tf - nf, 1.0 - rho);
    let ll_alt = xlogy(nf, xi) + xlogy(tf - nf, 1.0 - xi);
    let stat = clamp_stat(-2.0 * (ll_null - ll_alt));
    (stat, chi2_sf(stat, 1).expect("stat >= 0"))
}

/// Christoffersen independence test outcome.
#[derive(Debug, Clone, Copy)]
pub struct IndOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub transitions: Transitions,
    /// Set when a transition state is unobserved (e.g. no exceptions); the
    /// corresponding likelihood factor contributes 1 by convention.
    pub degenerate: bool,
}

/// LR_IND = −2 log( ξ̂ⁿ(1−ξ̂)^{T−n} / (ξ̂₀₁^{n01}(1−ξ̂₀₁)^{n00} ξ̂₁₁^{n11}(1−ξ̂₁₁)^{n10}) ).
pub fn lr_ind(indicators: &[bool]) -> IndOutcome {
    assert!(indicators.len() >= 2, "lr_ind requires length >= 2");
    let t = indicators.len();
    let n = indicators.iter().filter(|&&b| b).count();
    let trans = Transitions::count(indicators);
    let (ll_markov, degenerate_markov) = markov_loglik(&trans);

    let tf = t as f64;
    let nf = n as f64;
    let xi = nf / tf;
    let ll_bernoulli = xlogy(nf, xi) + xlogy(tf - nf, 1.0 - xi);

    let stat = clamp_stat(-2.0 * (ll_bernoulli - ll_markov));
    IndOutcome {
        statistic: stat,
        p_value: chi2_sf(stat, 1).expect("stat >= 0"),
        transitions: trans,
        degenerate: degenerate_markov || n == 0 || n == t,
    }
}

/// Maximized first-order Markov log-likelihood over the T−1 transitions;
/// unobserved source states contribute a factor of 1.
fn markov_loglik(trans: &Transitions) -> (f64, bool) {
    let mut ll = 0.0;
    let mut degenerate = false;
    let from0 = trans.n00 + trans.n01;
    if from0 > 0 {
        let xi01 = trans.n01 as f64 / from0 as f64;
        ll += xlogy(trans.n01 as f64, xi01) + xlogy(trans.n00 as f64, 1.0 - xi01);
    } else {
        degenerate = true;
    }
    let from1 = trans.n10 + trans.n11;
    if from1 > 0 {
        let xi11 = trans.n11 as f64 / from1 as f64;
        ll += xlogy(trans.n11 as f64, xi11) + xlogy(trans.n10 as f64, 1.0 - xi11);
    } else {
        degenerate = true;
    }
    (ll, degenerate)
}

/// LR_CC = −2 log( ρⁿ(1−ρ)^{T−n} / (ξ̂₀₁^{n01}(1−ξ̂₀₁)^{n00} ξ̂₁₁^{n11}(1−ξ̂₁₁)^{n10}) ),
/// χ²(2); equal to LR_UC + LR_IND by construction.
pub fn lr_cc(t: usize, n: usize, rho: f64, indicators: &[bool]) -> (f64, f64) {
    assert!(indicators.len() == t && n <= t && t >= 2);
    assert!(rho > 0.0 && rho < 1.0);
    let trans = Transitions::count(indicators);
    let (ll_markov, _) = markov_loglik(&trans);
    let tf = t as f64;
    let nf = n as f64;
    let ll_null = xlogy(nf, rho) + xlogy(tf - nf, 1.0 - rho);
    let stat = clamp_stat(-2.0 * (ll_null - ll_markov));
    (stat, chi2_sf(stat, 2).expect("stat >= 0"))
}

/// Full backtest of one exception sequence at one level.
#[derive(Debug, Clone)]
pub struct BacktestReport {
    pub rho: f64,
    pub t: usize,
    /// Exception count n.
    pub n: usize,
    /// Expected exceptions ρT.
    pub expected: f64,
    pub transitions: Transitions,
    pub xi_hat: f64,
    pub xi01_hat: Option<f64>,
    pub xi11_hat: Option<f64>,
    pub lr_uc: f64,
    pub p_uc: f64,
    pub lr_ind: f64,
    pub p_ind: f64,
    pub lr_cc: f64,
    pub p_cc: f64,
    /// Pass markers at the 5% level (3.84 for UC/IND, 5.99 for CC).
    pub pass_uc: bool,
    pub pass_ind: bool,
    pub pass_cc: bool,
    pub ind_degenerate: bool,
}

pub fn backtest(indicators: &[bool], rho: f64) -> Result<BacktestReport> {
    if indicators.len() < 2 {
        return Err(Error::InsufficientData(
            "backtest needs at least 2 forecasts".into(),
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("level must be in (0,1), got {rho}")));
    }
    let t = indicators.len();
    let n = indicators.iter().filter(|&&b| b).count();
    let (uc, p_uc) = lr_uc(t, n, rho);
    let ind = lr_ind(indicators);
    let (cc, p_cc) = lr_cc(t, n, rho, indicators);
    let trans = ind.transitions;
    let from0 = trans.n00 + trans.n01;
    let from1 = trans.n10 + trans.n11;
    Ok(BacktestReport {
        rho,
        t,
        n,
        expected: rho * t as f64,
        transitions: trans,
        xi_hat: n as f64 / t as f64,
        xi01_hat: (from0 > 0).then(|| trans.n01 as f64 / from0 as f64),
        xi11_hat: (from1 > 0).then(|| trans.n11 as f64 / from1 as f64),
        lr_uc: uc,
        p_uc,
        lr_ind: ind.statistic,
        p_ind: ind.p_value,
        lr_cc: cc,
        p_cc,
        pass_uc: uc < CHI2_CRIT_DF1,
        pass_ind: ind.statistic < CHI2_CRIT_DF1,
        pass_cc: cc < CHI2_CRIT_DF2,
        ind_degenerate: ind.degenerate,
    })
}

/// RMSE of h against squared returns and the log-likelihood value:
/// RMSE = √(mean (y² − h)²), LLV = −½ Σ (ln 2π + ln h + y²/h).
pub fn fit_metrics(y: &[f64], h: &[f64]) -> Result<(f64, f64)> {
    if y.len() != h.len() || y.is_empty() {
        return Err(Error::Domain("series and variance path must align".into()));
    }
    if h.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("variance path must be strictly positive".into()));
    }
    let mut sq = 0.0;
    let mut llv = 0.0;
    for (&yt, &ht) in y.iter().zip(h.iter()) {
        let y2 = yt * yt;
        let dev = y2 - ht;
        sq += dev * dev;
        llv += LN_2PI + ht.ln() + y2 / ht;
    }
    Ok(((sq / y.len() as f64).sqrt(), -0.5 * llv))
}

/// Sample moments of a return series. Kurtosis is reported both raw and as
/// excess (raw − 3); tables label which one is which.
#[derive(Debug, Clone, Copy)]
pub struct DescriptiveStats {
    pub mean: f64,
    /// Sample standard deviation (n−1 denominator).
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// m₃/m₂^{3/2} with population central moments.
    pub skewness: f64,
    /// m₄/m₂², present when n ≥ 4.
    pub kurtosis_raw: Option<f64>,
    /// m₄/m₂² − 3, present when n ≥ 4.
    pub kurtosis_excess: Option<f64>,
}

pub fn descriptive_stats(y: &[f64]) -> Result<DescriptiveStats> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "descriptive statistics need at least 2 observations".into(),
        ));
    }
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in y {
        let dev = v - mean;
        let dev2 = dev * dev;
        m2 += dev2;
        m3 += dev2 * dev;
        m4 += dev2 * dev2;
        min = min.min(v);
        max = max.max(v);
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    let kurtosis_raw = (n >= 4 && m2 > 0.0).then(|| m4 / (m2 * m2));
    Ok(DescriptiveStats {
        mean,
        std_dev,
        min,
        max,
        skewness,
        kurtosis_raw,
        kurtosis_excess: kurtosis_raw.map(|k| k - 3.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianRng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uc_reproduces_paper_values() {
        // VaR(0.05) column of the empirical backtest table; mpmath oracle
        // values alongside
        let (a, _) = lr_uc(500, 21, 0.05);
        assert!((a - 0.711).abs() <= 0.001, "{a}");
        assert_abs_diff_eq!(a, 0.710_747_794_389_851_7, epsilon = 1e-12);
        let (b, _) = lr_uc(500, 16, 0.05);
        assert!((b - 3.890).abs() <= 0.01, "{b}");
        assert_abs_diff_eq!(b, 3.888_272_112_057_378_5, epsilon = 1e-12);
        let (c, _) = lr_uc(500, 13, 0.05);
        assert!((c - 7.298).abs() <= 0.01, "{c}");
        assert_abs_diff_eq!(c, 7.298_548_600_128_655, epsilon = 1e-12);
    }

    #[test]
    fn uc_zero_at_exact_coverage() {
        let (stat, p) = lr_uc(500, 25, 0.05);
        assert_abs_diff_eq!(stat, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uc_degenerate_counts() {
        let (zero, _) = lr_uc(100, 0, 0.05);
        assert!(zero.is_finite() && zero > 0.0);
        let (full, _) = lr_uc(100, 100, 0.05);
        assert!(full.is_finite() && full > 0.0);
    }

    #[test]
    fn ind_all_zeros_degenerate() {
        let seq = vec![false; 50];
        let out = lr_ind(&seq);
        assert_abs_diff_eq!(out.statistic, 0.0, epsilon = 1e-12);
        assert!(out.degenerate);
    }

    /// Brute-force oracle: recompute both likelihoods longhand from the
    /// counted transitions.
    #[test]
    fn ind_matches_direct_likelihood_evaluation() {
        let seq = [
            false, true, true, false, true, true, false, true, true,
        ];
        let out = lr_ind(&seq);
        let trans = out.transitions;
        assert_eq!(
            (trans.n00, trans.n01, trans.n10, trans.n11),
            (0, 3, 2, 3)
        );
        let t = seq.len() as f64;
        let n = 6.0;
        let xi = n / t;
        let num = xi.powf(n) * (1.0 - xi).powf(t - n);
        let xi01 = 3.0_f64 / 3.0;
        let xi11 = 3.0_f64 / 5.0;
        // xi01 = 1 makes (1-xi01)^n00 = 0^0 = 1
        let den = xi01.powf(3.0) * xi11.powf(3.0) * (1.0 - xi11).powf(2.0);
        let expect = -2.0 * (num / den).ln();
        assert_abs_diff_eq!(out.statistic, expect, epsilon = 1e-10);
    }

    #[test]
    fn ind_detects_clustering() {
        let mut seq = vec![false; 25];
        seq.extend(vec![true; 25]);
        let out = lr_ind(&seq);
        assert!(
            out.statistic > CHI2_CRIT_DF1,
            "clustered run should reject: {}",
            out.statistic
        );
    }

    #[test]
    fn cc_is_sum_of_uc_and_ind() {
        let mut rng = GaussianRng::seed_from(55);
        for _ in 0..50 {
            let seq: Vec<bool> = (0..200).map(|_| rng.next_uniform() < 0.08).collect();
            let n = seq.iter().filter(|&&b| b).count();
            let (uc, _) = lr_uc(seq.len(), n, 0.05);
            let ind = lr_ind(&seq);
            let (cc, _) = lr_cc(seq.len(), n, 0.05, &seq);
            assert_abs_diff_eq!(cc, uc + ind.statistic, epsilon = 1e-8);
        }
    }

    #[test]
    fn cc_equals_uc_when_no_exceptions() {
        let seq = vec![false; 100];
        let (uc, _) = lr_uc(100, 0, 0.05);
        let (cc, _) = lr_cc(100, 0, 0.05, &seq);
        assert_abs_diff_eq!(cc, uc, epsilon = 1e-12);
    }

    #[test]
    fn statistics_depend_only_on_counts() {
        // same n, T and transition counts, different labelings
        let a = [false, false, true, true, false];
        let b = [false, true, true, false, false];
        let ta = Transitions::count(&a);
        let tb = Transitions::count(&b);
        assert_eq!(ta, tb);
        assert_eq!(lr_ind(&a).statistic, lr_ind(&b).statistic);
        let (cca, _) = lr_cc(5, 2, 0.05, &a);
        let (ccb, _) = lr_cc(5, 2, 0.05, &b);
        assert_eq!(cca, ccb);
    }

    #[test]
    fn exception_count_identity() {
        let mut rng = GaussianRng::seed_from(77);
        let seq: Vec<bool> = (0..300).map(|_| rng.next_uniform() < 0.1).collect();
        let trans = Transitions::count(&seq);
        let n = seq.iter().filter(|&&b| b).count();
        let first = usize::from(seq[0]);
        assert_eq!(n, trans.n01 + trans.n11 + first);
        assert_eq!(trans.total(), seq.len() - 1);
    }

    #[test]
    fn exceptions_strict_inequality() {
        let y = [1.0, -2.0, -1.5, 0.0];
        let var = [-1.5, -1.5, -1.5, -1.5];
        let e = exceptions(&y, &var).unwrap();
        assert_eq!(e, vec![false, true, false, false]); // tie at -1.5 is not an exception
        assert!(exceptions(&y, &var[..3]).is_err());
    }

    #[test]
    fn exceptions_none_when_returns_above() {
        let y = [1.0; 20];
        let var = [-1.0; 20];
        let e = exceptions(&y, &var).unwrap();
        assert_eq!(e.iter().filter(|&&b| b).count(), 0);
    }

    #[test]
    fn uc_size_under_bernoulli_exceptions() {
        // i.i.d. Bernoulli(rho) indicators: UC should reject near the
        // nominal 5% rate
        let mut rng = GaussianRng::seed_from(2024);
        let reps = 1000;
        let t = 500;
        let rho = 0.05;
        let mut rejections = 0;
        for _ in 0..reps {
            let n = (0..t).filter(|_| rng.next_uniform() < rho).count();
            let (stat, _) = lr_uc(t, n, rho);
            if stat > CHI2_CRIT_DF1 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!(
            (0.03..=0.08).contains(&rate),
            "UC empirical size {rate} outside [0.03, 0.08]"
        );
    }

    #[test]
    fn empirical_quantile_of_normal_grid() {
        // residuals exactly quantile-spaced: the 5% empirical quantile sits
        // within 0.05 of the true -1.6449
        let n = 1000;
        let z: Vec<f64> = (1..=n)
            .map(|i| crate::statfn::norm_quantile((i as f64 - 0.5) / n as f64).unwrap())
            .collect();
        let q = empirical_quantile(&z, 0.05);
        assert!((q - (-1.6449)).abs() < 0.05, "{q}");
    }

    #[test]
    fn forecast_var_scales_quantiles() {
        use crate::estimate::{fit, FitConfig, Variant};
        use crate::simulate::{simulate_path, SimConfig};
        use crate::volmodel::{AmplitudeSpec, ModelParams};

        let params = ModelParams {
            gamma: 0.3,
            beta: vec![0.4],
            delta: vec![0.2],
            d: 0.7,
            amplitude: AmplitudeSpec::Fixed(1.0),
        };
        let y = simulate_path(&SimConfig::new(params, 700, 40)).unwrap();
        let (y_in, y_out) = y.split_at(500);
        let config = FitConfig {
            multistart: 1,
            ..FitConfig::default()
        };
        let fit_res = fit(y_in, Variant::Figarch, 1, 1, &config).unwrap();

        let levels = [0.05, 0.10];
        let gauss = forecast_var(y_in, y_out, &fit_res, &levels, QuantileSource::Gaussian).unwrap();
        assert_eq!(gauss.sigma.len(), y_out.len());
        let q05 = norm_quantile(0.05).unwrap();
        let q10 = norm_quantile(0.10).unwrap();
        for t in 0..y_out.len() {
            assert!(gauss.sigma[t] > 0.0);
            // VaR is exactly the quantile times sigma; e.g. sigma = 2 gives
            // q * 2 = -3.2897 at the 5% level
            assert_abs_diff_eq!(gauss.var[0][t], q05 * gauss.sigma[t], epsilon = 1e-15);
            assert_abs_diff_eq!(gauss.var[1][t], q10 * gauss.sigma[t], epsilon = 1e-15);
            assert!(gauss.var[0][t] < 0.0 && gauss.var[1][t] < 0.0);
            // quantile monotonicity: the 5% threshold is deeper
            assert!(gauss.var[0][t].abs() > gauss.var[1][t].abs());
        }

        let emp = forecast_var(y_in, y_out, &fit_res, &levels, QuantileSource::Empirical).unwrap();
        for t in 0..y_out.len() {
            assert!(emp.var[0][t] < 0.0);
            assert!(emp.var[0][t].abs() > emp.var[1][t].abs());
        }

        // level domain
        assert!(forecast_var(y_in, y_out, &fit_res, &[0.6], QuantileSource::Gaussian).is_err());
        assert!(forecast_var(y_in, &[], &fit_res, &levels, QuantileSource::Gaussian).is_err());
    }

    #[test]
    fn fit_metrics_examples() {
        // exact variance path: zero RMSE
        let y = [1.0, -2.0, 0.5];
        let h: Vec<f64> = y.iter().map(|v| v * v).collect();
        let (rmse, _) = fit_metrics(&y, &h).unwrap();
        assert_abs_diff_eq!(rmse, 0.0, epsilon = 1e-15);

        let (_, llv) = fit_metrics(&[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(llv, -0.5 * LN_2PI, epsilon = 1e-14);

        // recomputation oracle on arbitrary pairs
        let mut rng = GaussianRng::seed_from(8);
        let y: Vec<f64> = (0..200).map(|_| rng.next_normal()).collect();
        let h: Vec<f64> = (0..200).map(|_| 0.5 + rng.next_uniform()).collect();
        let (rmse, llv) = fit_metrics(&y, &h).unwrap();
        let direct_rmse = (y
            .iter()
            .zip(h.iter())
            .map(|(&a, &b)| (a * a - b) * (a * a - b))
            .sum::<f64>()
            / 200.0)
            .sqrt();
        assert_abs_diff_eq!(rmse, direct_rmse, epsilon = 1e-12);
        assert!(llv.is_finite());

        assert!(fit_metrics(&y, &vec![0.0; 200]).is_err());
    }

    #[test]
    fn descriptive_stats_examples() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(s.mean, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.std_dev, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.min, 1.0);
        assert_abs_diff_eq!(s.max, 3.0);

        let sym = descriptive_stats(&[-1.7, 0.0, 1.7]).unwrap();
        assert_abs_diff_eq!(sym.skewness, 0.0, epsilon = 1e-12);

        assert!(descriptive_stats(&[1.0]).is_err());
        assert!(descriptive_stats(&[1.0, 2.0, 3.0]).unwrap().kurtosis_raw.is_none());
    }

    #[test]
    fn descriptive_stats_gaussian_kurtosis() {
        let mut rng = GaussianRng::seed_from(314159);
        let y: Vec<f64> = (0..100_000).map(|_| rng.next_normal()).collect();
        let s = descriptive_stats(&y).unwrap();
        let excess = s.kurtosis_excess.unwrap();
        assert!(excess.abs() < 0.1, "excess kurtosis {excess}");
        assert_abs_diff_eq!(
            s.kurtosis_raw.unwrap(),
            excess + 3.0,
            epsilon = 1e-12
        );
    }
}
