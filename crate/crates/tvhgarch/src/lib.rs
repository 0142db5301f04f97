//! Long-memory volatility models with a time-varying amplitude.
//!
//! The family covered is the hyperbolic GARCH class in ARCH(∞) form
//! h_t = φ₀ + w_t Σ φ_i y²_{t−i}, where the coefficients come from the
//! fractional filter 1 − δ(B)β(B)⁻¹(1−B)^d:
//!
//! * FIGARCH — fixed amplitude w = 1;
//! * HGARCH — fixed amplitude w ∈ (0,1);
//! * TV-HGARCH — logistic amplitude w_t driven by the previous squared
//!   return.
//!
//! Functionality: conditional-variance filtering ([`volmodel`]),
//! quasi-maximum-likelihood estimation ([`estimate`]), a score test for
//! time-varying amplitude ([`scoretest`]), seeded simulation and Monte
//! Carlo experiment harnesses ([`simulate`]), and VaR forecasting with
//! coverage/independence backtests ([`risk`]). Special functions used by
//! the statistics are implemented in-repo ([`statfn`]).

pub mod error;
pub mod estimate;
pub mod fracdiff;
mod linalg;
pub mod risk;
mod rng;
pub mod scoretest;
pub mod simulate;
pub mod statfn;
pub mod volmodel;

pub use error::{Error, Result};
pub use estimate::{
    fit, fit_fixed_amplitude, neg_avg_loglik, standard_errors, FitConfig, FitResult,
    GradientMode, ParamId, PresampleMode, Variant,
};
pub use fracdiff::{arch_inf_coeffs, frac_weights, tail_bound, ArchInfWeights, FracWeights};
pub use risk::{
    backtest, descriptive_stats, exceptions, fit_metrics, forecast_var, lr_cc, lr_ind, lr_uc,
    BacktestReport, DescriptiveStats, QuantileSource, VarForecastSeries,
};
pub use scoretest::{score_components, score_test, ScoreTestResult};
pub use simulate::{
    mc_estimation_experiment, mc_size_power_experiment, simulate_path, McEstimationReport,
    McSizePowerReport, SimConfig,
};
pub use volmodel::{
    amplitude, check_general_moment_condition, check_second_moment_condition, default_truncation,
    filter_variance, filter_variance_with_presample, AmplitudeSpec, ModelParams, VariancePath,
};
