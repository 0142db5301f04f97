//! Subcommand implementations: the fit/test/forecast/backtest workflow,
//! the Monte Carlo experiments, and path simulation.

use tvhgarch::estimate::{fit, standard_errors, FitResult, ParamId};
use tvhgarch::risk::{
    backtest, descriptive_stats, exceptions, fit_metrics, forecast_var, BacktestReport,
    VarForecastSeries,
};
use tvhgarch::scoretest::score_test;
use tvhgarch::simulate::{
    mc_estimation_experiment, mc_size_power_experiment, simulate_path, SimConfig,
};
use tvhgarch::volmodel::filter_variance_with_presample;
use tvhgarch::{AmplitudeSpec, Error, ModelParams, Variant};

use crate::config::RunConfig;
use crate::data::{demean, read_series};
use crate::errors::{CliError, CliResult};
use crate::output::{g17, OutDir};

fn load_series(config: &RunConfig) -> CliResult<Vec<f64>> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("no input file given (use --input)".into()))?;
    let mut y = read_series(path, config.column.as_deref())?;
    if config.demean {
        demean(&mut y);
    }
    Ok(y)
}

fn in_sample<'a>(y: &'a [f64], config: &RunConfig) -> CliResult<&'a [f64]> {
    if config.split == 0 {
        return Err(CliError::Usage("split must be positive".into()));
    }
    Ok(&y[..config.split.min(y.len())])
}

fn split_sample<'a>(y: &'a [f64], config: &RunConfig) -> CliResult<(&'a [f64], &'a [f64])> {
    if config.split >= y.len() {
        return Err(CliError::Data(format!(
            "split {} leaves no out-of-sample data (series length {})",
            config.split,
            y.len()
        )));
    }
    Ok(y.split_at(config.split))
}

fn variant_slug(v: Variant) -> &'static str {
    match v {
        Variant::Figarch => "figarch",
        Variant::Hgarch => "hgarch",
        Variant::TvHgarch => "tv-hgarch",
    }
}

struct VariantFit {
    variant: Variant,
    outcome: Result<FitResult, String>,
}

fn fit_all(y_in: &[f64], config: &RunConfig) -> Vec<VariantFit> {
    let fit_config = config.fit_config();
    config
        .variants
        .iter()
        .map(|&variant| VariantFit {
            variant,
            outcome: fit(y_in, variant, config.p, config.q, &fit_config)
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// Canonical parameter-row order for the estimate table.
fn param_rows(config: &RunConfig) -> Vec<(String, ParamId)> {
    let mut rows: Vec<(String, ParamId)> = vec![("gamma".into(), ParamId::Gamma)];
    for i in 0..config.p {
        rows.push((format!("beta{}", i + 1), ParamId::Beta(i)));
    }
    for j in 0..config.q {
        rows.push((format!("delta{}", j + 1), ParamId::Delta(j)));
    }
    rows.push(("d".into(), ParamId::D));
    rows.push(("eta".into(), ParamId::Eta));
    rows.push(("w".into(), ParamId::W));
    rows
}

fn param_cell(fit: &FitResult, id: ParamId) -> Option<f64> {
    if fit.free.contains(&id) {
        Some(id.get(&fit.params))
    } else {
        None
    }
}

fn fit_tables(
    fits: &[VariantFit],
    y_in: &[f64],
    config: &RunConfig,
) -> CliResult<(String, String, String)> {
    let rows = param_rows(config);
    // CSV: parameter per row, one column per variant (empty when absent)
    let mut csv = String::from("parameter");
    for vf in fits {
        csv.push_str(&format!(",{}", variant_slug(vf.variant)));
    }
    csv.push('\n');
    for (name, id) in &rows {
        csv.push_str(name);
        for vf in fits {
            csv.push(',');
            if let Ok(f) = &vf.outcome {
                if let Some(v) = param_cell(f, *id) {
                    csv.push_str(&g17(v));
                }
            }
        }
        csv.push('\n');
    }

    // in-sample metrics
    let mut metrics_csv = String::from("model,rmse,llv,loglik,converged,iterations\n");
    let mut text = String::new();
    text.push_str(&format!("{:<10}", "parameter"));
    for vf in fits {
        text.push_str(&format!("{:>14}", vf.variant.label()));
    }
    text.push('\n');
    for (name, id) in &rows {
        text.push_str(&format!("{:<10}", name));
        for vf in fits {
            match &vf.outcome {
                Ok(f) => match param_cell(f, *id) {
                    Some(v) => text.push_str(&format!("{v:>14.4}")),
                    None => text.push_str(&format!("{:>14}", "-")),
                },
                Err(_) => text.push_str(&format!("{:>14}", "!")),
            }
        }
        text.push('\n');
    }
    // standard errors where available
    text.push('\n');
    for vf in fits {
        match &vf.outcome {
            Ok(f) => {
                let presample = y_in.iter().map(|v| v * v).sum::<f64>() / y_in.len() as f64;
                let path =
                    filter_variance_with_presample(y_in, &f.params, f.truncation, presample)
                        .map_err(CliError::from)?;
                let (rmse, llv) = fit_metrics(y_in, &path.h).map_err(CliError::from)?;
                metrics_csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    variant_slug(vf.variant),
                    g17(rmse),
                    g17(llv),
                    g17(f.loglik),
                    f.converged,
                    f.iterations
                ));
                text.push_str(&format!(
                    "{}: loglik {:.4}, in-sample RMSE {:.4}, LLV {:.4}, {} in {} iterations\n",
                    vf.variant.label(),
                    f.loglik,
                    rmse,
                    llv,
                    if f.converged { "converged" } else { "did not converge" },
                    f.iterations
                ));
                match standard_errors(f, y_in) {
                    Ok(se) => {
                        let named: Vec<String> = f
                            .free
                            .iter()
                            .zip(se.iter())
                            .map(|(id, s)| format!("{}={:.4}", id.name(), s))
                            .collect();
                        text.push_str(&format!("  standard errors: {}\n", named.join(", ")));
                    }
                    Err(e) => text.push_str(&format!("  standard errors unavailable: {e}\n")),
                }
            }
            Err(e) => {
                text.push_str(&format!("{}: fit failed: {e}\n", vf.variant.label()));
            }
        }
    }
    Ok((csv, metrics_csv, text))
}

pub fn cmd_fit(config: &RunConfig) -> CliResult<()> {
    let y = load_series(config)?;
    let y_in = in_sample(&y, config)?;
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let fits = fit_all(y_in, config);
    let (csv, metrics_csv, text) = fit_tables(&fits, y_in, config)?;
    out.write_csv("fit_params.csv", &csv)?;
    out.write_csv("fit_insample_metrics.csv", &metrics_csv)?;
    out.write_report("fit_report.txt", &text)?;
    if fits.iter().all(|vf| vf.outcome.is_err()) {
        return Err(CliError::Numerical("every requested variant failed to fit".into()));
    }
    Ok(())
}

pub fn cmd_test_tva(config: &RunConfig) -> CliResult<()> {
    let y = load_series(config)?;
    let y_in = in_sample(&y, config)?;
    if y_in.len() < 50 {
        return Err(CliError::Data(format!(
            "series too short for the amplitude score test: {} observations (need 50)",
            y_in.len()
        )));
    }
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let result = score_test(y_in, config.p, config.q, &config.fit_config())?;
    let reject = result.lambda_s > 3.84;
    let verdict = if reject {
        "reject H0: time-varying amplitude at the 5% level"
    } else {
        "fail to reject H0: no evidence of time-varying amplitude at the 5% level"
    };
    let csv = format!(
        "lambda_s,p_value,s_tilde,kappa_tilde,q,schur,reject_5pct\n{},{},{},{},{},{},{}\n",
        g17(result.lambda_s),
        g17(result.p_value),
        g17(result.s_tilde),
        g17(result.kappa_tilde),
        g17(result.q),
        g17(result.schur),
        reject
    );
    let text = format!(
        "Score test of constant amplitude (H0: eta = 0)\n\
         lambda_s = {:.4}\np-value (chi2, 1 df) = {:.4}\ncritical value at 5% = 3.84\n{}\n",
        result.lambda_s, result.p_value, verdict
    );
    out.write_csv("score_test.csv", &csv)?;
    out.write_report("score_test.txt", &text)?;
    println!("{text}");
    Ok(())
}

struct ForecastSet {
    variant: Variant,
    fit: FitResult,
    forecast: VarForecastSeries,
}

fn forecast_all(
    y_in: &[f64],
    y_out: &[f64],
    fits: Vec<VariantFit>,
    config: &RunConfig,
) -> (Vec<ForecastSet>, Vec<String>) {
    let mut sets = Vec::new();
    let mut notes = Vec::new();
    for vf in fits {
        match vf.outcome {
            Ok(fit_res) => {
                match forecast_var(
                    y_in,
                    y_out,
                    &fit_res,
                    &config.levels,
                    config.quantile_source,
                ) {
                    Ok(fc) => sets.push(ForecastSet {
                        variant: vf.variant,
                        fit: fit_res,
                        forecast: fc,
                    }),
                    Err(e) => notes.push(format!(
                        "{}: forecasting skipped: {e}",
                        vf.variant.label()
                    )),
                }
            }
            Err(e) => notes.push(format!("{}: fit failed: {e}", vf.variant.label())),
        }
    }
    (sets, notes)
}

fn write_forecast_csvs(out: &OutDir, sets: &[ForecastSet], split: usize) -> CliResult<()> {
    for set in sets {
        let mut csv = String::from("t,sigma");
        for &rho in &set.forecast.levels {
            csv.push_str(&format!(",var_{rho}"));
        }
        csv.push('\n');
        for t in 0..set.forecast.sigma.len() {
            csv.push_str(&format!("{},{}", split + t + 1, g17(set.forecast.sigma[t])));
            for row in &set.forecast.var {
                csv.push_str(&format!(",{}", g17(row[t])));
            }
            csv.push('\n');
        }
        out.write_csv(&format!("forecast_{}.csv", variant_slug(set.variant)), &csv)?;
    }
    Ok(())
}

pub fn cmd_forecast(config: &RunConfig) -> CliResult<()> {
    let y = load_series(config)?;
    let (y_in, y_out) = split_sample(&y, config)?;
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let fits = fit_all(y_in, config);
    let (sets, notes) = forecast_all(y_in, y_out, fits, config);
    for note in &notes {
        eprintln!("{note}");
    }
    if sets.is_empty() {
        return Err(CliError::Numerical("no variant produced forecasts".into()));
    }
    write_forecast_csvs(&out, &sets, config.split)?;
    Ok(())
}

fn backtest_reports(
    sets: &[ForecastSet],
    y_out: &[f64],
) -> CliResult<Vec<(Variant, Vec<BacktestReport>)>> {
    let mut all = Vec::new();
    for set in sets {
        let mut per_level = Vec::new();
        for (k, &rho) in set.forecast.levels.iter().enumerate() {
            let ind = exceptions(y_out, &set.forecast.var[k]).map_err(CliError::from)?;
            per_level.push(backtest(&ind, rho).map_err(CliError::from)?);
        }
        all.push((set.variant, per_level));
    }
    Ok(all)
}

fn backtest_csv(reports: &[(Variant, Vec<BacktestReport>)]) -> String {
    let mut csv = String::from(
        "model,level,t,expected,exceptions,n00,n01,n10,n11,lr_uc,p_uc,lr_ind,p_ind,lr_cc,p_cc,pass_uc,pass_ind,pass_cc,ind_degenerate\n",
    );
    for (variant, per_level) in reports {
        for r in per_level {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                variant_slug(*variant),
                r.rho,
                r.t,
                g17(r.expected),
                r.n,
                r.transitions.n00,
                r.transitions.n01,
                r.transitions.n10,
                r.transitions.n11,
                g17(r.lr_uc),
                g17(r.p_uc),
                g17(r.lr_ind),
                g17(r.p_ind),
                g17(r.lr_cc),
                g17(r.p_cc),
                r.pass_uc,
                r.pass_ind,
                r.pass_cc,
                r.ind_degenerate
            ));
        }
    }
    csv
}

/// Text table shaped like the empirical VaR comparison: one column per
/// (model, level), rows Ex.e / Em.e / LR_UC / LR_IND / LR_CC, `*` marking a
/// pass at the 5% level.
fn backtest_text(reports: &[(Variant, Vec<BacktestReport>)]) -> String {
    let mut text = String::new();
    text.push_str(&format!("{:<8}", ""));
    for (variant, per_level) in reports {
        for r in per_level {
            text.push_str(&format!(
                "{:>20}",
                format!("{} {}", variant.label(), format_level(r.rho))
            ));
        }
    }
    text.push('\n');
    let fmt_row = |label: &str, cell: &dyn Fn(&BacktestReport) -> String| {
        let mut line = format!("{label:<8}");
        for (_, per_level) in reports {
            for r in per_level {
                line.push_str(&format!("{:>20}", cell(r)));
            }
        }
        line.push('\n');
        line
    };
    text.push_str(&fmt_row("Ex.e", &|r| format!("{:.1}", r.expected)));
    text.push_str(&fmt_row("Em.e", &|r| r.n.to_string()));
    text.push_str(&fmt_row("LR_UC", &|r| mark(r.lr_uc, r.pass_uc)));
    text.push_str(&fmt_row("LR_IND", &|r| mark(r.lr_ind, r.pass_ind)));
    text.push_str(&fmt_row("LR_CC", &|r| mark(r.lr_cc, r.pass_cc)));
    text.push_str(
        "\nNotes: 5% critical values are 3.84 (LR_UC, LR_IND) and 5.99 (LR_CC); * marks a pass.\n",
    );
    text
}

fn format_level(rho: f64) -> String {
    format!("VaR({rho})")
}

fn mark(stat: f64, pass: bool) -> String {
    if pass {
        format!("{stat:.3}*")
    } else {
        format!("{stat:.3}")
    }
}

pub fn cmd_backtest(config: &RunConfig) -> CliResult<()> {
    let y = load_series(config)?;
    let (y_in, y_out) = split_sample(&y, config)?;
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let fits = fit_all(y_in, config);
    let (sets, notes) = forecast_all(y_in, y_out, fits, config);
    for note in &notes {
        eprintln!("{note}");
    }
    if sets.is_empty() {
        return Err(CliError::Numerical("no variant produced forecasts".into()));
    }
    let reports = backtest_reports(&sets, y_out)?;
    out.write_csv("backtest.csv", &backtest_csv(&reports))?;
    let text = backtest_text(&reports);
    out.write_report("backtest.txt", &text)?;
    println!("{text}");
    Ok(())
}

pub fn cmd_simulate(config: &RunConfig) -> CliResult<()> {
    let params = config.sim_params();
    let sim = SimConfig {
        params,
        n: config.sim_n,
        burn_in: config.burn_in,
        seed: config.seed,
        truncation: config.truncation.unwrap_or(1000),
    };
    let y = simulate_path(&sim).map_err(CliError::from)?;
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let mut csv = String::from("return\n");
    for v in &y {
        csv.push_str(&g17(*v));
        csv.push('\n');
    }
    out.write_csv("simulated.csv", &csv)?;
    Ok(())
}

pub fn cmd_mc(config: &RunConfig) -> CliResult<()> {
    let experiment = config
        .experiment
        .as_deref()
        .ok_or_else(|| CliError::Usage("mc requires an experiment (--experiment)".into()))?;
    if config.reps == 0 {
        return Err(CliError::Usage("reps must be >= 1".into()));
    }
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let fit_config = tvhgarch::FitConfig {
        multistart: 1,
        ..config.fit_config()
    };
    match experiment {
        "estimation" => {
            let truth = ModelParams {
                amplitude: AmplitudeSpec::Logistic(config.true_eta),
                ..config.sim_params()
            };
            let report = mc_estimation_experiment(
                &truth,
                &config.n_grid,
                config.reps,
                config.seed,
                &fit_config,
                config.jobs,
            )
            .map_err(CliError::from)?;
            out.write_csv("mc_estimation.csv", &report.to_csv())?;
            out.write_report("mc_estimation.txt", &report.to_text())?;
        }
        "size-power" => {
            let shape = ModelParams {
                amplitude: AmplitudeSpec::Logistic(0.0),
                ..config.sim_params()
            };
            let report = mc_size_power_experiment(
                &shape,
                &config.eta_grid,
                &config.n_grid,
                &config.alpha_grid,
                config.reps,
                config.seed,
                &fit_config,
                config.jobs,
            )
            .map_err(CliError::from)?;
            out.write_csv("mc_size_power.csv", &report.to_csv())?;
            out.write_report("mc_size_power.txt", &report.to_text())?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown experiment `{other}` (expected `estimation` or `size-power`)"
            )))
        }
    }
    Ok(())
}

pub fn cmd_report(config: &RunConfig) -> CliResult<()> {
    let y = load_series(config)?;
    let (y_in, y_out) = split_sample(&y, config)?;
    let out = OutDir::create(&config.outdir, !config.no_timestamp)?;
    let mut report = String::new();

    // descriptive statistics over the full sample
    let stats = descriptive_stats(&y).map_err(CliError::from)?;
    let kurt_raw = stats.kurtosis_raw.map(g17).unwrap_or_default();
    let kurt_ex = stats.kurtosis_excess.map(g17).unwrap_or_default();
    out.write_csv(
        "descriptive_stats.csv",
        &format!(
            "mean,std_dev,min,max,skewness,kurtosis_raw,kurtosis_excess\n{},{},{},{},{},{},{}\n",
            g17(stats.mean),
            g17(stats.std_dev),
            g17(stats.min),
            g17(stats.max),
            g17(stats.skewness),
            kurt_raw,
            kurt_ex
        ),
    )?;
    report.push_str(&format!(
        "Descriptive statistics ({} observations)\n\
         mean {:.3}  std.dev {:.3}  min {:.3}  max {:.3}  skewness {:.3}  kurtosis {} (excess {})\n\n",
        y.len(),
        stats.mean,
        stats.std_dev,
        stats.min,
        stats.max,
        stats.skewness,
        stats
            .kurtosis_raw
            .map(|k| format!("{k:.3}"))
            .unwrap_or_else(|| "-".into()),
        stats
            .kurtosis_excess
            .map(|k| format!("{k:.3}"))
            .unwrap_or_else(|| "-".into()),
    ));

    // fits
    let fits = fit_all(y_in, config);
    let (csv, metrics_csv, fit_text) = fit_tables(&fits, y_in, config)?;
    out.write_csv("fit_params.csv", &csv)?;
    out.write_csv("fit_insample_metrics.csv", &metrics_csv)?;
    report.push_str("Maximum likelihood estimates (in-sample)\n");
    report.push_str(&fit_text);
    report.push('\n');

    // amplitude score test
    if y_in.len() >= 50 {
        match score_test(y_in, config.p, config.q, &config.fit_config()) {
            Ok(res) => {
                let verdict = if res.lambda_s > 3.84 {
                    "reject H0 at 5% (time-varying amplitude)"
                } else {
                    "fail to reject H0 at 5%"
                };
                out.write_csv(
                    "score_test.csv",
                    &format!(
                        "lambda_s,p_value,reject_5pct\n{},{},{}\n",
                        g17(res.lambda_s),
                        g17(res.p_value),
                        res.lambda_s > 3.84
                    ),
                )?;
                report.push_str(&format!(
                    "Score test: lambda_s = {:.4}, p = {:.4} -> {verdict}\n\n",
                    res.lambda_s, res.p_value
                ));
            }
            Err(Error::DegenerateTest(m)) => {
                report.push_str(&format!("Score test unavailable: {m}\n\n"));
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        report.push_str("Score test skipped: in-sample segment shorter than 50.\n\n");
    }

    // forecasts, performance measures, backtests
    let (sets, notes) = forecast_all(y_in, y_out, fits, config);
    for note in &notes {
        report.push_str(&format!("note: {note}\n"));
    }
    if sets.is_empty() {
        out.write_report("report.txt", &report)?;
        return Err(CliError::Numerical("no variant produced forecasts".into()));
    }
    write_forecast_csvs(&out, &sets, config.split)?;

    let presample = y_in.iter().map(|v| v * v).sum::<f64>() / y_in.len() as f64;
    let mut perf_csv =
        String::from("model,rmse_insample,llv_insample,rmse_outsample,llv_outsample\n");
    report.push_str("Measures of performance\n");
    report.push_str(&format!(
        "{:<12}{:>14}{:>14}{:>14}{:>14}\n",
        "model", "In RMSE", "In LLV", "Out RMSE", "Out LLV"
    ));
    let mut abs_err_cols: Vec<(Variant, Vec<f64>)> = Vec::new();
    for set in &sets {
        let path = filter_variance_with_presample(&y, &set.fit.params, set.fit.truncation, presample)
            .map_err(CliError::from)?;
        let (h_in, h_out) = path.h.split_at(y_in.len());
        let (rmse_in, llv_in) = fit_metrics(y_in, h_in).map_err(CliError::from)?;
        let (rmse_out, llv_out) = fit_metrics(y_out, h_out).map_err(CliError::from)?;
        perf_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            variant_slug(set.variant),
            g17(rmse_in),
            g17(llv_in),
            g17(rmse_out),
            g17(llv_out)
        ));
        report.push_str(&format!(
            "{:<12}{:>14.4}{:>14.1}{:>14.4}{:>14.1}\n",
            set.variant.label(),
            rmse_in,
            llv_in,
            rmse_out,
            llv_out
        ));

        // plot data: t, squared return, fitted/forecast variance
        let mut plot = String::from("t,y_sq,h_hat\n");
        for t in 0..y.len() {
            plot.push_str(&format!(
                "{},{},{}\n",
                t + 1,
                g17(y[t] * y[t]),
                g17(path.h[t])
            ));
        }
        out.write_csv(
            &format!("plot_variance_{}.csv", variant_slug(set.variant)),
            &plot,
        )?;
        abs_err_cols.push((
            set.variant,
            y_out
                .iter()
                .zip(h_out.iter())
                .map(|(&yt, &ht)| (yt * yt - ht).abs())
                .collect(),
        ));
    }
    out.write_csv("performance.csv", &perf_csv)?;
    report.push('\n');

    // absolute forecast errors per model over the out-of-sample window
    let mut abs_csv = String::from("t");
    for (variant, _) in &abs_err_cols {
        abs_csv.push_str(&format!(",abs_err_{}", variant_slug(*variant)));
    }
    abs_csv.push('\n');
    for t in 0..y_out.len() {
        abs_csv.push_str(&(config.split + t + 1).to_string());
        for (_, col) in &abs_err_cols {
            abs_csv.push_str(&format!(",{}", g17(col[t])));
        }
        abs_csv.push('\n');
    }
    out.write_csv("plot_abs_error.csv", &abs_csv)?;

    let reports = backtest_reports(&sets, y_out)?;
    out.write_csv("backtest.csv", &backtest_csv(&reports))?;
    report.push_str("VaR backtests\n");
    report.push_str(&backtest_text(&reports));
    out.write_report("report.txt", &report)?;
    println!("{report}");
    Ok(())
}
