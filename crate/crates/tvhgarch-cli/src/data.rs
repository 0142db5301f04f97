//! Input ingestion. Two layouts, detected by header name (never by value
//! heuristics): a `return` column of percentage log-returns, or a
//! `date,price` pair from which returns are computed as
//! 100·(ln P_t − ln P_{t−1}), dropping the first row.

use std::path::Path;

use crate::errors::{CliError, CliResult};

pub fn read_series(path: &Path, column: Option<&str>) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => {
                return Err(CliError::Data(format!(
                    "{}: empty file (a header row is required)",
                    path.display()
                )))
            }
        }
    };
    let headers: Vec<String> = header
        .split(',')
        .map(|h| h.trim().to_lowercase())
        .collect();

    let find = |name: &str| headers.iter().position(|h| h == name);

    if let Some(col) = column {
        let idx = find(&col.to_lowercase()).ok_or_else(|| {
            CliError::Data(format!(
                "{}: column `{col}` not found in header `{header}`",
                path.display()
            ))
        })?;
        return parse_column(path, lines, idx, false);
    }
    if let Some(idx) = find("return") {
        return parse_column(path, lines, idx, false);
    }
    if let Some(idx) = find("price") {
        let prices = parse_column(path, lines, idx, true)?;
        if prices.len() < 2 {
            return Err(CliError::Data(format!(
                "{}: need at least 2 prices to form returns",
                path.display()
            )));
        }
        return Ok(prices
            .windows(2)
            .map(|w| 100.0 * (w[1].ln() - w[0].ln()))
            .collect());
    }
    Err(CliError::Data(format!(
        "{}: header `{header}` has neither a `return` nor a `price` column",
        path.display()
    )))
}

fn parse_column<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
    idx: usize,
    positive: bool,
) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (line_no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.split(',').nth(idx).ok_or_else(|| {
            CliError::Data(format!(
                "{}:{}: missing column {}",
                path.display(),
                line_no + 1,
                idx + 1
            ))
        })?;
        let value: f64 = field.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{}: cannot parse `{}` as a number",
                path.display(),
                line_no + 1,
                field.trim()
            ))
        })?;
        if !value.is_finite() || (positive && value <= 0.0) {
            return Err(CliError::Data(format!(
                "{}:{}: invalid value {value}",
                path.display(),
                line_no + 1
            )));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(out)
}

pub fn demean(y: &mut [f64]) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    for v in y.iter_mut() {
        *v -= mean;
    }
}
