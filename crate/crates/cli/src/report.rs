//! Deterministic report emission: CSV statistic tables, JSON summaries with
//! fits next to the closed-form predictions, and two-column plot data.
//!
//! Numbers are formatted with '.' decimals; integral values print as
//! integers, everything else in scientific notation with 9 significant
//! digits, so reruns produce byte-identical files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use latewalk_core::estimators::{fit_exponent, summarize};
use latewalk_core::theory::{self, ExponentKind};
use serde::Serialize;

use crate::CliError;

/// Deterministic number formatting: integers verbatim, otherwise 9
/// significant digits in scientific notation.
pub fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.8e}")
    }
}

/// One statistic row of the sweep CSV.
#[derive(Debug, Clone)]
pub struct StatRow {
    pub n: u32,
    pub seed_index: u32,
    /// `None` for statistics that do not depend on the level (cover times).
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub statistic: &'static str,
    pub value: f64,
}

pub fn write_stat_csv(path: &Path, rows: &[StatRow]) -> Result<(), CliError> {
    let mut text = String::from("n,seed,alpha,beta,statistic,value\n");
    for row in rows {
        let alpha = row.alpha.map(fmt_value).unwrap_or_default();
        let beta = row.beta.map(fmt_value).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n,
            row.seed_index,
            alpha,
            beta,
            row.statistic,
            fmt_value(row.value)
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Median-based fit of one statistic across torus sides, reported next to
/// its closed-form exponent.
#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub statistic: String,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub medians: Vec<(u32, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halfwidth: Option<f64>,
    pub excluded_zeros: usize,
    pub predicted_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

/// Groups per-seed statistic rows by (statistic, alpha, beta), takes the
/// per-n median, and fits `ln median` against `ln n` when at least three
/// sides with positive medians exist.
pub fn summarize_fits(rows: &[StatRow]) -> Vec<FitSummary> {
    type Key = (&'static str, String, String);
    let mut groups: BTreeMap<Key, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        let (alpha, beta) = match (row.alpha, row.beta) {
            (Some(a), b) => (a, b),
            (None, _) => continue, // cover statistics carry no exponent fit
        };
        let key = (
            row.statistic,
            fmt_value(alpha),
            beta.map(fmt_value).unwrap_or_default(),
        );
        groups
            .entry(key)
            .or_default()
            .entry(row.n)
            .or_default()
            .push(row.value);
    }

    let mut out = Vec::new();
    for ((statistic, alpha_s, beta_s), by_n) in groups {
        let alpha: f64 = alpha_s.parse().unwrap();
        let beta: Option<f64> = if beta_s.is_empty() {
            None
        } else {
            Some(beta_s.parse().unwrap())
        };
        let medians: Vec<(u32, f64)> = by_n
            .iter()
            .map(|(&n, values)| (n, summarize(values).map(|s| s.median).unwrap_or(f64::NAN)))
            .collect();
        let kind = match statistic {
            "late_count" => ExponentKind::LateCount,
            "fixed_disc_count" => ExponentKind::FixedDisc,
            "late_disc_count" => ExponentKind::LateDisc,
            "pair_count" => ExponentKind::PairTypical,
            _ => continue,
        };
        let predicted = theory::predicted_exponent(kind, alpha, beta)
            .map(|p| p.value)
            .unwrap_or(f64::NAN);
        let samples: Vec<(f64, f64)> = medians.iter().map(|&(n, m)| (n as f64, m)).collect();
        match fit_exponent(&samples) {
            Ok(fit) => out.push(FitSummary {
                statistic: statistic.to_string(),
                alpha,
                beta,
                medians,
                slope: Some(fit.slope),
                intercept: Some(fit.intercept),
                residual: Some(fit.residual),
                halfwidth: Some(fit.halfwidth),
                excluded_zeros: fit.excluded_zeros,
                predicted_exponent: predicted,
                skip_reason: None,
            }),
            Err(err) => out.push(FitSummary {
                statistic: statistic.to_string(),
                alpha,
                beta,
                medians,
                slope: None,
                intercept: None,
                residual: None,
                halfwidth: None,
                excluded_zeros: 0,
                predicted_exponent: predicted,
                skip_reason: Some(err.to_string()),
            }),
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub fits: Vec<FitSummary>,
}

pub fn write_summary_json(path: &Path, summary: &SweepSummary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).map_err(CliError::runtime)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Two-column whitespace-separated series.
pub fn write_plot_series(path: &Path, series: &[(f64, f64)]) -> Result<(), CliError> {
    let mut text = String::new();
    for &(x, y) in series {
        text.push_str(&format!("{} {}\n", fmt_value(x), fmt_value(y)));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Theory-mode CSV: one row per (alpha, beta, kind).
pub fn write_theory_csv(path: &Path, alphas: &[f64], betas: &[f64]) -> Result<(), CliError> {
    let mut text = String::from("alpha,beta,kind,value\n");
    for &alpha in alphas {
        // Guard: the closed forms are stated on the open interval.
        let alpha = alpha.min(1.0 - 1e-12);
        let late = theory::predicted_exponent(ExponentKind::LateCount, alpha, None)
            .map_err(CliError::runtime)?;
        text.push_str(&format!(
            "{},,late_count,{}\n",
            fmt_value(alpha),
            fmt_value(late.value)
        ));
        for &beta in betas {
            for kind in [
                ExponentKind::FixedDisc,
                ExponentKind::LateDisc,
                ExponentKind::PairTypical,
                ExponentKind::PairMean,
            ] {
                let p = theory::predicted_exponent(kind, alpha, Some(beta))
                    .map_err(CliError::runtime)?;
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_value(alpha),
                    fmt_value(beta),
                    kind.name(),
                    fmt_value(p.value)
                ));
            }
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Theory-mode plot data: typical- and mean-pair exponent curves over β,
/// 512 samples per alpha.
pub fn write_theory_plots(dir: &Path, alphas: &[f64]) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for &alpha in alphas {
        let alpha = alpha.min(1.0 - 1e-12);
        let mut typical = Vec::with_capacity(512);
        let mut mean = Vec::with_capacity(512);
        for i in 1..=512 {
            let beta = i as f64 / 513.0;
            typical.push((
                beta,
                theory::pair_exponent(alpha, beta).map_err(CliError::runtime)?,
            ));
            mean.push((
                beta,
                theory::mean_pair_exponent(alpha, beta).map_err(CliError::runtime)?,
            ));
        }
        let p1 = dir.join(format!("pair_typical_a{alpha:.3}.dat"));
        write_plot_series(&p1, &typical)?;
        let p2 = dir.join(format!("pair_mean_a{alpha:.3}.dat"));
        write_plot_series(&p2, &mean)?;
        written.push(p1);
        written.push(p2);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed_width_and_stable() {
        assert_eq!(fmt_value(42.0), "42");
        assert_eq!(fmt_value(0.5), "5.00000000e-1");
        assert_eq!(fmt_value(1.2345678949e7), "1.23456789e7");
        assert_eq!(fmt_value(-3.0), "-3");
    }

    #[test]
    fn fits_sit_next_to_predictions() {
        // Synthetic rows growing like n^1 for late_count at alpha 0.5.
        let mut rows = Vec::new();
        for (i, &n) in [64u32, 128, 256, 512].iter().enumerate() {
            for seed in 0..3u32 {
                rows.push(StatRow {
                    n,
                    seed_index: seed,
                    alpha: Some(0.5),
                    beta: None,
                    statistic: "late_count",
                    value: (n as f64) * (1.0 + 0.01 * (seed as f64 - 1.0) * (i as f64)),
                });
            }
        }
        let fits = summarize_fits(&rows);
        assert_eq!(fits.len(), 1);
        let fit = &fits[0];
        assert_eq!(fit.statistic, "late_count");
        assert!((fit.predicted_exponent - 1.0).abs() < 1e-12);
        assert!((fit.slope.unwrap() - 1.0).abs() < 0.05);
    }
}
