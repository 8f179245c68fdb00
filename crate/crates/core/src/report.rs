//! Count series, asymptotic constant fitting and serialisation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One row `(s, N(s), prediction, N(s)/prediction)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub s: f64,
    pub count: u64,
    pub prediction: f64,
    pub ratio: f64,
}

impl Row {
    pub fn new(s: f64, count: u64, prediction: f64) -> Result<Self> {
        if !(prediction > 0.0) || !prediction.is_finite() {
            return invalid(format!("prediction {prediction} must be positive"));
        }
        if !s.is_finite() {
            return invalid("s must be finite");
        }
        Ok(Row { s, count, prediction, ratio: count as f64 / prediction })
    }
}

/// Fitted constant over the last window of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub constant: f64,
    /// `(s_min, s_max)` of the rows used.
    pub window: (f64, f64),
    /// Largest relative deviation of a single row from the constant.
    pub drift: f64,
}

/// Growth model `N(s) ≈ C·g(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Growth {
    /// `g(s) = e^{δs}`.
    Exponential(f64),
    /// `g(s) = s^k`.
    Power(f64),
}

impl Growth {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Growth::Exponential(d) => (d * s).exp(),
            Growth::Power(k) => s.powf(k),
        }
    }

    fn log_eval(&self, s: f64) -> f64 {
        match *self {
            Growth::Exponential(d) => d * s,
            Growth::Power(k) => k * s.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    pub fit: Option<Fit>,
}

impl CountReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        CountReport {
            experiment: experiment.into(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            fit: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Inserts a row keeping rows sorted by `s`.
    pub fn push(&mut self, row: Row) {
        let at = self.rows.partition_point(|r| r.s <= row.s);
        self.rows.insert(at, row);
    }

    pub fn fit_with(&mut self, growth: Growth) -> Result<Fit> {
        let fit = fit_growth(&self.rows, growth)?;
        self.fit = Some(fit);
        Ok(fit)
    }

    pub fn last_ratio(&self) -> Option<f64> {
        self.rows.last().map(|r| r.ratio)
    }
}

/// Rows sorted by `s` with duplicates removed.
fn normalized(rows: &[Row]) -> Vec<Row> {
    let mut v = rows.to_vec();
    v.sort_by(|a, b| a.s.total_cmp(&b.s));
    v.dedup_by(|a, b| a.s == b.s && a.count == b.count);
    v
}

/// Geometric mean of `N(s)/g(s)` over the top third of the `s` values.
pub fn fit_growth(rows: &[Row], growth: Growth) -> Result<Fit> {
    let rows = normalized(rows);
    let rows: Vec<Row> = rows.into_iter().filter(|r| r.count > 0).collect();
    if rows.is_empty() {
        return invalid("no rows with positive count to fit");
    }
    let take = rows.len().div_ceil(3);
    let window = &rows[rows.len() - take..];
    let logs: Vec<f64> = window
        .iter()
        .map(|r| (r.count as f64).ln() - growth.log_eval(r.s))
        .collect();
    let constant = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let drift = logs
        .iter()
        .map(|l| (l.exp() / constant - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Fit {
        constant,
        window: (window[0].s, window[take - 1].s),
        drift,
    })
}

/// `(constant, drift)` for `N(s) ≈ C e^{δs}`.
pub fn fit_constant(rows: &[Row], delta: f64) -> Result<(f64, f64)> {
    let f = fit_growth(rows, Growth::Exponential(delta))?;
    Ok((f.constant, f.drift))
}

/// Least-squares slope and intercept of `ln N` against `ln s`: `N ≈ C s^k`,
/// returned as `(k, C)`.
pub fn fit_power(rows: &[Row]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = normalized(rows)
        .iter()
        .filter(|r| r.count > 0 && r.s > 0.0)
        .map(|r| (r.s.ln(), (r.count as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return invalid("need at least two rows for a power fit");
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return invalid("all rows share the same s");
    }
    let k = sxy / sxx;
    Ok((k, (my - k * mx).exp()))
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// the uniform law on `[0, 1)`.
pub fn ks_uniform(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return invalid("no samples");
    }
    if samples.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return invalid("samples must lie in [0, 1]");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let above = (i + 1) as f64 / n - x;
        let below = x - i as f64 / n;
        d.max(above).max(below)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => invalid(format!("unknown format {s:?}")),
        }
    }
}

/// Serialises a report. Floats use Rust's shortest round-trip formatting,
/// which never depends on the locale.
pub fn emit(report: &CountReport, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut out = String::from("s,count,prediction,ratio\n");
            for r in &report.rows {
                let _ = writeln!(out, "{},{},{},{}", r.s, r.count, r.prediction, r.ratio);
            }
            out.into_bytes()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct FitOut {
                constant: Option<f64>,
                drift: Option<f64>,
            }
            #[derive(Serialize)]
            struct Out<'a> {
                experiment: &'a str,
                params: &'a BTreeMap<String, String>,
                rows: &'a [Row],
                fit: FitOut,
            }
            let out = Out {
                experiment: &report.experiment,
                params: &report.params,
                rows: &report.rows,
                fit: FitOut {
                    constant: report.fit.map(|f| f.constant),
                    drift: report.fit.map(|f| f.drift),
                },
            };
            let mut bytes = serde_json::to_vec_pretty(&out).expect("report serialises");
            bytes.push(b'\n');
            bytes
        }
    }
}

/// Parses the CSV produced by [`emit`].
pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    if lines.next() != Some("s,count,prediction,ratio") {
        return invalid("missing CSV header");
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return invalid(format!("bad CSV line {l:?}"));
            }
            let num = |x: &str| x.parse::<f64>().map_err(|e| crate::Error::InvalidArgument(e.to_string()));
            Ok(Row {
                s: num(f[0])?,
                count: f[1].parse().map_err(|e: std::num::ParseIntError| crate::Error::InvalidArgument(e.to_string()))?,
                prediction: num(f[2])?,
                ratio: num(f[3])?,
            })
        })
        .collect()
}
