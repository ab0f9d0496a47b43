use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the CSV form.
pub const CSV_COLUMNS: [&str; 15] = [
    "experiment",
    "label",
    "lambda_or_lr",
    "w2",
    "kl",
    "sd_err_theta1",
    "sd_err_theta2",
    "tll",
    "tll_se",
    "ci_theta1_lo",
    "ci_theta1_hi",
    "rmse",
    "rmse_ci_lo",
    "rmse_ci_hi",
    "diverged",
];

/// One fitted posterior, approximation, or model. Fields that an
/// experiment does not define are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub label: String,
    pub lambda_or_lr: Option<f64>,
    pub w2: Option<f64>,
    pub kl: Option<f64>,
    pub sd_err_theta1: Option<f64>,
    pub sd_err_theta2: Option<f64>,
    pub tll: Option<f64>,
    pub tll_se: Option<f64>,
    pub ci_theta1_lo: Option<f64>,
    pub ci_theta1_hi: Option<f64>,
    pub rmse: Option<f64>,
    pub rmse_ci_lo: Option<f64>,
    pub rmse_ci_hi: Option<f64>,
    pub diverged: bool,
}

impl ResultRow {
    pub fn new(experiment: &str, label: impl Into<String>, lambda_or_lr: Option<f64>) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            label: label.into(),
            lambda_or_lr,
            w2: None,
            kl: None,
            sd_err_theta1: None,
            sd_err_theta2: None,
            tll: None,
            tll_se: None,
            ci_theta1_lo: None,
            ci_theta1_hi: None,
            rmse: None,
            rmse_ci_lo: None,
            rmse_ci_hi: None,
            diverged: false,
        }
    }

    /// The row's TLL interval, tll ± 2·se.
    pub fn tll_ci(&self) -> Option<(f64, f64)> {
        let (t, s) = (self.tll?, self.tll_se?);
        Some((t - 2.0 * s, t + 2.0 * s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

pub fn render_results(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

pub fn parse_results(text: &str, format: OutputFormat) -> Result<Vec<ResultRow>> {
    match format {
        OutputFormat::Json => Ok(serde_json::from_str(text)?),
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
            if headers != CSV_COLUMNS {
                return Err(Error::Parse(format!("unexpected header: {}", headers.join(","))));
            }
            r.deserialize().map(|row| row.map_err(Error::from)).collect()
        }
    }
}

/// Writes rows to `path`. Nothing is written when `rows` is empty.
pub fn emit_results(rows: &[ResultRow], path: &Path, format: OutputFormat) -> Result<()> {
    let text = render_results(rows, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
