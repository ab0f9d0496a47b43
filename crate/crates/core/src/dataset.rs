use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired covariate/response samples plus the generator that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRecord")]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    generator: String,
    seed: u64,
}

#[derive(Deserialize)]
struct DatasetRecord {
    xs: Vec<f64>,
    ys: Vec<f64>,
    #[serde(default)]
    generator: String,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<DatasetRecord> for Dataset {
    type Error = Error;

    fn try_from(r: DatasetRecord) -> Result<Self> {
        Dataset::new(r.xs, r.ys, r.generator, r.seed)
    }
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, generator: impl Into<String>, seed: u64) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite entry at position {i}")));
        }
        Ok(Dataset {
            xs,
            ys,
            generator: generator.into(),
            seed,
        })
    }

    /// Dataset without provenance, e.g. for hand-written fixtures.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (xs, ys) = pairs.iter().copied().unzip();
        Dataset::new(xs, ys, "manual", 0)
    }

    pub fn empty() -> Self {
        Dataset {
            xs: Vec::new(),
            ys: Vec::new(),
            generator: "empty".into(),
            seed: 0,
        }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn generator(&self) -> &str {
        &self.generator
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV with header `x,y`. Generator and seed are not part of the CSV
    /// form.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y"])?;
        for (x, y) in self.iter() {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(s.as_bytes());
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
        };
        let (ix, iy) = (col("x")?, col("y")?);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                let field = rec.get(i).unwrap_or("").trim();
                field
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number `{field}`")))
            };
            xs.push(parse(ix)?);
            ys.push(parse(iy)?);
        }
        Dataset::new(xs, ys, "csv", 0)
    }

    /// Reads `.csv` as CSV and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if is_csv(path) {
            Dataset::from_csv(&text)
        } else {
            Dataset::from_json(&text)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = if is_csv(path) { self.to_csv()? } else { self.to_json()? };
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
