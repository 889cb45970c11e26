//! Experiment results and their on-disk form.
//!
//! `<dir>/<experiment>.csv` holds one row per measurement with header
//! `experiment,n,t,norm_name,value` (empty `n`/`t` when not applicable).
//! `<dir>/<experiment>.json` holds the summary: schema version, config text
//! and digest, verdicts, fits, constants and notes. Non-finite numbers are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::fit::Fit;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for context; never fails a run.
    Info,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Verdict::Pass),
            "fail" => Ok(Verdict::Fail),
            "info" => Ok(Verdict::Info),
            other => Err(LabError::Format(format!("unknown verdict {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: String,
    pub n: Option<u32>,
    pub t: Option<f64>,
    pub norm_name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: String,
    /// Canonical config text; enough to rerun the experiment.
    pub config: String,
    pub config_digest: String,
    pub records: Vec<Record>,
    pub fits: BTreeMap<String, Fit>,
    pub constants: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn new(experiment: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            config: cfg.to_text(),
            config_digest: cfg.digest(),
            records: Vec::new(),
            fits: BTreeMap::new(),
            constants: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, n: Option<u32>, t: Option<f64>, norm_name: &str, value: f64) {
        self.records.push(Record {
            experiment: self.experiment.clone(),
            n,
            t,
            norm_name: norm_name.to_string(),
            value,
        });
    }

    pub fn fit(&mut self, name: &str, fit: Fit) {
        self.fits.insert(name.to_string(), fit);
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.verdicts
            .insert(name.to_string(), Verdict::from_bool(ok));
    }

    pub fn info(&mut self, name: &str) {
        self.verdicts.insert(name.to_string(), Verdict::Info);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Values of `norm_name` at a fixed `n`, ordered as recorded.
    pub fn series(&self, norm_name: &str, n: Option<u32>) -> Vec<(Option<f64>, f64)> {
        self.records
            .iter()
            .filter(|r| r.norm_name == norm_name && r.n == n)
            .map(|r| (r.t, r.value))
            .collect()
    }

    pub fn value(&self, norm_name: &str, n: Option<u32>, t: Option<f64>) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.norm_name == norm_name && r.n == n && r.t == t)
            .map(|r| r.value)
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.values().any(|v| *v == Verdict::Fail)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| **v == Verdict::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "n", "t", "norm_name", "value"])?;
        for r in &self.records {
            w.write_record([
                r.experiment.clone(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.t.map(|t| format!("{t}")).unwrap_or_default(),
                r.norm_name.clone(),
                format!("{:e}", r.value),
            ])?;
        }
        w.into_inner()
            .map_err(|e| LabError::Io(std::io::Error::other(e.to_string())))
    }

    pub fn to_json(&self) -> String {
        let fits: Map<String, Value> = self
            .fits
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    json!({
                        "slope": num(f.slope),
                        "intercept": num(f.intercept),
                        "residual": num(f.residual),
                    }),
                )
            })
            .collect();
        let constants: Map<String, Value> = self
            .constants
            .iter()
            .map(|(k, v)| (k.clone(), num(*v)))
            .collect();
        let verdicts: Map<String, Value> = self
            .verdicts
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config_digest": self.config_digest,
            "config": self.config,
            "verdicts": verdicts,
            "fits": fits,
            "constants": constants,
            "notes": self.notes,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        text.push('\n');
        text
    }

    /// Writes `<dir>/<experiment>.csv` and `.json`; returns both paths.
    pub fn persist(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        fs::write(&csv_path, self.to_csv()?)?;
        fs::write(&json_path, self.to_json())?;
        Ok((csv_path, json_path))
    }

    pub fn load(dir: &Path, experiment: &str) -> Result<Self> {
        let text = fs::read_to_string(dir.join(format!("{experiment}.json")))?;
        let doc: Value = serde_json::from_str(&text)?;
        let version = doc["schema_version"]
            .as_u64()
            .ok_or_else(|| LabError::Format("missing schema_version".into()))?;
        if version != SCHEMA_VERSION as u64 {
            return Err(LabError::Version {
                found: version as u32,
                expected: SCHEMA_VERSION,
            });
        }
        let string = |key: &str| {
            doc[key]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| LabError::Format(format!("missing string field {key:?}")))
        };
        let object = |key: &str| {
            doc[key]
                .as_object()
                .cloned()
                .ok_or_else(|| LabError::Format(format!("missing object field {key:?}")))
        };
        let mut fits = BTreeMap::new();
        for (k, v) in object("fits")? {
            fits.insert(
                k,
                Fit {
                    slope: unnum(&v["slope"])?,
                    intercept: unnum(&v["intercept"])?,
                    residual: unnum(&v["residual"])?,
                },
            );
        }
        let mut constants = BTreeMap::new();
        for (k, v) in object("constants")? {
            constants.insert(k, unnum(&v)?);
        }
        let mut verdicts = BTreeMap::new();
        for (k, v) in object("verdicts")? {
            let s = v
                .as_str()
                .ok_or_else(|| LabError::Format(format!("verdict {k:?} is not a string")))?;
            verdicts.insert(k, Verdict::parse(s)?);
        }
        let notes = doc["notes"]
            .as_array()
            .ok_or_else(|| LabError::Format("missing notes".into()))?
            .iter()
            .map(|n| n.as_str().map(str::to_string))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| LabError::Format("notes must be strings".into()))?;

        let mut reader = csv::Reader::from_path(dir.join(format!("{experiment}.csv")))?;
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() != 5 {
                return Err(LabError::Format(format!(
                    "CSV row with {} fields",
                    row.len()
                )));
            }
            let bad = |what: &str| LabError::Format(format!("bad {what} in CSV row {row:?}"));
            records.push(Record {
                experiment: row[0].to_string(),
                n: opt(&row[1])
                    .map(|s| s.parse().map_err(|_| bad("n")))
                    .transpose()?,
                t: opt(&row[2])
                    .map(|s| s.parse().map_err(|_| bad("t")))
                    .transpose()?,
                norm_name: row[3].to_string(),
                value: row[4].parse().map_err(|_| bad("value"))?,
            });
        }
        Ok(Self {
            experiment: string("experiment")?,
            config: string("config")?,
            config_digest: string("config_digest")?,
            records,
            fits,
            constants,
            verdicts,
            notes,
        })
    }
}

fn opt(s: &str) -> Option<&str> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn unnum(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| LabError::Format(format!("unrepresentable number {n}"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(LabError::Format(format!("not a number: {s:?}"))),
        },
        other => Err(LabError::Format(format!("not a number: {other}"))),
    }
}
