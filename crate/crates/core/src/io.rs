//! File formats: question JSONL in, sweep CSV and prediction JSONL out.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conformal::{PredictionSet, Threshold};
use crate::distribution::{Dataset, QuestionRecord};
use crate::error::{Error, Result};
use crate::harness::SweepResult;

/// Header line of every sweep CSV.
pub const SWEEP_CSV_HEADER: &str = "axis,mean_error,std_error,mean_set_size";

const RANGE_TOLERANCE: f64 = 1e-12;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` in one call, after all computation has succeeded.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parses question JSONL. Blank lines are skipped. With `sampling_count`
/// unset, `P` is taken from the first record and enforced on the rest.
pub fn parse_dataset(text: &str, path: &Path, sampling_count: Option<u32>) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut p = sampling_count;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: QuestionRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        record.validate(p)?;
        if p.is_none() {
            p = Some(
                u32::try_from(record.sampling_count())
                    .map_err(|_| Error::record(&record.id, "sampling count overflows u32"))?,
            );
        }
        records.push(record);
    }
    match p {
        Some(p) if !records.is_empty() => Dataset::new(records, p),
        _ => Err(Error::NoRecords(path.to_owned())),
    }
}

pub fn load_dataset(path: impl AsRef<Path>, sampling_count: Option<u32>) -> Result<Dataset> {
    let path = path.as_ref();
    parse_dataset(&read_to_string(path)?, path, sampling_count)
}

pub fn dataset_to_jsonl(data: &Dataset) -> String {
    let mut out = String::new();
    for r in data.records() {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_atomically(path.as_ref(), &dataset_to_jsonl(data))
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_set_size: f64,
}

/// The persisted view of a [`SweepResult`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl From<&SweepResult> for SweepTable {
    fn from(r: &SweepResult) -> Self {
        SweepTable {
            rows: (0..r.len())
                .map(|i| SweepRow {
                    axis: r.axis[i],
                    mean_error: r.mean_error[i],
                    std_error: r.std_error[i],
                    mean_set_size: r.mean_set_size[i],
                })
                .collect(),
        }
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(SWEEP_CSV_HEADER.len() + 40 * self.rows.len());
        out.push_str(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{:.6},{:.6},{:.6},{:.6}",
                r.axis, r.mean_error, r.std_error, r.mean_set_size
            )
            .expect("write to String");
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_owned(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == SWEEP_CSV_HEADER => {}
            Some((_, h)) => return Err(parse_err(1, format!("unexpected header {h:?}"))),
            None => return Err(parse_err(1, "empty file".into())),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(i + 1, e.to_string()))?;
            let [axis, mean_error, std_error, mean_set_size] = fields[..] else {
                return Err(parse_err(i + 1, format!("expected 4 fields, got {}", fields.len())));
            };
            rows.push(SweepRow {
                axis,
                mean_error,
                std_error,
                mean_set_size,
            });
        }
        Ok(SweepTable { rows })
    }
}

pub fn sweep_csv(result: &SweepResult) -> String {
    SweepTable::from(result).to_csv()
}

pub fn write_sweep_csv(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    write_atomically(path.as_ref(), &sweep_csv(result))
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<SweepTable> {
    let path = path.as_ref();
    SweepTable::parse(&read_to_string(path)?, path)
}

/// Renders sweep tables as a plain-text grid of mean error rates: one row per
/// labelled table, one column per axis value.
pub fn render_report(tables: &[(String, SweepTable)]) -> String {
    let mut axis: Vec<f64> = tables
        .iter()
        .flat_map(|(_, t)| t.rows.iter().map(|r| r.axis))
        .collect::<Vec<_>>();
    axis.sort_by(f64::total_cmp);
    axis.dedup_by(|a, b| (*a - *b).abs() <= RANGE_TOLERANCE);

    let label_width = tables
        .iter()
        .map(|(l, _)| l.chars().count())
        .chain(std::iter::once(4))
        .max()
        .unwrap_or(4);
    let col = 8;

    let mut out = String::new();
    write!(out, "{:<label_width$}", "").unwrap();
    for a in &axis {
        write!(out, " | {:>col$}", format!("{a:.2}")).unwrap();
    }
    out.push('\n');
    out.push_str(&"-".repeat(label_width + axis.len() * (col + 3)));
    out.push('\n');
    for (label, table) in tables {
        write!(out, "{label:<label_width$}").unwrap();
        for a in &axis {
            let cell = table
                .rows
                .iter()
                .find(|r| (r.axis - a).abs() <= RANGE_TOLERANCE)
                .map(|r| format!("{:.4}", r.mean_error))
                .unwrap_or_default();
            write!(out, " | {cell:>col$}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses `start:stop:step` (both ends inclusive), a comma-separated list,
/// or a single number. Range points are snapped to a 1e-12 grid so that
/// `0.1:0.9:0.1` yields exactly the decimal values.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: &str| Error::BadRange {
        spec: spec.to_owned(),
        reason: reason.to_owned(),
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));

    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts[..] {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && step.is_finite()) {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            let count = ((stop - start) / step + RANGE_TOLERANCE).floor() as usize + 1;
            (0..count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    (v * 1e12).round() / 1e12
                })
                .collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad("expected start:stop:step or a comma-separated list")),
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    Ok(values)
}

/// One line of prediction JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub alpha: f64,
    #[serde(with = "tau_format")]
    pub tau: Threshold,
    pub set: PredictionSet,
}

mod tau_format {
    use super::*;

    #[derive(Serialize, Deserialize)]
    enum Keyword {
        #[serde(rename = "include_all")]
        IncludeAll,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Keyword(Keyword),
    }

    pub fn serialize<S: Serializer>(tau: &Threshold, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *tau {
            Threshold::Finite(v) => Repr::Value(v),
            Threshold::IncludeAll => Repr::Keyword(Keyword::IncludeAll),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Threshold, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Value(v) => Threshold::Finite(v),
            Repr::Keyword(Keyword::IncludeAll) => Threshold::IncludeAll,
        })
    }
}

pub fn predictions_to_jsonl(preds: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p).expect("prediction serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_predictions(text: &str, path: &Path) -> Result<Vec<PredictionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    parse_predictions(&read_to_string(path)?, path)
}

pub fn write_predictions(preds: &[PredictionRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomically(path.as_ref(), &predictions_to_jsonl(preds))
}
