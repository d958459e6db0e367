//! Question records built from repeated sampling, and their conversion into
//! empirical answer distributions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::conformal::{calibration_score, ClassDistribution};
use crate::error::{Error, Result};

/// Number of samples drawn per question when nothing else is specified.
pub const DEFAULT_SAMPLING_COUNT: u32 = 36;

/// One multiple-choice question with the tally of sampled answers per option.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub options: Vec<String>,
    pub counts: Vec<u32>,
    #[serde(rename = "truth")]
    pub truth_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl QuestionRecord {
    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    /// Total number of samples, `P`.
    pub fn sampling_count(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Checks the per-record invariants. When `expected_p` is given the
    /// counts must also sum to it.
    pub fn validate(&self, expected_p: Option<u32>) -> Result<()> {
        let k = self.options.len();
        if k < 2 {
            return Err(Error::record(&self.id, format!("needs at least 2 options, got {k}")));
        }
        if self.counts.len() != k {
            return Err(Error::record(
                &self.id,
                format!("{} counts for {k} options", self.counts.len()),
            ));
        }
        if self.truth_index >= k {
            return Err(Error::record(
                &self.id,
                format!("truth index {} out of range for {k} options", self.truth_index),
            ));
        }
        let p = self.sampling_count();
        if p == 0 {
            return Err(Error::record(&self.id, "counts sum to 0"));
        }
        if let Some(expected) = expected_p {
            if p != u64::from(expected) {
                return Err(Error::record(
                    &self.id,
                    format!("counts sum \u{2260} P ({p} vs {expected})"),
                ));
            }
        }
        Ok(())
    }

    /// Whether at least one sample hit the ground truth.
    pub fn is_answerable(&self) -> bool {
        self.counts.get(self.truth_index).is_some_and(|&c| c > 0)
    }
}

/// Normalizes a record's counts by `P`.
pub fn frequency_distribution(record: &QuestionRecord) -> Result<ClassDistribution> {
    let p = record.sampling_count();
    if p == 0 {
        return Err(Error::record(&record.id, "counts sum to 0"));
    }
    let p = p as f64;
    ClassDistribution::new(record.counts.iter().map(|&c| f64::from(c) / p).collect())
        .map_err(|e| Error::record(&record.id, e.to_string()))
}

/// A validated collection of records sharing one sampling count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<QuestionRecord>,
    sampling_count: u32,
}

impl Dataset {
    pub fn new(records: Vec<QuestionRecord>, sampling_count: u32) -> Result<Self> {
        if sampling_count == 0 {
            return Err(Error::InvalidDataset("sampling count must be at least 1".into()));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate(Some(sampling_count))?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::record(&r.id, "duplicate id"));
            }
        }
        Ok(Dataset {
            records,
            sampling_count,
        })
    }

    /// Builds a dataset taking `P` from the first record.
    pub fn from_records(records: Vec<QuestionRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidDataset("no records".into()))?;
        let p = u32::try_from(first.sampling_count())
            .map_err(|_| Error::record(&first.id, "sampling count overflows u32"))?;
        Dataset::new(records, p)
    }

    pub fn records(&self) -> &[QuestionRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<QuestionRecord> {
        self.records
    }

    pub fn sampling_count(&self) -> u32 {
        self.sampling_count
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest option count across records.
    pub fn max_options(&self) -> usize {
        self.records.iter().map(|r| r.num_options()).max().unwrap_or(0)
    }

    /// Records whose `group` equals `group`.
    pub fn restrict_to_group(&self, group: &str) -> Dataset {
        Dataset {
            records: self
                .records
                .iter()
                .filter(|r| r.group.as_deref() == Some(group))
                .cloned()
                .collect(),
            sampling_count: self.sampling_count,
        }
    }

    /// Distinct group labels in first-seen order.
    pub fn groups(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .filter_map(|r| r.group.as_deref())
            .filter(|g| seen.insert(*g))
            .collect()
    }

    /// Frequency distributions paired with ground truth, in record order.
    pub fn labeled(&self) -> Vec<LabeledDistribution> {
        self.records
            .iter()
            .map(|r| {
                // validated at construction, so these cannot fail
                let dist = frequency_distribution(r).expect("validated record");
                LabeledDistribution::new(dist, r.truth_index).expect("validated record")
            })
            .collect()
    }
}

/// Drops records whose ground truth never appeared among the samples.
pub fn filter_unanswerable(data: Dataset) -> (Dataset, usize) {
    let before = data.records.len();
    let Dataset {
        records,
        sampling_count,
    } = data;
    let records: Vec<_> = records.into_iter().filter(QuestionRecord::is_answerable).collect();
    let discarded = before - records.len();
    (
        Dataset {
            records,
            sampling_count,
        },
        discarded,
    )
}

/// An answer distribution together with the index of the correct option.
///
/// This is the unit the calibration harness works on; it also covers
/// distributions that did not come from integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDistribution {
    dist: ClassDistribution,
    truth_index: usize,
    truth_score: f64,
}

impl LabeledDistribution {
    pub fn new(dist: ClassDistribution, truth_index: usize) -> Result<Self> {
        let truth_score = calibration_score(&dist, truth_index)?;
        Ok(LabeledDistribution {
            dist,
            truth_index,
            truth_score,
        })
    }

    pub fn dist(&self) -> &ClassDistribution {
        &self.dist
    }

    pub fn truth_index(&self) -> usize {
        self.truth_index
    }

    /// Nonconformity of the ground-truth option.
    pub fn truth_score(&self) -> f64 {
        self.truth_score
    }
}
