//! Split conformal predictor over per-option answer frequencies.
//!
//! The nonconformity of option `y` is `1 - f(y|x)`, where `f` is the empirical
//! frequency with which the model produced `y`. Calibration takes the
//! `ceil((1 - alpha)(n + 1))`-th smallest calibration score as the threshold
//! `tau`; the prediction set keeps every option whose score is `<= tau`. When
//! that rank exceeds `n` the threshold is [`Threshold::IncludeAll`].
//!
//! Everything here is pure and allocation-light, so it can be shared freely
//! across sweep workers.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of a frequency vector.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Slack used when taking the ceiling of `(1 - alpha)(n + 1)`, so that
/// decimal risk levels like 0.7 do not pick up a spurious extra rank from
/// binary rounding.
const RANK_SLACK: f64 = 1e-9;

/// Tolerated miscoverage probability `alpha`, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskLevel(f64);

impl RiskLevel {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(RiskLevel(alpha))
        } else {
            Err(Error::InvalidRiskLevel(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RiskLevel {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        RiskLevel::new(alpha)
    }
}

impl From<RiskLevel> for f64 {
    fn from(level: RiskLevel) -> f64 {
        level.0
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Empirical answer distribution `f(.|x)` over `K >= 2` options.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 options, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!(
                "frequency {p} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "frequencies sum to {total}, expected 1"
            )));
        }
        Ok(ClassDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_options(&self) -> usize {
        self.probs.len()
    }
}

/// Per-option nonconformity scores for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Scores of the calibration examples at their ground-truth option.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationScores(Vec<f64>);

impl CalibrationScores {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyCalibration);
        }
        if let Some(&s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidScore(s));
        }
        Ok(CalibrationScores(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Calibrated inclusion threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// An order statistic of the calibration scores.
    Finite(f64),
    /// The required rank exceeds the calibration size: every option is kept.
    IncludeAll,
}

impl Threshold {
    /// Threshold as a number, with `IncludeAll` mapped to `+inf`.
    pub fn value(self) -> f64 {
        match self {
            Threshold::Finite(tau) => tau,
            Threshold::IncludeAll => f64::INFINITY,
        }
    }

    pub fn is_include_all(self) -> bool {
        matches!(self, Threshold::IncludeAll)
    }

    /// Whether a candidate with nonconformity `score` is admitted.
    #[inline]
    pub fn admits(self, score: f64) -> bool {
        match self {
            Threshold::Finite(tau) => score <= tau,
            Threshold::IncludeAll => true,
        }
    }
}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(tau) => write!(f, "{tau}"),
            Threshold::IncludeAll => f.write_str("include_all"),
        }
    }
}

/// Option indices retained for one question, in ascending order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionSet {
    members: Vec<usize>,
}

impl PredictionSet {
    /// Builds a set from arbitrary indices; duplicates are dropped.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = indices.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        PredictionSet { members }
    }

    pub fn full(num_options: usize) -> Self {
        PredictionSet {
            members: (0..num_options).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, option: usize) -> bool {
        self.members.binary_search(&option).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn nonconformity_scores(dist: &ClassDistribution) -> ScoreVector {
    ScoreVector(dist.probs.iter().map(|p| 1.0 - p).collect())
}

/// Nonconformity of the ground-truth option.
pub fn calibration_score(dist: &ClassDistribution, truth_index: usize) -> Result<f64> {
    dist.probs
        .get(truth_index)
        .map(|p| 1.0 - p)
        .ok_or(Error::IndexOutOfRange {
            index: truth_index,
            num_options: dist.num_options(),
        })
}

/// The 1-based rank `k = ceil((1 - alpha)(n + 1))` of the conformal quantile.
pub fn conformal_rank(n: usize, level: RiskLevel) -> usize {
    let raw = (1.0 - level.alpha()) * (n as f64 + 1.0);
    // raw is at most n + 1, so the cast cannot overflow
    (raw - RANK_SLACK).ceil().max(1.0) as usize
}

/// Conformal quantile of the calibration scores at risk level `alpha`.
///
/// Runs in expected linear time via selection; the result depends only on
/// the multiset of scores, never on their order.
pub fn conformal_threshold(cal: &CalibrationScores, level: RiskLevel) -> Threshold {
    let n = cal.len();
    let k = conformal_rank(n, level);
    if k > n {
        return Threshold::IncludeAll;
    }
    let mut scratch = cal.0.clone();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    Threshold::Finite(*kth)
}

/// Same as [`conformal_threshold`] but over scores already sorted ascending.
/// Lets a sweep sort once and read off many risk levels.
pub fn threshold_from_sorted(sorted: &[f64], level: RiskLevel) -> Result<Threshold> {
    if sorted.is_empty() {
        return Err(Error::EmptyCalibration);
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let k = conformal_rank(sorted.len(), level);
    Ok(if k > sorted.len() {
        Threshold::IncludeAll
    } else {
        Threshold::Finite(sorted[k - 1])
    })
}

pub fn prediction_set(dist: &ClassDistribution, threshold: Threshold) -> PredictionSet {
    if threshold.is_include_all() {
        return PredictionSet::full(dist.num_options());
    }
    PredictionSet {
        members: dist
            .probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| threshold.admits(1.0 - p))
            .map(|(y, _)| y)
            .collect(),
    }
}

/// Romano upper bound on marginal coverage, `1 - alpha + 1/(n + 1)`.
pub fn romano_upper_bound(n: usize, level: RiskLevel) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroCalibrationSize);
    }
    Ok(1.0 - level.alpha() + 1.0 / (n as f64 + 1.0))
}
