//! Repeated random calibration/test splits, and sweeps over the risk level or
//! the split ratio.
//!
//! Trial `t` of a sweep always draws its partition from `stream_rng(seed, t)`.
//! An alpha sweep reuses each trial's partition for every alpha (paired
//! design), which makes within-trial comparisons across alpha exact. Trials
//! run on the rayon pool and are gathered back in trial order before any
//! reduction, so results are bit-identical for every worker count.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::conformal::{prediction_set, threshold_from_sorted, PredictionSet, RiskLevel, Threshold};
use crate::distribution::{Dataset, LabeledDistribution};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Number of trials averaged per sweep point unless overridden.
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Fraction of records assigned to calibration.
    pub split_ratio: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            split_ratio: 0.5,
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub empirical_error_rate: f64,
    pub empirical_coverage: f64,
    pub average_set_size: f64,
    pub calibration_size: usize,
    pub test_size: usize,
    pub threshold: Threshold,
}

/// Calibration-set size for `len` records: `ratio * len` rounded half up,
/// clamped so that both sides keep at least one record.
pub fn calibration_count(len: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::DegenerateSplit(format!(
            "split ratio must lie strictly between 0 and 1, got {ratio}"
        )));
    }
    if len < 2 {
        return Err(Error::DegenerateSplit(format!(
            "need at least 2 records to split, got {len}"
        )));
    }
    let n = (ratio * len as f64 + 0.5).floor() as usize;
    Ok(n.clamp(1, len - 1))
}

/// Random partition of `0..len` into (calibration, test) index lists, each
/// in ascending order.
pub fn split_indices<R: Rng + ?Sized>(
    len: usize,
    ratio: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_cal = calibration_count(len, ratio)?;
    let mut in_cal = vec![false; len];
    for i in index::sample(rng, len, n_cal) {
        in_cal[i] = true;
    }
    let (cal, test): (Vec<usize>, Vec<usize>) = (0..len).partition(|&i| in_cal[i]);
    Ok((cal, test))
}

/// Uniform random partition of `data` into calibration and test sets.
pub fn split<R: Rng + ?Sized>(data: &Dataset, ratio: f64, rng: &mut R) -> Result<(Dataset, Dataset)> {
    let (cal, test) = split_indices(data.len(), ratio, rng)?;
    let pick = |idx: &[usize]| {
        Dataset::new(
            idx.iter().map(|&i| data.records()[i].clone()).collect(),
            data.sampling_count(),
        )
    };
    Ok((pick(&cal)?, pick(&test)?))
}

/// Fraction of questions whose ground truth is missing from its set.
pub fn empirical_error_rate(sets: &[PredictionSet], truths: &[usize]) -> Result<f64> {
    if sets.len() != truths.len() {
        return Err(Error::LengthMismatch {
            sets: sets.len(),
            truths: truths.len(),
        });
    }
    if sets.is_empty() {
        return Err(Error::EmptyInput("prediction sets"));
    }
    let missed = sets
        .iter()
        .zip(truths)
        .filter(|(set, &truth)| !set.contains(truth))
        .count();
    Ok(missed as f64 / sets.len() as f64)
}

pub fn average_set_size(sets: &[PredictionSet]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::EmptyInput("prediction sets"));
    }
    let total: usize = sets.iter().map(PredictionSet::len).sum();
    Ok(total as f64 / sets.len() as f64)
}

/// Scores one fixed partition at every requested risk level.
fn evaluate_partition(
    items: &[LabeledDistribution],
    cal: &[usize],
    test: &[usize],
    levels: &[RiskLevel],
) -> Result<Vec<TrialResult>> {
    let mut sorted: Vec<f64> = cal.iter().map(|&i| items[i].truth_score()).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let truths: Vec<usize> = test.iter().map(|&i| items[i].truth_index()).collect();

    levels
        .iter()
        .map(|&level| {
            let threshold = threshold_from_sorted(&sorted, level)?;
            let sets: Vec<PredictionSet> = test
                .iter()
                .map(|&i| prediction_set(items[i].dist(), threshold))
                .collect();
            let error = empirical_error_rate(&sets, &truths)?;
            Ok(TrialResult {
                empirical_error_rate: error,
                empirical_coverage: 1.0 - error,
                average_set_size: average_set_size(&sets)?,
                calibration_size: cal.len(),
                test_size: test.len(),
                threshold,
            })
        })
        .collect()
}

/// One split, calibration and evaluation pass over labeled distributions.
pub fn run_trial_labeled<R: Rng + ?Sized>(
    items: &[LabeledDistribution],
    ratio: f64,
    level: RiskLevel,
    rng: &mut R,
) -> Result<TrialResult> {
    let (cal, test) = split_indices(items.len(), ratio, rng)?;
    Ok(evaluate_partition(items, &cal, &test, &[level])?.remove(0))
}

/// One split, calibration and evaluation pass. `data` is expected to be
/// filtered already.
pub fn run_trial<R: Rng + ?Sized>(
    data: &Dataset,
    ratio: f64,
    level: RiskLevel,
    rng: &mut R,
) -> Result<TrialResult> {
    run_trial_labeled(&data.labeled(), ratio, level, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    SplitRatio,
}

/// Per-point aggregates over a fixed number of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_kind: SweepAxis,
    pub axis: Vec<f64>,
    pub trials: usize,
    pub mean_error: Vec<f64>,
    /// Population standard deviation of the error rate across trials.
    pub std_error: Vec<f64>,
    pub mean_coverage: Vec<f64>,
    pub mean_set_size: Vec<f64>,
    pub mean_calibration_size: Vec<f64>,
    /// `per_trial[point][trial]`.
    pub per_trial: Vec<Vec<TrialResult>>,
}

impl SweepResult {
    fn from_trials(axis_kind: SweepAxis, axis: Vec<f64>, per_trial: Vec<Vec<TrialResult>>) -> Self {
        let trials = per_trial.first().map_or(0, Vec::len);
        let mean = |xs: &mut dyn Iterator<Item = f64>| xs.sum::<f64>() / trials as f64;
        let mut out = SweepResult {
            axis_kind,
            axis,
            trials,
            mean_error: Vec::new(),
            std_error: Vec::new(),
            mean_coverage: Vec::new(),
            mean_set_size: Vec::new(),
            mean_calibration_size: Vec::new(),
            per_trial: Vec::new(),
        };
        for point in &per_trial {
            let m = mean(&mut point.iter().map(|t| t.empirical_error_rate));
            let var = mean(&mut point.iter().map(|t| (t.empirical_error_rate - m).powi(2)));
            out.mean_error.push(m);
            out.std_error.push(var.sqrt());
            out.mean_coverage.push(mean(&mut point.iter().map(|t| t.empirical_coverage)));
            out.mean_set_size.push(mean(&mut point.iter().map(|t| t.average_set_size)));
            out.mean_calibration_size
                .push(mean(&mut point.iter().map(|t| t.calibration_size as f64)));
        }
        out.per_trial = per_trial;
        out
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Monte Carlo standard error of the mean error rate at `point`.
    pub fn standard_error(&self, point: usize) -> f64 {
        self.std_error[point] / (self.trials as f64).sqrt()
    }
}

fn check_sweep_args(points: usize, what: &'static str, trials: usize) -> Result<()> {
    if points == 0 {
        return Err(Error::EmptyInput(what));
    }
    if trials == 0 {
        return Err(Error::EmptyInput("trials"));
    }
    Ok(())
}

/// Paired alpha sweep over labeled distributions.
pub fn sweep_alpha_labeled(
    items: &[LabeledDistribution],
    ratio: f64,
    alphas: &[RiskLevel],
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_sweep_args(alphas.len(), "alpha list", trials)?;
    calibration_count(items.len(), ratio)?;
    let by_trial: Vec<Vec<TrialResult>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let (cal, test) = split_indices(items.len(), ratio, &mut rng)?;
            evaluate_partition(items, &cal, &test, alphas)
        })
        .collect::<Result<_>>()?;

    // transpose to [alpha][trial]
    let per_point = (0..alphas.len())
        .map(|a| by_trial.iter().map(|row| row[a]).collect())
        .collect();
    Ok(SweepResult::from_trials(
        SweepAxis::Alpha,
        alphas.iter().map(|l| l.alpha()).collect(),
        per_point,
    ))
}

/// Sweeps the risk level at a fixed split ratio. Each trial's partition is
/// shared by all alphas.
pub fn sweep_alpha(
    data: &Dataset,
    ratio: f64,
    alphas: &[RiskLevel],
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    sweep_alpha_labeled(&data.labeled(), ratio, alphas, trials, seed)
}

pub fn sweep_split_labeled(
    items: &[LabeledDistribution],
    ratios: &[f64],
    level: RiskLevel,
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_sweep_args(ratios.len(), "ratio list", trials)?;
    for &r in ratios {
        calibration_count(items.len(), r)?;
    }
    let per_point = ratios
        .iter()
        .map(|&ratio| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(seed, t as u64);
                    run_trial_labeled(items, ratio, level, &mut rng)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult::from_trials(SweepAxis::SplitRatio, ratios.to_vec(), per_point))
}

/// Sweeps the split ratio at a fixed risk level.
pub fn sweep_split(
    data: &Dataset,
    ratios: &[f64],
    level: RiskLevel,
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    sweep_split_labeled(&data.labeled(), ratios, level, trials, seed)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
