//! Exchangeable synthetic data with a tunable "model".
//!
//! Each question gets a latent answer distribution drawn from a symmetric
//! Dirichlet with parameter `1 / concentration`, so larger concentration means
//! sparser, more confident distributions. The largest latent component is
//! moved onto a designated mode option, which is the ground truth with
//! probability `accuracy` and a uniformly chosen wrong option otherwise. The
//! counts mode then draws `P` answers from the latent distribution; the
//! continuous mode exposes the latent distribution directly, which makes
//! calibration scores tie-free with probability one.
//!
//! Every record is generated from its own stream keyed by `(seed, index)`, so
//! output does not depend on how many threads do the work.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    conformal_rank, conformal_threshold, prediction_set, CalibrationScores, ClassDistribution,
    RiskLevel,
};
use crate::distribution::{Dataset, LabeledDistribution, QuestionRecord, DEFAULT_SAMPLING_COUNT};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub num_records: usize,
    pub num_options: usize,
    pub sampling_count: u32,
    /// Sharpness of the latent answer distributions; higher is more confident.
    pub concentration: f64,
    /// Probability that the latent mode is the ground truth.
    pub accuracy: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            num_records: 1000,
            num_options: 4,
            sampling_count: DEFAULT_SAMPLING_COUNT,
            concentration: 1.0,
            accuracy: 0.7,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_records == 0 {
            return bad("num_records must be at least 1".into());
        }
        if self.num_options < 2 {
            return bad(format!("num_options must be at least 2, got {}", self.num_options));
        }
        if self.sampling_count == 0 {
            return bad("sampling_count must be at least 1".into());
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return bad(format!("concentration must be positive, got {}", self.concentration));
        }
        if !(0.0..=1.0).contains(&self.accuracy) {
            return bad(format!("accuracy must lie in [0, 1], got {}", self.accuracy));
        }
        Ok(())
    }
}

/// Label for option `i`: A, B, ..., Z, AA, AB, ...
pub fn option_label(mut i: usize) -> String {
    let mut label = Vec::new();
    loop {
        label.push(b'A' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    label.reverse();
    String::from_utf8(label).expect("ascii")
}

struct Latent {
    probs: Vec<f64>,
    truth: usize,
}

/// `ln G` for `G ~ Gamma(shape, 1)`. Small shapes go through the
/// `Gamma(a) = Gamma(a + 1) * U^(1/a)` identity in log space so that sparse
/// Dirichlet draws never underflow to an all-zero vector.
fn log_gamma_sample<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape");
        return g.sample(rng).max(f64::MIN_POSITIVE).ln();
    }
    let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape");
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    g.sample(rng).max(f64::MIN_POSITIVE).ln() + u.ln() / shape
}

fn draw_latent<R: Rng + ?Sized>(cfg: &GeneratorConfig, rng: &mut R) -> Latent {
    let k = cfg.num_options;
    let truth = rng.random_range(0..k);
    let mode = if rng.random::<f64>() < cfg.accuracy {
        truth
    } else {
        let wrong = rng.random_range(0..k - 1);
        if wrong >= truth {
            wrong + 1
        } else {
            wrong
        }
    };

    let shape = 1.0 / cfg.concentration;
    let logs: Vec<f64> = (0..k).map(|_| log_gamma_sample(shape, rng)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);

    let argmax = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    probs.swap(argmax, mode);
    Latent { probs, truth }
}

fn draw_counts<R: Rng + ?Sized>(probs: &[f64], samples: u32, rng: &mut R) -> Vec<u32> {
    let mut counts = vec![0u32; probs.len()];
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    for _ in 0..samples {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = last;
        for (i, &p) in probs.iter().enumerate().take(last) {
            acc += p;
            if u < acc {
                pick = i;
                break;
            }
        }
        counts[pick] += 1;
    }
    counts
}

fn generate_record(cfg: &GeneratorConfig, index: usize, options: &[String]) -> QuestionRecord {
    let mut rng = stream_rng(cfg.seed, index as u64);
    let latent = draw_latent(cfg, &mut rng);
    QuestionRecord {
        id: format!("syn-{index:06}"),
        options: options.to_vec(),
        counts: draw_counts(&latent.probs, cfg.sampling_count, &mut rng),
        truth_index: latent.truth,
        group: None,
    }
}

/// Draws `num_records` i.i.d. questions with sampled answer counts.
pub fn generate_dataset(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let options: Vec<String> = (0..cfg.num_options).map(option_label).collect();
    let records: Vec<QuestionRecord> = (0..cfg.num_records)
        .into_par_iter()
        .map(|i| generate_record(cfg, i, &options))
        .collect();
    Dataset::new(records, cfg.sampling_count)
}

/// Draws `num_records` i.i.d. questions and returns their latent
/// distributions as-is, skipping the counting step. `sampling_count` is
/// ignored.
pub fn generate_continuous(cfg: &GeneratorConfig) -> Result<Vec<LabeledDistribution>> {
    cfg.validate()?;
    (0..cfg.num_records)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            let latent = draw_latent(cfg, &mut rng);
            let dist = ClassDistribution::new(latent.probs)?;
            LabeledDistribution::new(dist, latent.truth)
        })
        .collect()
}

/// Exact marginal coverage of the split conformal predictor for tie-free
/// exchangeable scores: `min(1, k / (n + 1))` with `k` the conformal rank.
pub fn coverage_oracle(cal: &CalibrationScores, level: RiskLevel) -> Result<f64> {
    let mut sorted = cal.as_slice().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::TiedScores);
    }
    let n = sorted.len();
    let k = conformal_rank(n, level);
    Ok((k as f64 / (n as f64 + 1.0)).min(1.0))
}

/// Monte Carlo estimate of marginal coverage from fresh draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    pub mean: f64,
    /// Population standard deviation of per-trial coverage.
    pub std: f64,
    pub trials: usize,
}

impl CoverageEstimate {
    pub fn standard_error(&self) -> f64 {
        self.std / (self.trials as f64).sqrt()
    }
}

/// Estimates marginal coverage by redrawing the whole data set every trial.
///
/// Each trial generates `calibration_size + test_size` continuous records
/// (tie-free scores) from `template` with a per-trial seed, calibrates on the
/// first `calibration_size` and measures coverage on the rest. Unlike the
/// split harness, this integrates over the data distribution too, so the
/// mean converges to [`coverage_oracle`].
pub fn fresh_draw_coverage(
    template: &GeneratorConfig,
    calibration_size: usize,
    test_size: usize,
    level: RiskLevel,
    trials: usize,
    seed: u64,
) -> Result<CoverageEstimate> {
    if calibration_size == 0 || test_size == 0 || trials == 0 {
        return Err(Error::InvalidConfig(
            "calibration_size, test_size and trials must all be at least 1".into(),
        ));
    }
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut seeder = stream_rng(seed, t as u64);
            let cfg = GeneratorConfig {
                num_records: calibration_size + test_size,
                seed: seeder.random(),
                ..template.clone()
            };
            let items = generate_continuous(&cfg)?;
            let (cal, test) = items.split_at(calibration_size);
            let scores =
                CalibrationScores::new(cal.iter().map(LabeledDistribution::truth_score).collect())?;
            let tau = conformal_threshold(&scores, level);
            let covered = test
                .iter()
                .filter(|item| prediction_set(item.dist(), tau).contains(item.truth_index()))
                .count();
            Ok(covered as f64 / test_size as f64)
        })
        .collect::<Result<_>>()?;

    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let var = per_trial.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / trials as f64;
    Ok(CoverageEstimate {
        mean,
        std: var.sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = GeneratorConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            GeneratorConfig { num_records: 0, ..ok.clone() },
            GeneratorConfig { num_options: 1, ..ok.clone() },
            GeneratorConfig { sampling_count: 0, ..ok.clone() },
            GeneratorConfig { concentration: 0.0, ..ok.clone() },
            GeneratorConfig { concentration: f64::NAN, ..ok.clone() },
            GeneratorConfig { accuracy: 1.5, ..ok.clone() },
        ] {
            assert!(generate_dataset(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn labels() {
        assert_eq!(option_label(0), "A");
        assert_eq!(option_label(25), "Z");
        assert_eq!(option_label(26), "AA");
        assert_eq!(option_label(27), "AB");
    }

    #[test]
    fn same_seed_same_dataset() {
        let cfg = GeneratorConfig { num_records: 200, seed: 11, ..Default::default() };
        assert_eq!(generate_dataset(&cfg).unwrap(), generate_dataset(&cfg).unwrap());
        let other = GeneratorConfig { seed: 12, ..cfg.clone() };
        assert_ne!(generate_dataset(&cfg).unwrap(), generate_dataset(&other).unwrap());
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = GeneratorConfig { num_records: 300, seed: 5, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| generate_dataset(&cfg).unwrap());
        let b = four.install(|| generate_dataset(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn sharp_accurate_model_puts_argmax_on_truth() {
        let cfg = GeneratorConfig {
            num_records: 500,
            concentration: 1e6,
            accuracy: 1.0,
            seed: 3,
            ..Default::default()
        };
        for r in generate_dataset(&cfg).unwrap().records() {
            let argmax = (0..r.counts.len()).max_by_key(|&i| r.counts[i]).unwrap();
            assert_eq!(argmax, r.truth_index, "{r:?}");
            assert_eq!(r.counts[r.truth_index], cfg.sampling_count);
        }
    }

    #[test]
    fn latent_probabilities_are_normalized() {
        let cfg = GeneratorConfig { concentration: 50.0, num_records: 200, seed: 9, ..Default::default() };
        for item in generate_continuous(&cfg).unwrap() {
            let s: f64 = item.dist().probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_examples() {
        let a = |x| RiskLevel::new(x).unwrap();
        let four = CalibrationScores::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(coverage_oracle(&four, a(0.5)).unwrap(), 0.6);
        assert_eq!(coverage_oracle(&four, a(0.1)).unwrap(), 1.0);
        let hundred = CalibrationScores::new((0..99).map(|i| i as f64 / 100.0).collect()).unwrap();
        assert!((coverage_oracle(&hundred, a(0.1)).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn oracle_rejects_ties() {
        let tied = CalibrationScores::new(vec![0.2, 0.5, 0.2]).unwrap();
        let err = coverage_oracle(&tied, RiskLevel::new(0.5).unwrap()).unwrap_err();
        assert_eq!(err.to_string(), "oracle requires tie-free scores");
    }
}
