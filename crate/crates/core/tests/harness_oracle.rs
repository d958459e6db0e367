use std::collections::HashMap;

use conformal_mcq::conformal::{RiskLevel, Threshold};
use conformal_mcq::distribution::{Dataset, QuestionRecord};
use conformal_mcq::harness::{run_trial, split, sweep_alpha, sweep_split, TrialResult};
use conformal_mcq::rng::stream_rng;
use conformal_mcq::synthetic::{generate_dataset, GeneratorConfig};

const P: u32 = 36;

/// Six hand-picked questions over three options. Truth scores in units of
/// 1/36: 6, 18, 27, 30, 30, 18.
fn six() -> Dataset {
    let rows: [([u32; 3], usize); 6] = [
        ([30, 4, 2], 0),
        ([12, 18, 6], 1),
        ([9, 9, 18], 0),
        ([3, 27, 6], 2),
        ([24, 6, 6], 1),
        ([18, 12, 6], 0),
    ];
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, (c, t))| QuestionRecord {
            id: format!("q{i}"),
            options: vec!["A".into(), "B".into(), "C".into()],
            counts: c.to_vec(),
            truth_index: *t,
            group: None,
        })
        .collect();
    Dataset::new(records, P).unwrap()
}

/// Hand-enumeration on integer scores (36 - count), independent of the
/// floating-point path: with n = 3 and alpha = 0.5, k = ceil(0.5 * 4) = 2.
fn expected(data: &Dataset, cal: &[usize]) -> (u32, f64, f64) {
    let recs = data.records();
    let score = |r: &QuestionRecord, y: usize| P - r.counts[y];
    let cal_scores: Vec<u32> = cal.iter().map(|&i| score(&recs[i], recs[i].truth_index)).collect();
    let k = 2;
    let tau = *cal_scores
        .iter()
        .filter(|&&s| cal_scores.iter().filter(|&&t| t <= s).count() >= k)
        .min()
        .unwrap();
    let test: Vec<usize> = (0..recs.len()).filter(|i| !cal.contains(i)).collect();
    let (mut missed, mut total) = (0, 0);
    for &i in &test {
        let r = &recs[i];
        let members: Vec<usize> = (0..3).filter(|&y| score(r, y) <= tau).collect();
        total += members.len();
        missed += usize::from(!members.contains(&r.truth_index));
    }
    (
        tau,
        missed as f64 / test.len() as f64,
        total as f64 / test.len() as f64,
    )
}

fn ids(d: &Dataset) -> Vec<usize> {
    d.records().iter().map(|r| r.id[1..].parse().unwrap()).collect()
}

#[test]
fn six_record_trial_matches_enumeration() {
    let data = six();
    let level = RiskLevel::new(0.5).unwrap();

    // all C(6,3) partitions
    let mut table = HashMap::new();
    for mask in 0u32..64 {
        if mask.count_ones() == 3 {
            let cal: Vec<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
            table.insert(cal.clone(), expected(&data, &cal));
        }
    }
    assert_eq!(table.len(), 20);

    let mut seen = std::collections::HashSet::new();
    for seed in 0..40 {
        let (cal, test) = split(&data, 0.5, &mut stream_rng(seed, 0)).unwrap();
        let cal_ids = ids(&cal);
        assert_eq!(test.len(), 3);
        let (tau, err, size) = table[&cal_ids];
        let t: TrialResult = run_trial(&data, 0.5, level, &mut stream_rng(seed, 0)).unwrap();
        assert_eq!(t.threshold, Threshold::Finite(1.0 - f64::from(P - tau) / f64::from(P)));
        assert_eq!(t.empirical_error_rate, err, "seed {seed}, partition {cal_ids:?}");
        assert_eq!(t.average_set_size, size, "seed {seed}, partition {cal_ids:?}");
        assert_eq!((t.calibration_size, t.test_size), (3, 3));
        seen.insert(cal_ids);
    }
    assert!(seen.len() > 5, "rng explored only {} partitions", seen.len());
}

#[test]
fn six_record_frozen_partition() {
    // calibration {q0, q1, q2}: scores 6, 18, 27 -> tau = 18/36.
    // q3 {B} misses C; q4 {A} misses B; q5 {A} hits. Error 2/3, size 1.
    let (tau, err, size) = expected(&six(), &[0, 1, 2]);
    assert_eq!(tau, 18);
    assert_eq!(err, 2.0 / 3.0);
    assert_eq!(size, 1.0);
}

#[test]
fn synthetic_truth_dominates_wrong_options() {
    let cfg = GeneratorConfig {
        num_records: 2000,
        num_options: 4,
        sampling_count: 36,
        seed: 2024,
        ..Default::default()
    };
    let data = generate_dataset(&cfg).unwrap();
    let n = data.len() as f64;
    let p = f64::from(cfg.sampling_count);
    let truth_mean: f64 = data
        .records()
        .iter()
        .map(|r| f64::from(r.counts[r.truth_index]) / p)
        .sum::<f64>()
        / n;
    for offset in 1..4 {
        let wrong_mean: f64 = data
            .records()
            .iter()
            .map(|r| f64::from(r.counts[(r.truth_index + offset) % 4]) / p)
            .sum::<f64>()
            / n;
        assert!(truth_mean >= wrong_mean, "offset {offset}: {truth_mean} < {wrong_mean}");
    }
    // Dirichlet(1) over 4 options: E[max] = H_4 / 4. The truth holds the max
    // with probability 0.7, otherwise one of the three other components.
    let e_max = (1.0 + 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 4.0) / 4.0;
    let want = 0.7 * e_max + 0.3 * (1.0 - e_max) / 3.0;
    assert!((truth_mean - want).abs() < 0.02, "{truth_mean} vs {want}");
}

#[test]
fn sweeps_are_reproducible() {
    let data = generate_dataset(&GeneratorConfig { num_records: 300, seed: 1, ..Default::default() }).unwrap();
    let alphas: Vec<_> = [0.1, 0.2, 0.5].iter().map(|&a| RiskLevel::new(a).unwrap()).collect();
    assert_eq!(
        sweep_alpha(&data, 0.5, &alphas, 20, 3).unwrap(),
        sweep_alpha(&data, 0.5, &alphas, 20, 3).unwrap()
    );
    assert_ne!(
        sweep_alpha(&data, 0.5, &alphas, 20, 3).unwrap(),
        sweep_alpha(&data, 0.5, &alphas, 20, 4).unwrap()
    );
    let r = sweep_split(&data, &[0.3, 0.6], alphas[1], 20, 3).unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r.per_trial[0].len(), 20);
}

#[test]
fn alpha_sweep_reuses_partitions() {
    let data = generate_dataset(&GeneratorConfig { num_records: 200, seed: 8, ..Default::default() }).unwrap();
    let alphas: Vec<_> = [0.1, 0.4, 0.8].iter().map(|&a| RiskLevel::new(a).unwrap()).collect();
    let r = sweep_alpha(&data, 0.5, &alphas, 10, 5).unwrap();
    for t in 0..10 {
        // the single-alpha trial from the same stream sees the same partition
        for (a, &level) in alphas.iter().enumerate() {
            let single = run_trial(&data, 0.5, level, &mut stream_rng(5, t as u64)).unwrap();
            assert_eq!(single, r.per_trial[a][t]);
        }
    }
}

#[test]
fn k_exceeding_n_gives_full_sets() {
    let data = six();
    // n = 3, alpha = 0.2: k = ceil(3.2) = 4 > 3
    let t = run_trial(&data, 0.5, RiskLevel::new(0.2).unwrap(), &mut stream_rng(0, 0)).unwrap();
    assert_eq!(t.threshold, Threshold::IncludeAll);
    assert_eq!(t.empirical_error_rate, 0.0);
    assert_eq!(t.average_set_size, 3.0);
}
