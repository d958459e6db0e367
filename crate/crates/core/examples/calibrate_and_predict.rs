//! Calibrate a threshold on a handful of questions and build prediction sets.
//!
//! ```bash
//! cargo run -p conformal-mcq --example calibrate_and_predict
//! ```

use conformal_mcq::conformal::{
    calibration_score, conformal_rank, conformal_threshold, nonconformity_scores, prediction_set,
    romano_upper_bound, CalibrationScores, ClassDistribution, RiskLevel,
};

fn main() -> conformal_mcq::Result<()> {
    // (answer frequencies, index of the correct option)
    let calibration = [
        (vec![0.75, 0.25, 0.0, 0.0], 0),
        (vec![0.5, 0.25, 0.125, 0.125], 1),
        (vec![1.0, 0.0, 0.0, 0.0], 0),
        (vec![0.25, 0.25, 0.5, 0.0], 2),
        (vec![0.125, 0.125, 0.125, 0.625], 3),
        (vec![0.5, 0.5, 0.0, 0.0], 0),
        (vec![0.875, 0.125, 0.0, 0.0], 1),
        (vec![0.0, 0.0, 0.25, 0.75], 3),
        (vec![0.375, 0.375, 0.25, 0.0], 2),
    ];

    let scores = calibration
        .iter()
        .map(|(p, y)| calibration_score(&ClassDistribution::new(p.clone())?, *y))
        .collect::<conformal_mcq::Result<Vec<_>>>()?;
    println!("calibration scores: {scores:?}");
    let scores = CalibrationScores::new(scores)?;

    let question = ClassDistribution::new(vec![0.55, 0.3, 0.1, 0.05])?;
    println!("test scores: {:?}", nonconformity_scores(&question).as_slice());

    for alpha in [0.05, 0.2, 0.4, 0.6] {
        let level = RiskLevel::new(alpha)?;
        let tau = conformal_threshold(&scores, level);
        let set = prediction_set(&question, tau);
        println!(
            "alpha {alpha:<4} k {:>2}  tau {tau:<12} set {:?}  coverage in [{:.3}, {:.3}]",
            conformal_rank(scores.len(), level),
            set.members(),
            1.0 - alpha,
            romano_upper_bound(scores.len(), level)?.min(1.0),
        );
    }
    Ok(())
}
