//! Two ways to end up with nearly full prediction sets at small alpha: a
//! model whose calibration scores all sit high, and a calibration set too
//! small for the requested rank (k > n).
//!
//! ```bash
//! cargo run --release -p conformal-mcq --example quantile_inflation
//! ```

use conformal_mcq::conformal::{conformal_rank, RiskLevel};
use conformal_mcq::distribution::filter_unanswerable;
use conformal_mcq::harness::sweep_alpha;
use conformal_mcq::synthetic::{generate_dataset, GeneratorConfig};

fn main() -> conformal_mcq::Result<()> {
    let level = RiskLevel::new(0.1)?;
    for (label, concentration, accuracy) in [("confident", 4.0, 0.9), ("near chance", 0.05, 0.25)] {
        let cfg = GeneratorConfig {
            num_records: 2000,
            concentration,
            accuracy,
            seed: 5,
            ..Default::default()
        };
        let data = filter_unanswerable(generate_dataset(&cfg)?).0;
        let mean_score: f64 =
            data.labeled().iter().map(|l| l.truth_score()).sum::<f64>() / data.len() as f64;
        let r = sweep_alpha(&data, 0.5, &[level], 100, 1)?;
        println!(
            "{label:<12} mean calibration score {mean_score:.3}  average set size {:.3} of {}",
            r.mean_set_size[0], cfg.num_options
        );
    }

    // 16 questions split 1:1 leaves n = 8, and k = ceil(0.9 * 9) = 9 > 8
    let tiny = generate_dataset(&GeneratorConfig {
        num_records: 16,
        concentration: 4.0,
        accuracy: 0.9,
        seed: 5,
        ..Default::default()
    })?;
    let r = sweep_alpha(&tiny, 0.5, &[level], 100, 1)?;
    println!(
        "n = 8: k = {} -> every set is full, average size {:.1}",
        conformal_rank(8, level),
        r.mean_set_size[0]
    );
    Ok(())
}
