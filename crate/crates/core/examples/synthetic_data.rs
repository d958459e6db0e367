//! Generate exchangeable synthetic questions and check coverage against the
//! exact value `k / (n + 1)`.
//!
//! ```bash
//! cargo run --release -p conformal-mcq --example synthetic_data
//! ```

use conformal_mcq::conformal::{CalibrationScores, RiskLevel};
use conformal_mcq::io::dataset_to_jsonl;
use conformal_mcq::synthetic::{
    coverage_oracle, fresh_draw_coverage, generate_dataset, GeneratorConfig,
};

fn main() -> conformal_mcq::Result<()> {
    let cfg = GeneratorConfig {
        num_records: 5,
        seed: 7,
        ..Default::default()
    };
    print!("{}", dataset_to_jsonl(&generate_dataset(&cfg)?));

    for (n, alpha) in [(4, 0.5), (19, 0.2), (99, 0.1)] {
        let level = RiskLevel::new(alpha)?;
        let probe = CalibrationScores::new((0..n).map(|i| i as f64 / n as f64).collect())?;
        let exact = coverage_oracle(&probe, level)?;
        let est = fresh_draw_coverage(&cfg, n, 20, level, 20_000, 1)?;
        println!(
            "n {n:>3} alpha {alpha}: exact {exact:.4}  monte carlo {:.4} +/- {:.4}",
            est.mean,
            est.standard_error()
        );
    }
    Ok(())
}
