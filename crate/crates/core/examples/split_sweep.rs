//! Error rate at a fixed alpha = 0.2 across calibration fractions, for a few
//! synthetic "models", rendered as a grid.
//!
//! ```bash
//! cargo run --release -p conformal-mcq --example split_sweep
//! ```

use conformal_mcq::conformal::RiskLevel;
use conformal_mcq::distribution::filter_unanswerable;
use conformal_mcq::harness::sweep_split;
use conformal_mcq::io::{render_report, SweepTable};
use conformal_mcq::synthetic::{generate_dataset, GeneratorConfig};

fn main() -> conformal_mcq::Result<()> {
    let models = [
        ("strong", 4.0, 0.9),
        ("medium", 1.0, 0.7),
        ("weak", 0.3, 0.4),
    ];
    let ratios: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let level = RiskLevel::new(0.2)?;

    let mut rows = Vec::new();
    for (seed, (name, concentration, accuracy)) in models.into_iter().enumerate() {
        let cfg = GeneratorConfig {
            num_records: 1500,
            concentration,
            accuracy,
            seed: seed as u64,
            ..Default::default()
        };
        let data = filter_unanswerable(generate_dataset(&cfg)?).0;
        let result = sweep_split(&data, &ratios, level, 100, 3)?;
        rows.push((name.to_string(), SweepTable::from(&result)));
    }
    print!("{}", render_report(&rows));
    Ok(())
}
