//! Empirical error rate and set size across risk levels at a 1:1 split,
//! averaged over 100 paired trials. The CSV plots directly against y = x.
//!
//! ```bash
//! cargo run --release -p conformal-mcq --example alpha_sweep
//! ```

use conformal_mcq::conformal::RiskLevel;
use conformal_mcq::distribution::filter_unanswerable;
use conformal_mcq::harness::sweep_alpha;
use conformal_mcq::io::{parse_axis, sweep_csv};
use conformal_mcq::synthetic::{generate_dataset, GeneratorConfig};

fn main() -> conformal_mcq::Result<()> {
    let cfg = GeneratorConfig {
        num_records: 2000,
        accuracy: 0.7,
        seed: 42,
        ..Default::default()
    };
    let (data, dropped) = filter_unanswerable(generate_dataset(&cfg)?);
    eprintln!("{} questions ({dropped} discarded)", data.len());

    let alphas = parse_axis("0.1:0.9:0.1")?
        .into_iter()
        .map(RiskLevel::new)
        .collect::<conformal_mcq::Result<Vec<_>>>()?;
    let result = sweep_alpha(&data, 0.5, &alphas, 100, 7)?;
    print!("{}", sweep_csv(&result));

    for (i, a) in result.axis.iter().enumerate() {
        let margin = a - result.mean_error[i];
        eprintln!("alpha {a:.1}: error below alpha by {margin:+.4}");
    }
    Ok(())
}
