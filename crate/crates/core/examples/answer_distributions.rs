//! From sampled answer counts to frequency distributions, dropping questions
//! the model never answered correctly.
//!
//! ```bash
//! cargo run -p conformal-mcq --example answer_distributions
//! ```

use conformal_mcq::distribution::{filter_unanswerable, frequency_distribution, Dataset};
use conformal_mcq::io::parse_dataset;

const SAMPLES: &str = r#"
{"id":"sqa-001","options":["A","B","C","D"],"counts":[18,9,6,3],"truth":0,"group":"model-a"}
{"id":"sqa-002","options":["A","B","C","D"],"counts":[0,36,0,0],"truth":2,"group":"model-a"}
{"id":"sqa-003","options":["A","B","C"],"counts":[12,12,12],"truth":1,"group":"model-a"}
{"id":"sqa-004","options":["A","B"],"counts":[1,35],"truth":0,"group":"model-b"}
"#;

fn main() -> conformal_mcq::Result<()> {
    let data: Dataset = parse_dataset(SAMPLES, "inline.jsonl".as_ref(), Some(36))?;
    println!("{} questions, P = {}, groups {:?}", data.len(), data.sampling_count(), data.groups());

    for r in data.records() {
        let dist = frequency_distribution(r)?;
        let probs: Vec<String> = dist.probs().iter().map(|p| format!("{p:.3}")).collect();
        println!("{:<8} f = [{}]  truth {}", r.id, probs.join(", "), r.options[r.truth_index]);
    }

    let (kept, dropped) = filter_unanswerable(data);
    println!("kept {} questions, discarded {dropped} with no correct sample", kept.len());
    Ok(())
}
