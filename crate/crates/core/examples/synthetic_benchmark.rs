//! Trains the full 22-class, 45-species model on a synthetic three-script
//! corpus and reports held-out scores.
//!
//!     cargo run --release --example synthetic_benchmark

use std::time::Instant;

use charseg::analysis::evaluate;
use charseg::segmenter::{train, TrainConfig};
use charseg::synthetic::{generate, split, SyntheticConfig};

fn main() -> charseg::Result<()> {
    let corpus = generate(&SyntheticConfig::default());
    let (train_set, test_set) = split(&corpus.sentences, 0.1);
    println!("train {} sentences, test {} sentences", train_set.len(), test_set.len());

    let config = TrainConfig::default();
    let start = Instant::now();
    let model = train(&train_set, &config, &mut |it| {
        if it.iteration % 10 == 0 {
            println!("iter {:>4}  objective {:.4}  nonzero {}", it.iteration, it.objective, it.nonzero);
        }
    })?;
    println!("trained in {:.1?} with {} features", start.elapsed(), model.crf.dict.len());

    let lexicon = model.training_lexicon();
    let system = test_set
        .iter()
        .map(|s| model.segment_with(s.chars(), &lexicon))
        .collect::<charseg::Result<Vec<_>>>()?;
    let report = evaluate(&test_set, &system, &model.train_vocab(), &model.scheme)?;
    print!("{report}");
    Ok(())
}
