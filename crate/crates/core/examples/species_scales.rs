//! Learns per-species feature scales from dev-set recall, prints the table,
//! and compares a model trained with them against unit scales.
//!
//!     cargo run --release --example species_scales

use std::collections::BTreeSet;

use charseg::analysis::evaluate;
use charseg::corpus::Sentence;
use charseg::features::{compute_species_scales, Scaling, SpeciesScale};
use charseg::lexicon::Lexicon;
use charseg::segmenter::{train_with_lexicon, SegmenterModel, TrainConfig};
use charseg::synthetic::{generate, generate_lexemes, inject_lexemes, split, SyntheticConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn score(model: &SegmenterModel, test: &[Sentence]) -> charseg::Result<String> {
    let lexicon = model.training_lexicon();
    let system = test
        .iter()
        .map(|s| model.segment_with(s.chars(), &lexicon))
        .collect::<charseg::Result<Vec<_>>>()?;
    let r = evaluate(test, &system, &model.train_vocab(), &model.scheme)?;
    Ok(format!("word F1 {:.4}  OOV recall {:.4}", r.word_f1(), r.recall_oov.unwrap_or(f64::NAN)))
}

fn main() -> charseg::Result<()> {
    let corpus = generate(&SyntheticConfig { num_lexemes: 60, num_sentences: 300, ..SyntheticConfig::default() });
    let (train, rest) = split(&corpus.sentences, 0.3);
    let (dev, test) = split(&rest, 0.5);
    let known: BTreeSet<String> = corpus.lexemes.iter().cloned().collect();
    let fresh = generate_lexemes(&mut ChaCha8Rng::seed_from_u64(5), 12, &known);
    let dev = inject_lexemes(&dev, &fresh[..6], 3, 6);
    let test = inject_lexemes(&test, &fresh[6..], 3, 7);

    let mut config = TrainConfig::default();
    config.optim.max_iter = 50;
    let lexicon = Lexicon::build_from_corpus(&train);
    let rows = compute_species_scales(&train, &dev, &lexicon, 0.325, &config)?;
    println!("{}", SpeciesScale::HEADER);
    for r in &rows {
        println!("{}", r.to_row());
    }

    let unit = train_with_lexicon(&train, &config, lexicon.clone(), &mut |_| {})?;
    config.features.scaling = Scaling::Learned(rows);
    let learned = train_with_lexicon(&train, &config, lexicon, &mut |_| {})?;
    println!("\nunit scales     {}", score(&unit, &test)?);
    println!("learned scales  {}", score(&learned, &test)?);
    Ok(())
}
