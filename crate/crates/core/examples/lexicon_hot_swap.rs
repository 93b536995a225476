//! Swaps the lexicon under a trained model while readers keep segmenting.
//!
//! New lexemes are injected into the test sentences. Segmenting them with
//! the training lexicon and again after an expansion shows the change in
//! OOV recall; the model weights are never touched.
//!
//!     cargo run --release --example lexicon_hot_swap

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use charseg::analysis::evaluate;
use charseg::corpus::Sentence;
use charseg::lexicon::{Lexicon, SharedLexicon};
use charseg::model_file;
use charseg::segmenter::{train, SegmenterModel, TrainConfig};
use charseg::synthetic::{generate, generate_lexemes, inject_lexemes, split, SyntheticConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn oov_recall(model: &SegmenterModel, test: &[Sentence], lexicon: &Lexicon) -> charseg::Result<f64> {
    let system = test
        .iter()
        .map(|s| model.segment_with(s.chars(), lexicon))
        .collect::<charseg::Result<Vec<_>>>()?;
    let report = evaluate(test, &system, &model.train_vocab(), &model.scheme)?;
    Ok(report.recall_oov.unwrap_or(f64::NAN))
}

fn main() -> charseg::Result<()> {
    let corpus = generate(&SyntheticConfig { num_sentences: 800, ..SyntheticConfig::default() });
    let (train_set, test_set) = split(&corpus.sentences, 0.1);
    let model = Arc::new(train(&train_set, &TrainConfig::default(), &mut |_| {})?);
    let weights = model_file::to_bytes(&model);

    let known: BTreeSet<String> = corpus.lexemes.iter().cloned().collect();
    let fresh = generate_lexemes(&mut ChaCha8Rng::seed_from_u64(11), 10, &known);
    let test_set = Arc::new(inject_lexemes(&test_set, &fresh, 3, 12));
    println!("new lexemes: {}", fresh.join(" "));

    let shared = Arc::new(SharedLexicon::new(model.training_lexicon()));
    let before = shared.snapshot();
    println!("generation {}: OOV recall {:.4}", before.generation(), oov_recall(&model, &test_set, &before)?);

    let done = Arc::new(AtomicUsize::new(0));
    let readers: Vec<_> = (0..4)
        .map(|k| {
            let (model, shared, test_set, done) = (model.clone(), shared.clone(), test_set.clone(), done.clone());
            thread::spawn(move || -> charseg::Result<BTreeSet<u64>> {
                let mut seen = BTreeSet::new();
                for s in test_set.iter().skip(k).step_by(4) {
                    // One snapshot per sentence: a swap never lands mid-sentence.
                    let snapshot = shared.snapshot();
                    seen.insert(snapshot.generation());
                    model.segment_with(s.chars(), &snapshot)?;
                    done.fetch_add(1, Ordering::Relaxed);
                }
                Ok(seen)
            })
        })
        .collect();
    while done.load(Ordering::Relaxed) < test_set.len() / 2 {
        thread::yield_now();
    }
    let summary = shared.expand(&fresh, std::iter::empty::<&str>())?;
    for r in readers {
        let seen = r.join().expect("reader thread")?;
        println!("reader saw generations {seen:?}");
    }

    let after = shared.snapshot();
    println!("expanded: {} added, {} already present", summary.added, summary.duplicates);
    println!("generation {}: OOV recall {:.4}", after.generation(), oov_recall(&model, &test_set, &after)?);
    assert_eq!(model_file::to_bytes(&model), weights);
    println!("model bytes unchanged");
    Ok(())
}
