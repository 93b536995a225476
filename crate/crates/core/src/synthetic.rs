//! Seeded toy corpora for tests, examples and benchmarks.
//!
//! Lexemes are drawn from three disjoint character ranges standing in for
//! three scripts (hiragana, kanji and Latin lowercase). Each lexeme uses a
//! single range. Sentences are sequences of lexemes sampled with Zipf-like
//! frequencies.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;

/// The three character ranges, as `(first, count)`.
pub const SCRIPT_RANGES: [(char, u32); 3] = [('\u{3042}', 40), ('\u{4E00}', 60), ('a', 26)];

/// Relative frequency of lexeme lengths 1..=7.
const LENGTH_WEIGHTS: [f64; 7] = [0.12, 0.40, 0.25, 0.11, 0.06, 0.04, 0.02];

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub num_lexemes: usize,
    pub num_sentences: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Exponent of the Zipf-like lexeme frequency distribution.
    pub zipf: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { num_lexemes: 200, num_sentences: 2000, min_words: 3, max_words: 10, zipf: 0.8, seed: 7 }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub lexemes: Vec<String>,
    pub sentences: Vec<Sentence>,
}

fn random_lexeme<R: Rng>(rng: &mut R, lengths: &WeightedIndex<f64>) -> String {
    let (first, count) = SCRIPT_RANGES[rng.gen_range(0..SCRIPT_RANGES.len())];
    let len = lengths.sample(rng) + 1;
    (0..len)
        .map(|_| char::from_u32(first as u32 + rng.gen_range(0..count)).unwrap())
        .collect()
}

/// `n` distinct lexemes not in `exclude`.
pub fn generate_lexemes<R: Rng>(rng: &mut R, n: usize, exclude: &BTreeSet<String>) -> Vec<String> {
    let lengths = WeightedIndex::new(LENGTH_WEIGHTS).unwrap();
    let mut seen = exclude.clone();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = random_lexeme(rng, &lengths);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Generates a corpus according to `config`.
pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lexemes = generate_lexemes(&mut rng, config.num_lexemes, &BTreeSet::new());
    let weights: Vec<f64> = (0..lexemes.len()).map(|r| 1.0 / ((r + 1) as f64).powf(config.zipf)).collect();
    let pick = WeightedIndex::new(&weights).unwrap();
    let sentences = (0..config.num_sentences)
        .map(|_| {
            let n = rng.gen_range(config.min_words..=config.max_words);
            let words: Vec<&str> = (0..n).map(|_| lexemes[pick.sample(&mut rng)].as_str()).collect();
            Sentence::from_words(&words).unwrap()
        })
        .collect();
    SyntheticCorpus { lexemes, sentences }
}

/// Splits off the last `test_fraction` of the sentences.
pub fn split(sentences: &[Sentence], test_fraction: f64) -> (Vec<Sentence>, Vec<Sentence>) {
    let n_test = ((sentences.len() as f64) * test_fraction).round() as usize;
    let cut = sentences.len() - n_test.min(sentences.len());
    (sentences[..cut].to_vec(), sentences[cut..].to_vec())
}

/// Replaces one random word in each of several sentences with a new lexeme,
/// cycling through `new_lexemes` so each appears at least once when there
/// are enough sentences.
pub fn inject_lexemes(sentences: &[Sentence], new_lexemes: &[String], per_lexeme: usize, seed: u64) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = sentences.to_vec();
    if new_lexemes.is_empty() || out.is_empty() {
        return out;
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.shuffle(&mut rng);
    let total = (new_lexemes.len() * per_lexeme).min(out.len());
    for (k, &idx) in order.iter().take(total).enumerate() {
        let mut words = out[idx].word_strings();
        let slot = rng.gen_range(0..words.len());
        words[slot] = new_lexemes[k % new_lexemes.len()].clone();
        out[idx] = Sentence::from_words(&words).unwrap();
    }
    out
}
