//! Cumulative word-length coverage of a corpus file, or of a synthetic
//! corpus when no path is given.
//!
//!     cargo run --example word_length_coverage -- [corpus.txt]

use std::fs::File;
use std::io::BufReader;

use charseg::corpus::{parse_corpus, word_length_coverage};
use charseg::synthetic::{generate, SyntheticConfig};

fn main() -> charseg::Result<()> {
    let corpus = match std::env::args().nth(1) {
        Some(path) => parse_corpus(BufReader::new(File::open(path)?))?,
        None => generate(&SyntheticConfig::default()).sentences,
    };
    let table = word_length_coverage(&corpus, 10)?;
    println!("{} tokens", table.total_tokens);
    print!("{table}");
    Ok(())
}
