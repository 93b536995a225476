//! Trains a small model, writes it to disk, reads it back and segments raw
//! text with the loaded copy.
//!
//!     cargo run --example save_and_load

use charseg::corpus::parse_corpus_str;
use charseg::model_file;
use charseg::segmenter::{train, TrainConfig};

const TRAIN: &str = "\
私 は 学生 です 。
彼 は 先生 です 。
学生 が 本 を 読む 。
先生 は 本 を 書く 。
私 が 本 を 書く 。
";

fn main() -> charseg::Result<()> {
    let corpus = parse_corpus_str(TRAIN)?;
    let model = train(&corpus, &TrainConfig::default(), &mut |_| {})?;

    let path = std::env::temp_dir().join("charseg-example.model");
    model_file::save(&model, &path)?;
    let loaded = model_file::load(&path)?;
    assert_eq!(loaded, model);
    assert_eq!(model_file::to_bytes(&loaded), model_file::to_bytes(&model));
    println!("{} bytes written to {}", std::fs::metadata(&path)?.len(), path.display());

    let lexicon = loaded.training_lexicon();
    for line in ["彼が本を読む。", "私は先生です。"] {
        let chars: Vec<char> = line.chars().collect();
        println!("{line} -> {}", loaded.segment_with(&chars, &lexicon)?);
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
