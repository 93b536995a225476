//! Goodman-Kruskal tau between character n-grams and class labels for each
//! label scheme, then the tau matrix over sentence-wise information.
//!
//!     cargo run --release --example tau_analysis

use charseg::analysis::{format_tau_matrix, label_feature_tau, tau_matrix, InfoVariable};
use charseg::features::{Shape, ShapeKind};
use charseg::labels::LabelScheme;
use charseg::lexicon::Lexicon;
use charseg::synthetic::{generate, split, SyntheticConfig};

fn main() -> charseg::Result<()> {
    let corpus = generate(&SyntheticConfig { num_sentences: 600, ..SyntheticConfig::default() });
    let (train, test) = split(&corpus.sentences, 0.2);

    let shapes = [Shape::new(ShapeKind::Unigram, 0), Shape::new(ShapeKind::Bigram, 0), Shape::new(ShapeKind::Trigram, -1)];
    print!("{:<8}", "scheme");
    for shape in &shapes {
        print!("{:>10}{:>14}", shape.to_string(), format!("y-1 {shape}"));
    }
    println!();
    for scheme in [LabelScheme::bies(), LabelScheme::b23ies(), LabelScheme::final_design()] {
        print!("{:<8}", scheme.name());
        for &shape in &shapes {
            let plain = label_feature_tau(&train, &scheme, shape, false)?;
            let with_prev = label_feature_tau(&train, &scheme, shape, true)?;
            print!("{plain:>10.4}{with_prev:>14.4}");
        }
        println!();
    }

    let lexicon = Lexicon::build_from_corpus(&train);
    let mut records = Vec::new();
    for s in &test {
        records.extend(lexicon.sentence_info(s.chars(), Some(s))?);
    }
    let vars = [InfoVariable::T, InfoVariable::LR, InfoVariable::LS, InfoVariable::O, InfoVariable::L];
    println!("\ntau(row -> column) over {} test characters", records.len());
    print!("{}", format_tau_matrix(&vars, &tau_matrix(&records, &vars)?));
    Ok(())
}
