//! Per-character sentence-wise information for "Lubba dub !" against the
//! lexicon {a, bad, dub, Lu, !}, plus the LC and WC codes the feature
//! extractor derives from it.
//!
//!     cargo run --example sentence_info

use charseg::chartype::classify;
use charseg::corpus::parse_corpus_str;
use charseg::lexicon::{CharRecord, Lexicon};

fn main() -> charseg::Result<()> {
    let lexicon = Lexicon::from_entries(["a", "bad", "dub", "Lu", "!"]);
    let gold = parse_corpus_str("Lubba dub !\n")?.remove(0);
    println!("{}", CharRecord::HEADER);
    for r in lexicon.sentence_info(gold.chars(), Some(&gold))? {
        println!("{}", r.to_row());
    }

    println!("\nC\tLC\tWC");
    for (i, &c) in gold.chars().iter().enumerate() {
        let lc = lexicon.lc_code(c, &classify(c));
        let wc = lexicon.wc_code_at(gold.chars(), i, true)?;
        println!("{c}\t{lc}\t{wc}");
    }
    Ok(())
}
