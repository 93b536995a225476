//! Encodes a few segmented sentences under the BIES, B23IES and final
//! schemes and prints each inventory.
//!
//!     cargo run --example label_schemes

use charseg::chartype::classify_all;
use charseg::corpus::parse_corpus_str;
use charseg::labels::{decode, LabelScheme};

fn main() -> charseg::Result<()> {
    let corpus = parse_corpus_str("Lubba dub !\n国立 国語 研究所 の コーパス\nインターナショナル スクール 2024 年\n")?;
    let schemes = [LabelScheme::bies(), LabelScheme::b23ies(), LabelScheme::final_design()];
    for scheme in &schemes {
        let names: Vec<String> = scheme.inventory().iter().map(|l| l.to_string()).collect();
        println!("{} ({} labels): {}", scheme.name(), names.len(), names.join(" "));
    }
    for s in &corpus {
        println!("\n{s}");
        for scheme in &schemes {
            let labels = scheme.encode(s, &classify_all(s.chars()))?;
            assert_eq!(decode(&labels), s.boundaries());
            let tags: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
            println!("  {:<7} {}", scheme.name(), tags.join(" "));
        }
    }
    Ok(())
}
