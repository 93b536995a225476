//! Feature species, sparse feature extraction and per-species scales.
//!
//! A species pairs a family (raw character, length-category code, or
//! word-character code) with a window shape. Three families times fifteen
//! shapes give 45 species. Every species emits one binary feature per
//! position whose value is the species' scale.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::chartype::classify;
use crate::corpus::{mark_oov, Sentence, Vocab};
use crate::error::{Error, Result};
use crate::lexicon::{wc_code, Lexicon};
use crate::segmenter::{self, TrainConfig};

/// Separates window values inside a feature string.
pub const VALUE_SEPARATOR: char = '\u{1F}';
pub const BOS: &str = "<BOS>";
pub const EOS: &str = "<EOS>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// The character itself.
    C,
    /// Length-category code.
    LC,
    /// Word-character code.
    WC,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::C, Family::LC, Family::WC];

    pub fn name(self) -> &'static str {
        match self {
            Family::C => "C",
            Family::LC => "LC",
            Family::WC => "WC",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    Unigram,
    Bigram,
    SkipGram,
    Trigram,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] =
        [ShapeKind::Unigram, ShapeKind::Bigram, ShapeKind::SkipGram, ShapeKind::Trigram];

    fn range(self) -> std::ops::RangeInclusive<i8> {
        match self {
            ShapeKind::Unigram => -2..=2,
            ShapeKind::Bigram => -2..=1,
            ShapeKind::SkipGram => -1..=1,
            ShapeKind::Trigram => -2..=0,
        }
    }

    fn code(self) -> char {
        match self {
            ShapeKind::Unigram => 'u',
            ShapeKind::Bigram => 'b',
            ShapeKind::SkipGram => 's',
            ShapeKind::Trigram => 't',
        }
    }
}

/// A window shape anchored at offset `at` relative to the current position.
///
/// * unigram `X[at]`
/// * bigram `X[at] X[at+1]`
/// * skip-gram `X[at-1] X[at+1]`
/// * trigram `X[at] X[at+1] X[at+2]`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub kind: ShapeKind,
    pub at: i8,
}

impl Shape {
    pub const fn new(kind: ShapeKind, at: i8) -> Self {
        Self { kind, at }
    }

    pub fn all_of(kind: ShapeKind) -> impl Iterator<Item = Shape> {
        kind.range().map(move |at| Shape { kind, at })
    }

    pub fn offsets(&self) -> Vec<isize> {
        let a = self.at as isize;
        match self.kind {
            ShapeKind::Unigram => vec![a],
            ShapeKind::Bigram => vec![a, a + 1],
            ShapeKind::SkipGram => vec![a - 1, a + 1],
            ShapeKind::Trigram => vec![a, a + 1, a + 2],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.kind.range().contains(&self.at)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.code(), self.at)
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown shape {s:?}"));
        let mut cs = s.chars();
        let kind = match cs.next() {
            Some('u') => ShapeKind::Unigram,
            Some('b') => ShapeKind::Bigram,
            Some('s') => ShapeKind::SkipGram,
            Some('t') => ShapeKind::Trigram,
            _ => return Err(bad()),
        };
        let at: i8 = cs.as_str().parse().map_err(|_| bad())?;
        let shape = Shape { kind, at };
        shape.is_valid().then_some(shape).ok_or_else(bad)
    }
}

/// One feature generator: a family over a shape, e.g. `LC:b-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Species {
    pub family: Family,
    pub shape: Shape,
}

impl Species {
    pub const fn new(family: Family, kind: ShapeKind, at: i8) -> Self {
        Self { family, shape: Shape::new(kind, at) }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.name(), self.shape)
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (fam, shape) =
            s.split_once(':').ok_or_else(|| Error::InvalidArgument(format!("unknown species {s:?}")))?;
        let family = match fam {
            "C" => Family::C,
            "LC" => Family::LC,
            "WC" => Family::WC,
            _ => return Err(Error::InvalidArgument(format!("unknown family {fam:?}"))),
        };
        Ok(Species { family, shape: shape.parse()? })
    }
}

/// Species for the given families and shape kinds, in canonical order.
pub fn enumerate_species(families: &[Family], kinds: &[ShapeKind]) -> Vec<Species> {
    let mut out = Vec::new();
    for family in Family::ALL.into_iter().filter(|f| families.contains(f)) {
        for kind in ShapeKind::ALL.into_iter().filter(|k| kinds.contains(k)) {
            out.extend(Shape::all_of(kind).map(|shape| Species { family, shape }));
        }
    }
    out
}

/// All 45 species.
pub fn full_species() -> Vec<Species> {
    enumerate_species(&Family::ALL, &ShapeKind::ALL)
}

/// Character unigrams, bigrams and the skip-gram inside a one-character window.
pub fn vanilla_species() -> Vec<Species> {
    use ShapeKind::*;
    vec![
        Species::new(Family::C, Unigram, -1),
        Species::new(Family::C, Unigram, 0),
        Species::new(Family::C, Unigram, 1),
        Species::new(Family::C, Bigram, -1),
        Species::new(Family::C, Bigram, 0),
        Species::new(Family::C, SkipGram, 0),
    ]
}

/// Boost preset: 2 for `C:u0`, 3 for `C:b-1` and `C:b0`, 1 for everything else.
pub fn boost_preset() -> Vec<(Species, f64)> {
    full_species().into_iter().map(|sp| (sp, boost_value(sp))).collect()
}

fn boost_value(sp: Species) -> f64 {
    use ShapeKind::*;
    match (sp.family, sp.shape.kind, sp.shape.at) {
        (Family::C, Unigram, 0) => 2.0,
        (Family::C, Bigram, -1) | (Family::C, Bigram, 0) => 3.0,
        _ => 1.0,
    }
}

/// Recall-derived scale of one species.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesScale {
    pub species: Species,
    pub recall_iv: f64,
    pub recall_oov: f64,
    pub interpolated: f64,
    pub standardized: f64,
    pub alpha: f64,
    /// The dev set had no OOV words, so `recall_oov` was set to 0.
    pub zero_oov_support: bool,
}

impl SpeciesScale {
    pub const HEADER: &'static str = "species\trecall_iv\trecall_oov\tinterpolated\tstandardized\talpha";

    pub fn to_row(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}{}",
            self.species,
            self.recall_iv,
            self.recall_oov,
            self.interpolated,
            self.standardized,
            self.alpha,
            if self.zero_oov_support { "\tzero-oov" } else { "" }
        )
    }
}

/// `(1 - alpha) * recall_iv + alpha * recall_oov`.
pub fn interpolate(recall_iv: f64, recall_oov: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * recall_iv + alpha * recall_oov
}

/// Zero-mean, unit-variance (population) standardization. All zeros when
/// every input is equal.
pub fn standardize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if values.iter().all(|v| *v == values[0]) || var == 0.0 {
        return vec![0.0; values.len()];
    }
    let sd = var.sqrt();
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Interpolates and standardizes per-species recalls into a scale table.
pub fn scales_from_recalls(recalls: &[(Species, f64, f64, bool)], alpha: f64) -> Vec<SpeciesScale> {
    let interpolated: Vec<f64> = recalls.iter().map(|&(_, iv, oov, _)| interpolate(iv, oov, alpha)).collect();
    let standardized = standardize(&interpolated);
    recalls
        .iter()
        .zip(interpolated.iter().zip(standardized))
        .map(|(&(species, recall_iv, recall_oov, zero), (&interpolated, standardized))| SpeciesScale {
            species,
            recall_iv,
            recall_oov,
            interpolated,
            standardized,
            alpha,
            zero_oov_support: zero,
        })
        .collect()
}

/// How feature values are set.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Scaling {
    /// Every feature has value 1.
    #[default]
    Unit,
    /// The boost preset.
    Boost,
    /// Standardized recall scales; species missing from the table get 1.
    Learned(Vec<SpeciesScale>),
}

impl Scaling {
    pub fn value(&self, sp: Species) -> f64 {
        match self {
            Scaling::Unit => 1.0,
            Scaling::Boost => boost_value(sp),
            Scaling::Learned(rows) => rows.iter().find(|r| r.species == sp).map_or(1.0, |r| r.standardized),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scaling::Unit => "none",
            Scaling::Boost => "boost",
            Scaling::Learned(_) => "learned",
        }
    }
}

/// Sparse features at one position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    pub items: Vec<(String, f64)>,
}

/// Which species to extract and how.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureConfig {
    pub species: Vec<Species>,
    /// Append the character to WC codes.
    pub wc_include_char: bool,
    pub scaling: Scaling,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { species: full_species(), wc_include_char: true, scaling: Scaling::Unit }
    }
}

impl FeatureConfig {
    pub fn vanilla() -> Self {
        Self { species: vanilla_species(), wc_include_char: true, scaling: Scaling::Unit }
    }

    /// Per-position family values for every family the species list uses.
    fn family_values(&self, chars: &[char], lexicon: &Lexicon) -> BTreeMap<Family, Vec<String>> {
        let mut out = BTreeMap::new();
        let needs = |f: Family| self.species.iter().any(|s| s.family == f);
        if needs(Family::C) {
            out.insert(Family::C, chars.iter().map(|c| c.to_string()).collect());
        }
        if needs(Family::LC) {
            out.insert(Family::LC, chars.iter().map(|&c| lexicon.lc_code(c, &classify(c))).collect());
        }
        if needs(Family::WC) {
            let matches = lexicon.match_positions(chars);
            let codes = chars
                .iter()
                .zip(&matches)
                .map(|(&c, m)| wc_code(m, c, self.wc_include_char))
                .collect();
            out.insert(Family::WC, codes);
        }
        out
    }

    /// Features for every position of a sentence.
    pub fn extract_sentence(&self, chars: &[char], lexicon: &Lexicon) -> Vec<FeatureVector> {
        let values = self.family_values(chars, lexicon);
        (0..chars.len()).map(|i| self.build(&values, chars.len(), i)).collect()
    }

    /// Features at position `i`.
    pub fn extract(&self, chars: &[char], i: usize, lexicon: &Lexicon) -> Result<FeatureVector> {
        if i >= chars.len() {
            return Err(Error::OutOfBounds { pos: i, len: chars.len() });
        }
        let values = self.family_values(chars, lexicon);
        Ok(self.build(&values, chars.len(), i))
    }

    fn build(&self, values: &BTreeMap<Family, Vec<String>>, n: usize, i: usize) -> FeatureVector {
        let mut items = Vec::with_capacity(self.species.len());
        for &sp in &self.species {
            let fam = &values[&sp.family];
            let mut s = format!("{sp}=");
            for (k, off) in sp.shape.offsets().into_iter().enumerate() {
                if k > 0 {
                    s.push(VALUE_SEPARATOR);
                }
                let j = i as isize + off;
                if j < 0 {
                    s.push_str(BOS);
                } else if j as usize >= n {
                    s.push_str(EOS);
                } else {
                    s.push_str(&fam[j as usize]);
                }
            }
            items.push((s, self.scaling.value(sp)));
        }
        FeatureVector { items }
    }
}

/// Learns per-species scales.
///
/// For every species a single-species model is trained on `train` with the
/// hyperparameters of `base`, `dev` is segmented, and word recall is measured
/// separately over IV and OOV dev words. The recalls are interpolated with
/// `alpha` and standardized across species. A dev set without OOV words
/// yields `recall_oov = 0` and sets `zero_oov_support`.
pub fn compute_species_scales(
    train: &[Sentence],
    dev: &[Sentence],
    lexicon: &Lexicon,
    alpha: f64,
    base: &TrainConfig,
) -> Result<Vec<SpeciesScale>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
    }
    if train.is_empty() || dev.is_empty() {
        return Err(Error::EmptyInput("scale computation needs train and dev corpora"));
    }
    let vocab = Vocab::from_corpus(train);
    let status = mark_oov(dev, &vocab);
    let species = if base.features.species.is_empty() { full_species() } else { base.features.species.clone() };

    let recalls: Vec<(Species, f64, f64, bool)> = species
        .par_iter()
        .map(|&sp| {
            let cfg = TrainConfig {
                features: FeatureConfig {
                    species: vec![sp],
                    wc_include_char: base.features.wc_include_char,
                    scaling: Scaling::Unit,
                },
                ..base.clone()
            };
            let model = segmenter::train_with_lexicon(train, &cfg, lexicon.clone(), &mut |_| {})?;
            let (mut iv_hit, mut iv_total, mut oov_hit, mut oov_total) = (0usize, 0usize, 0usize, 0usize);
            for (gold, flags) in dev.iter().zip(&status) {
                let sys = model.segment_with(gold.chars(), lexicon)?;
                let sys_spans: std::collections::HashSet<(usize, usize)> = sys.spans().collect();
                for (span, st) in gold.spans().zip(flags) {
                    let hit = sys_spans.contains(&span) as usize;
                    if st.is_oov() {
                        oov_total += 1;
                        oov_hit += hit;
                    } else {
                        iv_total += 1;
                        iv_hit += hit;
                    }
                }
            }
            let ratio = |h: usize, t: usize| if t == 0 { 0.0 } else { h as f64 / t as f64 };
            Ok((sp, ratio(iv_hit, iv_total), ratio(oov_hit, oov_total), oov_total == 0))
        })
        .collect::<Result<_>>()?;
    Ok(scales_from_recalls(&recalls, alpha))
}
