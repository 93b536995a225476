//! End-to-end training and segmentation.
//!
//! A [`SegmenterModel`] bundles the label scheme, the feature configuration,
//! the CRF weights and the training vocabulary. The lexicon consulted at
//! inference is passed in separately, so swapping it never touches the
//! weights.

use rayon::prelude::*;

use crate::chartype::classify_all;
use crate::corpus::{Sentence, Vocab};
use crate::crf::{self, CrfModel, FeatureDict, Hyper, Instance, IterationInfo, LabeledInstance, OptimConfig};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::labels::{self, Label, LabelScheme};
use crate::lexicon::Lexicon;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub scheme: LabelScheme,
    pub features: FeatureConfig,
    pub hyper: Hyper,
    pub optim: OptimConfig,
}

impl Default for TrainConfig {
    /// Final scheme, all 45 species, unit scales, default regularization.
    fn default() -> Self {
        Self {
            scheme: LabelScheme::final_design(),
            features: FeatureConfig::default(),
            hyper: Hyper::default(),
            optim: OptimConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmenterModel {
    pub scheme: LabelScheme,
    pub labels: Vec<Label>,
    pub features: FeatureConfig,
    pub crf: CrfModel,
    pub optim: OptimConfig,
    /// Word types of the training corpus, sorted.
    pub vocab: Vec<String>,
    /// Lexemes added to the training lexicon beyond the training words, sorted.
    pub supplementary: Vec<String>,
    /// Fingerprint of the lexicon used during training.
    pub lexicon_fingerprint: String,
}

impl SegmenterModel {
    /// The lexicon used during training: training words plus supplementary lexemes.
    pub fn training_lexicon(&self) -> Lexicon {
        Lexicon::from_entries(self.vocab.iter().chain(&self.supplementary).cloned())
    }

    pub fn train_vocab(&self) -> Vocab {
        Vocab::from_types(self.vocab.iter().cloned())
    }

    fn instance(&self, chars: &[char], lexicon: &Lexicon) -> Instance {
        let positions = self
            .features
            .extract_sentence(chars, lexicon)
            .into_iter()
            .map(|fv| {
                fv.items
                    .into_iter()
                    .filter_map(|(name, v)| self.crf.dict.get(&name).map(|id| (id, v)))
                    .collect()
            })
            .collect();
        Instance { positions }
    }

    /// Labels for `chars` under `lexicon`.
    pub fn tag_with(&self, chars: &[char], lexicon: &Lexicon) -> Vec<Label> {
        if chars.is_empty() {
            return Vec::new();
        }
        let (path, _) = self.crf.viterbi(&self.instance(chars, lexicon));
        path.into_iter().map(|y| self.labels[y]).collect()
    }

    /// Segments `chars` using `lexicon` for the LC and WC families.
    pub fn segment_with(&self, chars: &[char], lexicon: &Lexicon) -> Result<Sentence> {
        let tags = self.tag_with(chars, lexicon);
        Sentence::from_boundaries(chars.to_vec(), labels::decode(&tags))
    }

    /// Segments many inputs concurrently under one lexicon snapshot.
    pub fn segment_all(&self, inputs: &[Vec<char>], lexicon: &Lexicon) -> Result<Vec<Option<Sentence>>> {
        inputs
            .par_iter()
            .map(|cs| if cs.is_empty() { Ok(None) } else { self.segment_with(cs, lexicon).map(Some) })
            .collect()
    }
}

/// Trains on `corpus` with a lexicon built from its words.
pub fn train(corpus: &[Sentence], config: &TrainConfig, log: &mut dyn FnMut(&IterationInfo)) -> Result<SegmenterModel> {
    train_with_lexicon(corpus, config, Lexicon::build_from_corpus(corpus), log)
}

/// Trains on `corpus`, extracting LC/WC features against `lexicon`.
pub fn train_with_lexicon(
    corpus: &[Sentence],
    config: &TrainConfig,
    lexicon: Lexicon,
    log: &mut dyn FnMut(&IterationInfo),
) -> Result<SegmenterModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training corpus is empty"));
    }
    let labels = config.scheme.inventory();
    let label_index = |l: &Label| {
        labels.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel(l.to_string()))
    };

    let extracted: Vec<_> = corpus
        .par_iter()
        .map(|s| config.features.extract_sentence(s.chars(), &lexicon))
        .collect();
    let mut dict = FeatureDict::new();
    let mut batch = Vec::with_capacity(corpus.len());
    for (s, feats) in corpus.iter().zip(extracted) {
        let gold = config
            .scheme
            .encode(s, &classify_all(s.chars()))?
            .iter()
            .map(label_index)
            .collect::<Result<Vec<_>>>()?;
        let positions = feats
            .into_iter()
            .map(|fv| fv.items.into_iter().map(|(name, v)| (dict.get_or_insert(&name), v)).collect())
            .collect();
        batch.push(LabeledInstance { instance: Instance { positions }, gold });
    }

    let crf = crf::train(&batch, labels.len(), dict, config.hyper, &config.optim, log)?;
    let vocab = Vocab::from_corpus(corpus);
    let supplementary = lexicon.entries().iter().filter(|w| !vocab.contains(w)).cloned().collect();
    Ok(SegmenterModel {
        scheme: config.scheme,
        labels,
        features: config.features.clone(),
        crf,
        optim: config.optim,
        vocab: vocab.sorted_types(),
        supplementary,
        lexicon_fingerprint: lexicon.fingerprint(),
    })
}
