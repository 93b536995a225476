//! Segmentation evaluation and Goodman-Kruskal tau association analysis.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::chartype::classify_all;
use crate::corpus::{Sentence, Vocab};
use crate::error::{Error, Result};
use crate::features::{Shape, BOS, EOS, VALUE_SEPARATOR};
use crate::labels::{Label, LabelScheme};
use crate::lexicon::CharRecord;

/// Precision, recall and F1 for one category.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prf {
    pub correct: usize,
    pub gold: usize,
    pub system: usize,
}

impl Prf {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.system)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub words: Prf,
    pub iv_words: Prf,
    pub oov_words: Prf,
    /// Absent when the gold side has no OOV words.
    pub recall_oov: Option<f64>,
    pub char_positions: usize,
    pub char_correct: usize,
    /// Per-label stats in scheme inventory order.
    pub per_label: Vec<(Label, Prf)>,
}

impl EvalReport {
    pub fn word_f1(&self) -> f64 {
        self.words.f1()
    }

    pub fn char_label_accuracy(&self) -> f64 {
        ratio(self.char_correct, self.char_positions)
    }

    /// Absent when neither side has IV words.
    pub fn f1_iv(&self) -> Option<f64> {
        (self.iv_words.gold + self.iv_words.system > 0).then(|| self.iv_words.f1())
    }

    pub fn f1_oov(&self) -> Option<f64> {
        (self.oov_words.gold + self.oov_words.system > 0).then(|| self.oov_words.f1())
    }

    /// `key=value` lines. Undefined metrics print `NA`.
    pub fn to_porcelain(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        kv("word.gold", self.words.gold.to_string());
        kv("word.system", self.words.system.to_string());
        kv("word.correct", self.words.correct.to_string());
        kv("word.precision", format!("{:.6}", self.words.precision()));
        kv("word.recall", format!("{:.6}", self.words.recall()));
        kv("word.f1", format!("{:.6}", self.words.f1()));
        kv("iv.gold", self.iv_words.gold.to_string());
        kv("iv.f1", opt(self.f1_iv()));
        kv("oov.gold", self.oov_words.gold.to_string());
        kv("oov.recall", opt(self.recall_oov));
        kv("oov.f1", opt(self.f1_oov()));
        kv("char.positions", self.char_positions.to_string());
        kv("char.correct", self.char_correct.to_string());
        kv("char.accuracy", format!("{:.6}", self.char_label_accuracy()));
        for (label, prf) in &self.per_label {
            kv(&format!("label.{label}.correct"), prf.correct.to_string());
            kv(&format!("label.{label}.f1"), format!("{:.6}", prf.f1()));
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: f64| format!("{:.2}", 100.0 * v);
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), pct);
        writeln!(f, "Word  P {}  R {}  F1 {}", pct(self.words.precision()), pct(self.words.recall()), pct(self.words.f1()))?;
        writeln!(f, "      gold {}  system {}  correct {}", self.words.gold, self.words.system, self.words.correct)?;
        writeln!(f, "IV    F1 {}  ({} gold)", opt(self.f1_iv()), self.iv_words.gold)?;
        writeln!(f, "OOV   F1 {}  R {}  ({} gold)", opt(self.f1_oov()), opt(self.recall_oov), self.oov_words.gold)?;
        writeln!(f, "Char  accuracy {}", pct(self.char_label_accuracy()))?;
        writeln!(f, "{:<6}{:>10}{:>8}", "Label", "#Correct", "F1")?;
        for (label, prf) in &self.per_label {
            writeln!(f, "{:<6}{:>10}{:>8}", label.to_string(), prf.correct, pct(prf.f1()))?;
        }
        Ok(())
    }
}

/// Scores `system` against `gold`.
///
/// A system word is correct when its span equals a gold span. IV/OOV status
/// comes from `train_vocab`. Per-label statistics encode both sides under
/// `scheme`.
pub fn evaluate(gold: &[Sentence], system: &[Sentence], train_vocab: &Vocab, scheme: &LabelScheme) -> Result<EvalReport> {
    if gold.len() != system.len() {
        return Err(Error::Alignment(format!("{} gold sentences but {} system sentences", gold.len(), system.len())));
    }
    let inventory = scheme.inventory();
    let mut per_label: BTreeMap<Label, Prf> = inventory.iter().map(|l| (*l, Prf::default())).collect();
    let (mut words, mut iv, mut oov) = (Prf::default(), Prf::default(), Prf::default());
    let (mut positions, mut char_correct) = (0, 0);

    for (k, (g, s)) in gold.iter().zip(system).enumerate() {
        if g.chars() != s.chars() {
            return Err(Error::Alignment(format!("sentence {}: character sequences differ", k + 1)));
        }
        let sys_spans: HashSet<(usize, usize)> = s.spans().collect();
        for (a, b) in g.spans() {
            let bucket = if train_vocab.contains_chars(&g.chars()[a..b]) { &mut iv } else { &mut oov };
            bucket.gold += 1;
            words.gold += 1;
            if sys_spans.contains(&(a, b)) {
                bucket.correct += 1;
                words.correct += 1;
            }
        }
        for (a, b) in s.spans() {
            let bucket = if train_vocab.contains_chars(&s.chars()[a..b]) { &mut iv } else { &mut oov };
            bucket.system += 1;
            words.system += 1;
        }

        let classes = classify_all(g.chars());
        let gl = scheme.encode(g, &classes)?;
        let sl = scheme.encode(s, &classes)?;
        for (a, b) in gl.iter().zip(&sl) {
            positions += 1;
            per_label.entry(*a).or_default().gold += 1;
            per_label.entry(*b).or_default().system += 1;
            if a == b {
                char_correct += 1;
                per_label.entry(*a).or_default().correct += 1;
            }
        }
    }
    let recall_oov = (oov.gold > 0).then(|| oov.recall());
    Ok(EvalReport {
        words,
        iv_words: iv,
        oov_words: oov,
        recall_oov,
        char_positions: positions,
        char_correct,
        per_label: inventory.iter().map(|l| (*l, per_label[l])).collect(),
    })
}

/// Cross-tabulated counts of two categorical variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContingencyTable {
    pub x_categories: Vec<String>,
    pub y_categories: Vec<String>,
    /// `counts[x][y]`.
    pub counts: Vec<Vec<f64>>,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<f64>>) -> Result<Self> {
        let width = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("ragged contingency table".into()));
        }
        if counts.iter().flatten().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidArgument("negative or non-finite count".into()));
        }
        Ok(Self {
            x_categories: (0..counts.len()).map(|k| k.to_string()).collect(),
            y_categories: (0..width).map(|k| k.to_string()).collect(),
            counts,
        })
    }

    /// Tabulates observed `(x, y)` pairs. Categories are sorted.
    pub fn from_pairs<I, X, Y>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (X, Y)>,
        X: Into<String>,
        Y: Into<String>,
    {
        let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (x, y) in pairs {
            *cells.entry((x.into(), y.into())).or_default() += 1.0;
        }
        let xs: Vec<String> = cells.keys().map(|(x, _)| x.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let ys: Vec<String> = cells.keys().map(|(_, y)| y.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let xi: BTreeMap<&String, usize> = xs.iter().enumerate().map(|(k, x)| (x, k)).collect();
        let yi: BTreeMap<&String, usize> = ys.iter().enumerate().map(|(k, y)| (y, k)).collect();
        let mut counts = vec![vec![0.0; ys.len()]; xs.len()];
        for ((x, y), c) in &cells {
            counts[xi[x]][yi[y]] = *c;
        }
        Self { x_categories: xs, y_categories: ys, counts }
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<f64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_totals(&self) -> Vec<f64> {
        let width = self.counts.first().map_or(0, Vec::len);
        (0..width).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let width = self.counts.first().map_or(0, Vec::len);
        Self {
            x_categories: self.y_categories.clone(),
            y_categories: self.x_categories.clone(),
            counts: (0..width).map(|j| self.counts.iter().map(|r| r[j]).collect()).collect(),
        }
    }
}

/// Goodman-Kruskal tau for predicting Y (columns) from X (rows).
///
/// `tau = (sum_xy n_xy^2 / n_x. - sum_y n_.y^2 / n) / (n - sum_y n_.y^2 / n)`.
/// Fails when the table is empty or Y has fewer than two populated
/// categories.
pub fn gk_tau(table: &ContingencyTable) -> Result<f64> {
    let n = table.total();
    if n <= 0.0 {
        return Err(Error::Undefined("empty contingency table"));
    }
    let cols = table.column_totals();
    if cols.iter().filter(|c| **c > 0.0).count() < 2 {
        return Err(Error::Undefined("response variable has a single category"));
    }
    let baseline: f64 = cols.iter().map(|c| c * c).sum::<f64>() / n;
    let mut explained = 0.0;
    for (row, total) in table.counts.iter().zip(table.row_totals()) {
        if total > 0.0 {
            explained += row.iter().map(|c| c * c).sum::<f64>() / total;
        }
    }
    let tau = (explained - baseline) / (n - baseline);
    Ok(tau.clamp(0.0, 1.0))
}

/// Tau between a character n-gram (optionally prefixed by the previous
/// label) and the current label over a segmented corpus.
pub fn label_feature_tau(corpus: &[Sentence], scheme: &LabelScheme, shape: Shape, include_prev_label: bool) -> Result<f64> {
    let mut pairs = Vec::new();
    for s in corpus {
        let labels = scheme.encode(s, &classify_all(s.chars()))?;
        let n = s.len() as isize;
        for i in 0..s.len() {
            let mut x = String::new();
            if include_prev_label {
                match i.checked_sub(1) {
                    Some(p) => x.push_str(&labels[p].to_string()),
                    None => x.push_str(BOS),
                }
                x.push(VALUE_SEPARATOR);
            }
            for (k, off) in shape.offsets().into_iter().enumerate() {
                if k > 0 {
                    x.push(VALUE_SEPARATOR);
                }
                let j = i as isize + off;
                if j < 0 {
                    x.push_str(BOS);
                } else if j >= n {
                    x.push_str(EOS);
                } else {
                    x.push(s.chars()[j as usize]);
                }
            }
            pairs.push((x, labels[i].to_string()));
        }
    }
    gk_tau(&ContingencyTable::from_pairs(pairs))
}

/// Columns of a sentence-wise information record usable in a tau matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfoVariable {
    /// Script class.
    T,
    /// Bucketed lengths of lexemes containing the character.
    LR,
    /// Bucketed lengths of lexemes covering the position.
    LS,
    /// Offset inside the gold word.
    O,
    /// Gold word length.
    L,
}

impl InfoVariable {
    pub const ALL: [InfoVariable; 5] = [InfoVariable::T, InfoVariable::LR, InfoVariable::LS, InfoVariable::O, InfoVariable::L];

    pub fn name(self) -> &'static str {
        match self {
            InfoVariable::T => "T",
            InfoVariable::LR => "L_R",
            InfoVariable::LS => "L_S",
            InfoVariable::O => "O",
            InfoVariable::L => "L",
        }
    }

    /// Canonical category string of a record; `None` when the record lacks it.
    pub fn category(self, r: &CharRecord) -> Option<String> {
        match self {
            InfoVariable::T => Some(r.script.symbol().to_string()),
            InfoVariable::LR => Some(r.known_lengths.symbols()),
            InfoVariable::LS => Some(r.covering_lengths.symbols()),
            InfoVariable::O => r.offset.map(|v| v.to_string()),
            InfoVariable::L => r.word_len.map(|v| v.to_string()),
        }
    }
}

impl std::str::FromStr for InfoVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InfoVariable::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s) || v.name().replace('_', "").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {s:?}")))
    }
}

/// `matrix[i][j] = tau(variables[i] -> variables[j])`; undefined cells are `None`.
pub fn tau_matrix(records: &[CharRecord], variables: &[InfoVariable]) -> Result<Vec<Vec<Option<f64>>>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records"));
    }
    let mut out = vec![vec![None; variables.len()]; variables.len()];
    for (i, &vx) in variables.iter().enumerate() {
        for (j, &vy) in variables.iter().enumerate() {
            let pairs = records.iter().filter_map(|r| Some((vx.category(r)?, vy.category(r)?)));
            out[i][j] = gk_tau(&ContingencyTable::from_pairs(pairs)).ok();
        }
    }
    Ok(out)
}

/// Renders a tau matrix as a tab-separated table.
pub fn format_tau_matrix(variables: &[InfoVariable], matrix: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("X\\Y");
    for v in variables {
        out.push('\t');
        out.push_str(v.name());
    }
    out.push('\n');
    for (v, row) in variables.iter().zip(matrix) {
        out.push_str(v.name());
        for cell in row {
            out.push('\t');
            out.push_str(&cell.map_or("NA".to_string(), |t| format!("{t:.4}")));
        }
        out.push('\n');
    }
    out
}
