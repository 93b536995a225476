//! Segmented corpora: parsing, vocabulary, word-length coverage and IV/OOV marking.
//!
//! A corpus file holds one sentence per line with words separated by a single
//! ASCII space. Offsets everywhere in this crate count Unicode scalar values.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;

use crate::error::{Error, Result};

/// A sentence with its word boundaries.
///
/// `boundaries` holds the start offset of every word, is strictly increasing
/// and always starts with 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    chars: Vec<char>,
    boundaries: Vec<usize>,
}

impl Sentence {
    /// Builds a sentence from its words. Fails on an empty word list, empty
    /// words, or words containing a space or line terminator.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptyInput("sentence has no words"));
        }
        let mut chars = Vec::new();
        let mut boundaries = Vec::with_capacity(words.len());
        for w in words {
            let w = w.as_ref();
            if w.is_empty() {
                return Err(Error::Format { line: 0, msg: "empty word".into() });
            }
            if w.chars().any(is_forbidden) {
                return Err(Error::Format {
                    line: 0,
                    msg: format!("word {w:?} contains a separator"),
                });
            }
            boundaries.push(chars.len());
            chars.extend(w.chars());
        }
        Ok(Self { chars, boundaries })
    }

    /// Builds a sentence from characters and word-start offsets.
    ///
    /// Offsets are sorted and deduplicated; 0 is added when missing and
    /// offsets `>= chars.len()` are rejected.
    pub fn from_boundaries(chars: Vec<char>, mut boundaries: Vec<usize>) -> Result<Self> {
        if chars.is_empty() {
            return Err(Error::EmptyInput("sentence has no characters"));
        }
        boundaries.push(0);
        boundaries.sort_unstable();
        boundaries.dedup();
        if let Some(&last) = boundaries.last() {
            if last >= chars.len() {
                return Err(Error::OutOfBounds { pos: last, len: chars.len() });
            }
        }
        Ok(Self { chars, boundaries })
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn num_words(&self) -> usize {
        self.boundaries.len()
    }

    /// Half-open `(start, end)` spans of the words.
    pub fn spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.chars.len();
        self.boundaries.iter().enumerate().map(move |(k, &start)| {
            let end = self.boundaries.get(k + 1).copied().unwrap_or(n);
            (start, end)
        })
    }

    pub fn words(&self) -> impl Iterator<Item = &[char]> + '_ {
        self.spans().map(|(s, e)| &self.chars[s..e])
    }

    pub fn word_strings(&self) -> Vec<String> {
        self.words().map(|w| w.iter().collect()).collect()
    }

    /// Text without separators.
    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, word) in self.words().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            for c in word {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

fn is_forbidden(c: char) -> bool {
    matches!(c, ' ' | '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}')
}

/// Parses one corpus line. `line_no` is 1-based and only used in diagnostics.
pub fn parse_line(line: &str, line_no: usize) -> Result<Sentence> {
    if line.starts_with(' ') || line.ends_with(' ') {
        return Err(Error::Format { line: line_no, msg: "leading or trailing space".into() });
    }
    let mut words = Vec::new();
    for w in line.split(' ') {
        if w.is_empty() {
            return Err(Error::Format { line: line_no, msg: "consecutive spaces".into() });
        }
        if w.chars().any(is_forbidden) {
            return Err(Error::Format {
                line: line_no,
                msg: format!("word {w:?} contains a line terminator"),
            });
        }
        words.push(w);
    }
    Sentence::from_words(&words).map_err(|e| match e {
        Error::Format { msg, .. } => Error::Format { line: line_no, msg },
        other => other,
    })
}

/// Parses a segmented corpus stream. Empty lines are skipped.
pub fn parse_corpus<R: BufRead>(mut reader: R) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        let line = std::str::from_utf8(&buf).map_err(|_| Error::Decode { line: line_no })?;
        if line.is_empty() {
            continue;
        }
        out.push(parse_line(line, line_no)?);
    }
    Ok(out)
}

/// Parses a corpus held in memory.
pub fn parse_corpus_str(text: &str) -> Result<Vec<Sentence>> {
    parse_corpus(text.as_bytes())
}

/// Serializes sentences in corpus format, one per line with a trailing LF.
pub fn write_corpus(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

/// Word types and token count of a corpus.
#[derive(Clone, Debug, Default)]
pub struct Vocab {
    types: HashSet<String>,
    token_count: usize,
}

impl Vocab {
    pub fn from_corpus(corpus: &[Sentence]) -> Self {
        let mut vocab = Self::default();
        for s in corpus {
            for w in s.words() {
                vocab.types.insert(w.iter().collect());
                vocab.token_count += 1;
            }
        }
        vocab
    }

    /// Vocabulary from bare word types (token count is the number of types).
    pub fn from_types<I, S>(types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let types: HashSet<String> = types.into_iter().map(Into::into).filter(|w| !w.is_empty()).collect();
        let token_count = types.len();
        Self { types, token_count }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.types.contains(word)
    }

    pub fn contains_chars(&self, word: &[char]) -> bool {
        self.types.contains(&word.iter().collect::<String>())
    }

    pub fn types(&self) -> &HashSet<String> {
        &self.types
    }

    /// Word types in byte order.
    pub fn sorted_types(&self) -> Vec<String> {
        let mut v: Vec<String> = self.types.iter().cloned().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }
}

/// Cumulative word-length coverage in percent, keyed by length threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageTable {
    pub rows: BTreeMap<usize, f64>,
    pub total_tokens: usize,
}

impl fmt::Display for CoverageTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, pct) in &self.rows {
            let label = if *k == 1 { "1".to_string() } else { format!("<= {k}") };
            writeln!(f, "{label:>6}\t{pct:.2}")?;
        }
        Ok(())
    }
}

impl CoverageTable {
    pub fn to_porcelain(&self) -> String {
        let mut out = format!("tokens={}\n", self.total_tokens);
        for (k, pct) in &self.rows {
            out.push_str(&format!("coverage.{k}={pct:.6}\n"));
        }
        out
    }
}

/// Percentage of word tokens of length `<= k` for every `k` in `1..=max_k`.
pub fn word_length_coverage(corpus: &[Sentence], max_k: usize) -> Result<CoverageTable> {
    if max_k == 0 {
        return Err(Error::InvalidArgument("max_k must be positive".into()));
    }
    let mut hist = vec![0usize; max_k + 1];
    let mut total = 0usize;
    for s in corpus {
        for (start, end) in s.spans() {
            total += 1;
            let len = end - start;
            if len <= max_k {
                hist[len] += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput("corpus has no words"));
    }
    let mut rows = BTreeMap::new();
    let mut cum = 0usize;
    for (k, count) in hist.iter().enumerate().skip(1) {
        cum += count;
        rows.insert(k, 100.0 * cum as f64 / total as f64);
    }
    Ok(CoverageTable { rows, total_tokens: total })
}

/// Whether a test word occurs in the training vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordStatus {
    InVocab,
    OutOfVocab,
}

impl WordStatus {
    pub fn is_oov(self) -> bool {
        self == WordStatus::OutOfVocab
    }
}

/// IV/OOV flags for every word of every test sentence, in word order.
pub fn mark_oov(test: &[Sentence], train_vocab: &Vocab) -> Vec<Vec<WordStatus>> {
    test.iter()
        .map(|s| {
            s.words()
                .map(|w| {
                    if train_vocab.contains_chars(w) {
                        WordStatus::InVocab
                    } else {
                        WordStatus::OutOfVocab
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lubba_sentence() {
        let c = parse_corpus_str("Lubba dub !\n").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text(), "Lubbadub!");
        assert_eq!(c[0].boundaries(), &[0, 5, 8]);
    }

    #[test]
    fn single_char_and_multi_line() {
        let c = parse_corpus_str("a\n").unwrap();
        assert_eq!(c[0].boundaries(), &[0]);

        let c = parse_corpus_str("ab cd\nx y z\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].boundaries(), &[0, 2]);
        assert_eq!(c[1].boundaries(), &[0, 1, 2]);
    }

    #[test]
    fn offsets_count_scalar_values() {
        let c = parse_corpus_str("東京 に 行く").unwrap();
        assert_eq!(c[0].boundaries(), &[0, 2, 3]);
        assert_eq!(c[0].len(), 5);
    }

    #[test]
    fn skips_empty_lines() {
        let c = parse_corpus_str("\na b\n\n\nc\n").unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn rejects_bad_spacing_with_line_number() {
        match parse_corpus_str("a b\na  b\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_corpus_str(" a\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_corpus_str("a \n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_corpus_str("a\r\n"), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn rejects_invalid_utf8_with_line_number() {
        let bytes: &[u8] = b"ok\nab\xff\n";
        assert!(matches!(parse_corpus(bytes), Err(Error::Decode { line: 2 })));
    }

    #[test]
    fn coverage_hand_count() {
        let c = parse_corpus_str("a b\nab\n").unwrap();
        let t = word_length_coverage(&c, 2).unwrap();
        assert!((t.rows[&1] - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(t.rows[&2], 100.0);

        let c = parse_corpus_str("x\n").unwrap();
        assert_eq!(word_length_coverage(&c, 1).unwrap().rows[&1], 100.0);
    }

    #[test]
    fn coverage_rejects_empty() {
        assert!(matches!(word_length_coverage(&[], 3), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn oov_marking() {
        let vocab = Vocab::from_types(["a", "bad", "dub", "Lu", "!"]);
        let test = parse_corpus_str("Lubba dub !").unwrap();
        let flags = mark_oov(&test, &vocab);
        assert_eq!(flags[0], vec![WordStatus::OutOfVocab, WordStatus::InVocab, WordStatus::InVocab]);

        let empty = Vocab::default();
        assert!(mark_oov(&test, &empty)[0].iter().all(|s| s.is_oov()));
    }

    #[test]
    fn vocab_counts_tokens() {
        let c = parse_corpus_str("a b a\nb\n").unwrap();
        let v = Vocab::from_corpus(&c);
        assert_eq!(v.len(), 2);
        assert_eq!(v.token_count(), 4);
    }
}
