//! Lexicon snapshots, position-covering matches and the LC/WC codes built on them.
//!
//! A [`Lexicon`] is immutable. [`Lexicon::expand`] returns a new snapshot with a
//! higher generation and leaves the old one untouched, and [`SharedLexicon`]
//! swaps snapshots atomically for concurrent readers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::sync::{Arc, RwLock};

use sha2::{Digest, Sha256};

use crate::chartype::{classify, CharClass, Script};
use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::labels::{LabelScheme, Position};

/// Word length bucket: 1 to 5, or `+` for anything longer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LengthBucket(u8);

impl LengthBucket {
    pub const LONG: LengthBucket = LengthBucket(6);

    pub fn of(len: usize) -> Self {
        debug_assert!(len > 0);
        LengthBucket(len.min(6) as u8)
    }

    pub fn symbol(self) -> char {
        match self.0 {
            6 => '+',
            k => char::from(b'0' + k),
        }
    }

    fn bit(self) -> u8 {
        1 << (self.0 - 1)
    }
}

impl fmt::Display for LengthBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A set of length buckets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BucketSet(u8);

impl BucketSet {
    pub fn insert(&mut self, b: LengthBucket) {
        self.0 |= b.bit();
    }

    pub fn contains(&self, b: LengthBucket) -> bool {
        self.0 & b.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// Buckets in ascending order, `+` last.
    pub fn iter(&self) -> impl Iterator<Item = LengthBucket> + '_ {
        (1..=6u8).map(LengthBucket).filter(|b| self.contains(*b))
    }

    /// Concatenated symbols, e.g. `1234+`. Empty for the empty set.
    pub fn symbols(&self) -> String {
        self.iter().map(LengthBucket::symbol).collect()
    }
}

impl FromIterator<LengthBucket> for BucketSet {
    fn from_iter<I: IntoIterator<Item = LengthBucket>>(iter: I) -> Self {
        let mut s = BucketSet::default();
        for b in iter {
            s.insert(b);
        }
        s
    }
}

/// A lexeme occurrence covering a queried position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionMatch {
    pub start: usize,
    pub len: usize,
    pub bucket: LengthBucket,
    /// B23IES position of the queried character inside the occurrence.
    pub tag: Position,
}

impl PositionMatch {
    pub fn lexeme(&self, chars: &[char]) -> String {
        chars[self.start..self.start + self.len].iter().collect()
    }

    /// `S` for single-character matches, otherwise `<tag>-<bucket>` such as `B-2`.
    pub fn code(&self) -> String {
        if self.len == 1 {
            "S".to_string()
        } else {
            format!("{}-{}", self.tag, self.bucket)
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Trie {
    next: HashMap<(u32, char), u32>,
    terminal: Vec<bool>,
}

impl Trie {
    fn build<'a, I: IntoIterator<Item = &'a String>>(words: I) -> Self {
        let mut trie = Trie { next: HashMap::new(), terminal: vec![false] };
        for w in words {
            let mut node = 0u32;
            for c in w.chars() {
                let fresh = trie.terminal.len() as u32;
                node = *trie.next.entry((node, c)).or_insert_with(|| fresh);
                if node == fresh {
                    trie.terminal.push(false);
                }
            }
            trie.terminal[node as usize] = true;
        }
        trie
    }

    /// Lengths of all lexemes starting at `chars[0]`, ascending.
    fn prefixes<'a>(&'a self, chars: &'a [char]) -> impl Iterator<Item = usize> + 'a {
        let mut node = Some(0u32);
        chars.iter().enumerate().map_while(move |(k, &c)| {
            let next = self.next.get(&(node?, c)).copied();
            node = next;
            next.map(|n| (k + 1, self.terminal[n as usize]))
        })
        .filter_map(|(len, term)| term.then_some(len))
    }
}

/// Outcome of [`Lexicon::expand`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpandSummary {
    pub added: usize,
    pub removed: usize,
    /// Removal requests for lexemes that were not present.
    pub missing: Vec<String>,
    /// Additions that were already present.
    pub duplicates: usize,
}

/// An immutable lexicon snapshot.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: BTreeSet<String>,
    profile: HashMap<char, BucketSet>,
    trie: Trie,
    generation: u64,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.generation == other.generation
    }
}

impl Lexicon {
    pub fn new() -> Self {
        Self::from_entries(std::iter::empty::<String>())
    }

    /// Builds generation 0 from lexemes. Empty strings are ignored.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entries: BTreeSet<String> =
            entries.into_iter().map(Into::into).filter(|w| !w.is_empty()).collect();
        Self::with_generation(entries, 0)
    }

    /// The distinct words of a training corpus.
    pub fn build_from_corpus(train: &[Sentence]) -> Self {
        Self::from_entries(train.iter().flat_map(|s| s.word_strings()))
    }

    fn with_generation(entries: BTreeSet<String>, generation: u64) -> Self {
        let mut profile: HashMap<char, BucketSet> = HashMap::new();
        for w in &entries {
            let bucket = LengthBucket::of(w.chars().count());
            for c in w.chars() {
                profile.entry(c).or_default().insert(bucket);
            }
        }
        let trie = Trie::build(&entries);
        Self { entries, profile, trie, generation }
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    pub fn contains(&self, lexeme: &str) -> bool {
        self.entries.contains(lexeme)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Returns a new snapshot with `add` inserted and `remove` deleted.
    pub fn expand<A, R>(&self, add: A, remove: R) -> Result<(Lexicon, ExpandSummary)>
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut entries = self.entries.clone();
        let mut summary = ExpandSummary::default();
        for w in remove {
            let w = w.as_ref();
            if entries.remove(w) {
                summary.removed += 1;
            } else {
                summary.missing.push(w.to_string());
            }
        }
        for w in add {
            let w = w.as_ref();
            validate_lexeme(w)?;
            if entries.insert(w.to_string()) {
                summary.added += 1;
            } else {
                summary.duplicates += 1;
            }
        }
        Ok((Self::with_generation(entries, self.generation + 1), summary))
    }

    /// Length buckets of the lexemes containing `c`.
    pub fn profile(&self, c: char) -> BucketSet {
        self.profile.get(&c).copied().unwrap_or_default()
    }

    /// Every `(start, len)` occurrence of a lexeme in `chars`, by start then length.
    pub fn occurrences(&self, chars: &[char]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for start in 0..chars.len() {
            out.extend(self.trie.prefixes(&chars[start..]).map(|len| (start, len)));
        }
        out
    }

    /// For each position, the occurrences covering it (ordered by start, then length).
    pub fn match_positions(&self, chars: &[char]) -> Vec<Vec<PositionMatch>> {
        let tags = LabelScheme::b23ies();
        let mut out = vec![Vec::new(); chars.len()];
        for (start, len) in self.occurrences(chars) {
            let bucket = LengthBucket::of(len);
            for offset in 0..len {
                out[start + offset].push(PositionMatch {
                    start,
                    len,
                    bucket,
                    tag: tags.position_in_word(offset, len),
                });
            }
        }
        for v in &mut out {
            v.sort_unstable();
        }
        out
    }

    /// Length-category code: script letter, `|`, then the bucket symbols of
    /// every lexeme containing `c` (`0` when there are none), e.g. `K|1234+`.
    pub fn lc_code(&self, c: char, class: &CharClass) -> String {
        let buckets = self.profile(c);
        let body = if buckets.is_empty() { "0".to_string() } else { buckets.symbols() };
        format!("{}|{}", class.script.symbol(), body)
    }

    /// Word-character code at position `i` of `chars`.
    pub fn wc_code_at(&self, chars: &[char], i: usize, include_char: bool) -> Result<String> {
        if i >= chars.len() {
            return Err(Error::OutOfBounds { pos: i, len: chars.len() });
        }
        let matches = self.match_positions(chars);
        Ok(wc_code(&matches[i], chars[i], include_char))
    }

    /// Per-character sentence-wise information. `gold` supplies offsets and
    /// word lengths and must have the same characters.
    pub fn sentence_info(&self, chars: &[char], gold: Option<&Sentence>) -> Result<Vec<CharRecord>> {
        let mut word_pos = vec![None; chars.len()];
        if let Some(g) = gold {
            if g.chars() != chars {
                return Err(Error::Alignment("gold sentence has different characters".into()));
            }
            for (s, e) in g.spans() {
                for (o, slot) in word_pos[s..e].iter_mut().enumerate() {
                    *slot = Some((o, e - s));
                }
            }
        }
        let matches = self.match_positions(chars);
        let mut records = Vec::with_capacity(chars.len());
        for (i, &c) in chars.iter().enumerate() {
            let known: BTreeSet<String> =
                self.entries.iter().filter(|w| w.contains(c)).cloned().collect();
            let covering: BTreeSet<String> = matches[i].iter().map(|m| m.lexeme(chars)).collect();
            let known_lengths = known.iter().map(|w| LengthBucket::of(w.chars().count())).collect();
            let covering_lengths = matches[i].iter().map(|m| m.bucket).collect();
            records.push(CharRecord {
                c,
                offset: word_pos[i].map(|(o, _)| o),
                word_len: word_pos[i].map(|(_, l)| l),
                script: classify(c).script,
                known,
                known_lengths,
                covering,
                covering_lengths,
            });
        }
        Ok(records)
    }

    /// SHA-256 over the sorted entries, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.entries {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Lexicon file contents: one lexeme per line, sorted.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for w in &self.entries {
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

/// Builds a WC code from the matches covering one position.
///
/// Codes are deduplicated, sorted and joined with `|`. No matches yields
/// `NONE`. With `include_char` the character itself is appended.
pub fn wc_code(matches: &[PositionMatch], c: char, include_char: bool) -> String {
    let codes: BTreeSet<String> = matches.iter().map(PositionMatch::code).collect();
    let mut out = if codes.is_empty() {
        "NONE".to_string()
    } else {
        codes.into_iter().collect::<Vec<_>>().join("|")
    };
    if include_char {
        out.push('|');
        out.push(c);
    }
    out
}

fn validate_lexeme(w: &str) -> Result<()> {
    if w.is_empty() || w.chars().any(|c| c == ' ' || c == '\n' || c == '\r') {
        return Err(Error::InvalidArgument(format!("invalid lexeme {w:?}")));
    }
    Ok(())
}

/// Reads a lexicon file: one lexeme per line, blank lines skipped.
pub fn read_lexemes<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (k, line) in reader.split(b'\n').enumerate() {
        let bytes = line?;
        let line = String::from_utf8(bytes).map_err(|_| Error::Decode { line: k + 1 })?;
        if line.is_empty() {
            continue;
        }
        if line.chars().any(|c| c == ' ' || c == '\r') {
            return Err(Error::Format { line: k + 1, msg: format!("lexeme {line:?} contains a separator") });
        }
        out.push(line);
    }
    Ok(out)
}

/// Sentence-wise information for one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharRecord {
    pub c: char,
    /// Offset inside the gold word.
    pub offset: Option<usize>,
    /// Length of the gold word.
    pub word_len: Option<usize>,
    pub script: Script,
    /// Lexemes containing the character anywhere.
    pub known: BTreeSet<String>,
    pub known_lengths: BucketSet,
    /// Lexemes whose occurrence in the sentence covers this position.
    pub covering: BTreeSet<String>,
    pub covering_lengths: BucketSet,
}

impl CharRecord {
    pub const HEADER: &'static str = "C\tO\tL\tT\tR\tL_R\tS\tL_S";

    /// Tab-separated row in [`CharRecord::HEADER`] column order.
    pub fn to_row(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
        let buckets = |b: &BucketSet| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.c,
            opt(self.offset),
            opt(self.word_len),
            self.script,
            join(&self.known),
            buckets(&self.known_lengths),
            join(&self.covering),
            buckets(&self.covering_lengths),
        )
    }
}

/// A lexicon slot that readers snapshot and writers replace atomically.
#[derive(Debug, Default)]
pub struct SharedLexicon {
    current: RwLock<Arc<Lexicon>>,
}

impl SharedLexicon {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { current: RwLock::new(Arc::new(lexicon)) }
    }

    pub fn snapshot(&self) -> Arc<Lexicon> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, lexicon: Lexicon) -> Arc<Lexicon> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        std::mem::replace(&mut *guard, Arc::new(lexicon))
    }

    /// Expands the current snapshot and installs the result.
    pub fn expand<A, R>(&self, add: A, remove: R) -> Result<ExpandSummary>
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        R: IntoIterator,
        R::Item: AsRef<str>,
    {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        let (next, summary) = guard.expand(add, remove)?;
        *guard = Arc::new(next);
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lubba_lexicon() -> Lexicon {
        Lexicon::from_entries(["a", "bad", "dub", "Lu", "!"])
    }

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn covering(lex: &Lexicon, s: &str, i: usize) -> Vec<(String, usize)> {
        let cs = chars(s);
        lex.match_positions(&cs)[i].iter().map(|m| (m.lexeme(&cs), m.start)).collect()
    }

    #[test]
    fn builds_from_corpus() {
        let corpus = crate::corpus::parse_corpus_str("Lu bad\na dub !\nbad").unwrap();
        let lex = Lexicon::build_from_corpus(&corpus);
        assert_eq!(lex.len(), 5);
        assert_eq!(lex.generation(), 0);

        let empty = Lexicon::build_from_corpus(&[]);
        assert!(empty.match_positions(&chars("abc")).iter().all(Vec::is_empty));

        let long = Lexicon::from_entries(["abcdef"]);
        assert!(long.profile('a').contains(LengthBucket::LONG));
    }

    #[test]
    fn lubba_matches() {
        let lex = lubba_lexicon();
        assert_eq!(covering(&lex, "Lubbadub!", 1), vec![("Lu".into(), 0)]);
        assert_eq!(covering(&lex, "Lubbadub!", 5), vec![("bad".into(), 3), ("dub".into(), 5)]);
        assert_eq!(covering(&lex, "Lubbadub!", 4), vec![("bad".into(), 3), ("a".into(), 4)]);
        assert!(covering(&lex, "Lubbadub!", 2).is_empty());
    }

    #[test]
    fn expansion_adds_matches_and_keeps_old_snapshot() {
        let lex = lubba_lexicon();
        let (bigger, summary) = lex.expand(["Lubba"], Vec::<String>::new()).unwrap();
        assert_eq!(summary.added, 1);
        assert_eq!(bigger.generation(), 1);
        let cs = chars("Lubbadub!");
        let m = &bigger.match_positions(&cs)[0];
        assert!(m.iter().any(|m| m.start == 0 && m.len == 5 && m.tag == Position::Begin));
        assert_eq!(lex.match_positions(&cs)[0].len(), 1);

        let (same, _) = lex.expand(Vec::<String>::new(), Vec::<String>::new()).unwrap();
        assert_eq!(same.entries(), lex.entries());
        assert_eq!(same.generation(), lex.generation() + 1);

        let (_, summary) = lex.expand(Vec::<String>::new(), ["zzz"]).unwrap();
        assert_eq!(summary.missing, vec!["zzz".to_string()]);

        let (long, _) = lex.expand(["abcdefg"], Vec::<String>::new()).unwrap();
        for ms in long.match_positions(&chars("abcdefg")) {
            assert!(ms.iter().any(|m| m.len == 7 && m.bucket == LengthBucket::LONG));
        }
        assert!(lex.expand([""], Vec::<String>::new()).is_err());
    }

    #[test]
    fn lc_codes() {
        let lex = Lexicon::from_entries(["東", "東京", "東京都", "東京都庁", "東京都庁舎前"]);
        assert_eq!(lex.lc_code('東', &classify('東')), "K|1234+");
        assert_eq!(lex.lc_code('の', &classify('の')), "H|0");
        assert_eq!(lubba_lexicon().lc_code('u', &classify('u')), "L|23");
    }

    #[test]
    fn wc_codes() {
        let lex = Lexicon::from_entries(["東", "東京", "東京都"]);
        assert_eq!(lex.wc_code_at(&chars("東京都"), 0, true).unwrap(), "B-2|B-3|S|東");
        assert_eq!(lex.wc_code_at(&chars("東京都"), 2, false).unwrap(), "E-3");
        assert_eq!(lex.wc_code_at(&chars("xyz"), 1, false).unwrap(), "NONE");
        assert_eq!(lubba_lexicon().wc_code_at(&chars("Lubbadub!"), 5, true).unwrap(), "B-3|E-3|d");
        assert!(lex.wc_code_at(&chars("東"), 3, true).is_err());

        let long = Lexicon::from_entries(["abcdefg"]);
        assert_eq!(long.wc_code_at(&chars("abcdefg"), 0, false).unwrap(), "B-+");
        assert_eq!(long.wc_code_at(&chars("abcdefg"), 4, false).unwrap(), "I-+");
    }

    #[test]
    fn info_rows() {
        let gold = &crate::corpus::parse_corpus_str("Lubba dub !").unwrap()[0];
        let recs = lubba_lexicon().sentence_info(gold.chars(), Some(gold)).unwrap();
        assert_eq!(recs[0].to_row(), "L\t0\t5\tL\tLu\t2\tLu\t2");
        assert_eq!(recs[8].to_row(), "!\t0\t1\tP\t!\t1\t!\t1");

        let bare = Lexicon::new().sentence_info(gold.chars(), None).unwrap();
        assert!(bare.iter().all(|r| r.known.is_empty() && r.covering.is_empty()));
        assert!(bare.iter().all(|r| r.known_lengths.is_empty() && r.offset.is_none()));
    }

    #[test]
    fn shared_swap() {
        let shared = SharedLexicon::new(lubba_lexicon());
        let before = shared.snapshot();
        shared.expand(["Lubba"], Vec::<String>::new()).unwrap();
        let after = shared.snapshot();
        assert_eq!(before.generation(), 0);
        assert_eq!(after.generation(), 1);
        assert!(!before.contains("Lubba"));
        assert!(after.contains("Lubba"));
    }

    #[test]
    fn lexicon_file() {
        let words = read_lexemes("b\na\n\nb\n".as_bytes()).unwrap();
        let lex = Lexicon::from_entries(words);
        assert_eq!(lex.to_file_string(), "a\nb\n");
        assert!(read_lexemes("a b\n".as_bytes()).is_err());
    }
}
