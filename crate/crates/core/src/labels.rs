//! Positional label schemes and conversion between segmentations and labels.
//!
//! A scheme assigns each character a positional tag (`B`, `2`, `3`, ..., `I`,
//! `E`, `S`), optionally extended with a long-word flag (`+`, words longer than
//! the length threshold) and a foreign flag (`F`, characters that are not
//! Japanese letters). The final design combines B23IES with both flags for 22
//! classes.

use std::fmt;
use std::str::FromStr;

use crate::chartype::CharClass;
use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Position of a character inside its word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Begin,
    /// The k-th character of a word, `k >= 2`.
    Ordinal(u8),
    Inside,
    End,
    Single,
}

impl Position {
    pub fn opens_word(self) -> bool {
        matches!(self, Position::Begin | Position::Single)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Begin => f.write_str("B"),
            Position::Ordinal(k) => write!(f, "{k}"),
            Position::Inside => f.write_str("I"),
            Position::End => f.write_str("E"),
            Position::Single => f.write_str("S"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub position: Position,
    pub long_word: bool,
    pub foreign: bool,
}

impl Label {
    pub const fn plain(position: Position) -> Self {
        Self { position, long_word: false, foreign: false }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.position)?;
        if self.long_word {
            f.write_str("+")?;
        }
        if self.foreign {
            f.write_str("F")?;
        }
        Ok(())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownLabel(s.to_string());
        let mut rest = s;
        let foreign = rest.ends_with('F');
        if foreign {
            rest = &rest[..rest.len() - 1];
        }
        let long_word = rest.ends_with('+');
        if long_word {
            rest = &rest[..rest.len() - 1];
        }
        let position = match rest {
            "B" => Position::Begin,
            "I" => Position::Inside,
            "E" => Position::End,
            "S" => Position::Single,
            digits => {
                let k: u8 = digits.parse().map_err(|_| bad())?;
                if k < 2 {
                    return Err(bad());
                }
                Position::Ordinal(k)
            }
        };
        Ok(Label { position, long_word, foreign })
    }
}

/// A positional label scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LabelScheme {
    /// Number of word-initial positions with distinct tags (`B`=1, `B2`=2, `B23`=3).
    pub explicit_positions: u8,
    pub has_end: bool,
    pub has_single: bool,
    pub length_flag: bool,
    pub type_flag: bool,
    /// Words longer than this get the `+` flag.
    pub length_threshold: usize,
}

pub const LENGTH_FLAG_THRESHOLD: usize = 5;

impl LabelScheme {
    pub const fn positional(explicit_positions: u8, has_end: bool, has_single: bool) -> Self {
        Self {
            explicit_positions,
            has_end,
            has_single,
            length_flag: false,
            type_flag: false,
            length_threshold: LENGTH_FLAG_THRESHOLD,
        }
    }

    pub const fn bies() -> Self {
        Self::positional(1, true, true)
    }

    pub const fn b23ies() -> Self {
        Self::positional(3, true, true)
    }

    /// B23IES with the long-word and foreign flags: 22 classes.
    pub const fn final_design() -> Self {
        Self { length_flag: true, type_flag: true, ..Self::b23ies() }
    }

    pub fn with_flags(self, length_flag: bool, type_flag: bool) -> Self {
        Self { length_flag, type_flag, ..self }
    }

    /// Short name used in model files and on the command line.
    pub fn name(&self) -> String {
        if *self == Self::bies() {
            return "bies".into();
        }
        if *self == Self::b23ies() {
            return "b23ies".into();
        }
        if *self == Self::final_design() {
            return "final".into();
        }
        let mut s = String::from("B");
        for k in 2..=self.explicit_positions {
            s.push_str(&k.to_string());
        }
        s.push('I');
        if self.has_end {
            s.push('E');
        }
        if self.has_single {
            s.push('S');
        }
        if self.length_flag {
            s.push_str(&format!("+{}", self.length_threshold));
        }
        if self.type_flag {
            s.push('F');
        }
        s
    }

    /// Ordered positional tags: B, 2..=n0, I, E, S.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = vec![Position::Begin];
        out.extend((2..=self.explicit_positions).map(Position::Ordinal));
        out.push(Position::Inside);
        if self.has_end {
            out.push(Position::End);
        }
        if self.has_single {
            out.push(Position::Single);
        }
        out
    }

    /// Every reachable label in canonical order.
    ///
    /// Positional order first, then plain before `+`, then plain before `F`.
    /// `S+` is never produced because a single-character word is never long.
    pub fn inventory(&self) -> Vec<Label> {
        let mut out = Vec::new();
        for position in self.positions() {
            let long_options: &[bool] = if self.length_flag && position != Position::Single {
                &[false, true]
            } else {
                &[false]
            };
            let foreign_options: &[bool] = if self.type_flag { &[false, true] } else { &[false] };
            for &long_word in long_options {
                for &foreign in foreign_options {
                    out.push(Label { position, long_word, foreign });
                }
            }
        }
        out
    }

    /// Positional tag of the character at `offset` in a word of length `len`.
    pub fn position_in_word(&self, offset: usize, len: usize) -> Position {
        debug_assert!(offset < len);
        if len == 1 {
            return if self.has_single { Position::Single } else { Position::Begin };
        }
        if offset == 0 {
            Position::Begin
        } else if offset == len - 1 && self.has_end {
            Position::End
        } else if offset < self.explicit_positions as usize {
            Position::Ordinal(offset as u8 + 1)
        } else {
            Position::Inside
        }
    }

    /// Labels every character of a segmented sentence.
    pub fn encode(&self, sentence: &Sentence, classes: &[CharClass]) -> Result<Vec<Label>> {
        if classes.len() != sentence.len() {
            return Err(Error::Alignment(format!(
                "{} character classes for a sentence of length {}",
                classes.len(),
                sentence.len()
            )));
        }
        let mut out = Vec::with_capacity(sentence.len());
        for (start, end) in sentence.spans() {
            let len = end - start;
            let long_word = self.length_flag && len > self.length_threshold;
            for offset in 0..len {
                let foreign = self.type_flag && !classes[start + offset].japanese_letter;
                out.push(Label { position: self.position_in_word(offset, len), long_word, foreign });
            }
        }
        Ok(out)
    }
}

impl FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bies" => Ok(Self::bies()),
            "b23ies" => Ok(Self::b23ies()),
            "final" => Ok(Self::final_design()),
            _ => parse_generic(s).ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}"))),
        }
    }
}

fn parse_generic(s: &str) -> Option<LabelScheme> {
    let mut rest = s.strip_prefix('B')?;
    let mut n0 = 1u8;
    while let Some(c) = rest.chars().next().filter(|c| c.is_ascii_digit()) {
        let k = c.to_digit(10)? as u8;
        if k != n0 + 1 {
            return None;
        }
        n0 = k;
        rest = &rest[1..];
    }
    rest = rest.strip_prefix('I')?;
    let has_end = rest.starts_with('E');
    if has_end {
        rest = &rest[1..];
    }
    let has_single = rest.starts_with('S');
    if has_single {
        rest = &rest[1..];
    }
    let mut scheme = LabelScheme::positional(n0, has_end, has_single);
    if let Some(r) = rest.strip_prefix('+') {
        let digits: String = r.chars().take_while(|c| c.is_ascii_digit()).collect();
        scheme.length_flag = true;
        scheme.length_threshold = digits.parse().ok()?;
        rest = &r[digits.len()..];
    }
    if rest == "F" {
        scheme.type_flag = true;
        rest = "";
    }
    rest.is_empty().then_some(scheme)
}

/// Word-start offsets of a label sequence.
///
/// A word opens at position 0 and wherever the positional tag is `B` or `S`;
/// everything else continues the current word. Flags are ignored.
pub fn decode(labels: &[Label]) -> Vec<usize> {
    decode_positions(labels.iter().map(|l| l.position))
}

pub fn decode_positions<I: IntoIterator<Item = Position>>(positions: I) -> Vec<usize> {
    positions
        .into_iter()
        .enumerate()
        .filter(|&(i, p)| i == 0 || p.opens_word())
        .map(|(i, _)| i)
        .collect()
}
