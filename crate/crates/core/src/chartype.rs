//! Character classification by Unicode general category and script class.

use std::fmt;

use unicode_general_category::{get_general_category, GeneralCategory};

/// Major Unicode general-category class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MajorCategory {
    Letter,
    Mark,
    Number,
    Punctuation,
    Symbol,
    Separator,
    Other,
}

impl MajorCategory {
    pub fn symbol(self) -> char {
        match self {
            Self::Letter => 'L',
            Self::Mark => 'M',
            Self::Number => 'N',
            Self::Punctuation => 'P',
            Self::Symbol => 'S',
            Self::Separator => 'Z',
            Self::Other => 'C',
        }
    }

    fn of(c: char) -> Self {
        match get_general_category(c).abbreviation().as_bytes()[0] {
            b'L' => Self::Letter,
            b'M' => Self::Mark,
            b'N' => Self::Number,
            b'P' => Self::Punctuation,
            b'S' => Self::Symbol,
            b'Z' => Self::Separator,
            _ => Self::Other,
        }
    }
}

/// Script class used for the `T` column and for LC codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Script {
    Hiragana,
    Katakana,
    Kanji,
    Latin,
    Digit,
    Punctuation,
    Symbol,
    Space,
    Other,
}

impl Script {
    pub const ALL: [Script; 9] = [
        Script::Hiragana,
        Script::Katakana,
        Script::Kanji,
        Script::Latin,
        Script::Digit,
        Script::Punctuation,
        Script::Symbol,
        Script::Space,
        Script::Other,
    ];

    /// One-letter code: H, T, K, L, N, P, S, Z or O.
    pub fn symbol(self) -> char {
        match self {
            Script::Hiragana => 'H',
            Script::Katakana => 'T',
            Script::Kanji => 'K',
            Script::Latin => 'L',
            Script::Digit => 'N',
            Script::Punctuation => 'P',
            Script::Symbol => 'S',
            Script::Space => 'Z',
            Script::Other => 'O',
        }
    }

    pub fn is_japanese(self) -> bool {
        matches!(self, Script::Hiragana | Script::Katakana | Script::Kanji)
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CharClass {
    pub general: MajorCategory,
    pub script: Script,
    /// True iff the script is hiragana, katakana or kanji.
    pub japanese_letter: bool,
}

fn script_of(c: char, general: MajorCategory) -> Script {
    let cp = c as u32;
    match cp {
        0x3041..=0x309F => Script::Hiragana,
        // U+30FC (prolonged sound mark) falls in this block.
        0x30A0..=0x30FF | 0xFF66..=0xFF9D => Script::Katakana,
        0x3005 | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF => Script::Kanji,
        0x41..=0x5A | 0x61..=0x7A | 0xFF21..=0xFF3A | 0xFF41..=0xFF5A => Script::Latin,
        _ => {
            if get_general_category(c) == GeneralCategory::DecimalNumber {
                return Script::Digit;
            }
            match general {
                MajorCategory::Punctuation => Script::Punctuation,
                MajorCategory::Symbol => Script::Symbol,
                MajorCategory::Separator => Script::Space,
                _ => Script::Other,
            }
        }
    }
}

/// Classifies a character. Total and context-free.
pub fn classify(c: char) -> CharClass {
    let general = MajorCategory::of(c);
    let script = script_of(c, general);
    CharClass { general, script, japanese_letter: script.is_japanese() }
}

pub fn classify_all(chars: &[char]) -> Vec<CharClass> {
    chars.iter().map(|&c| classify(c)).collect()
}
