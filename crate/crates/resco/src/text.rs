//! Article segmentation, tokenization and gazetteer entity detection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::VectorStore;

/// How raw article text is split into sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentMode {
    /// Rule-based splitting on `.`/`!`/`?` boundaries.
    Auto,
    /// One sentence per line, blank lines dropped.
    PreSegmented,
}

/// One sentence with its derived tokens and detected entity mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub tokens: Vec<String>,
    /// Entity keys resolved against the entity store; a set, so repeated
    /// mentions collapse.
    pub entities: BTreeSet<String>,
}

/// Ordered list of sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "Dr.", "Mr.", "Mrs.", "Ms.", "St.", "e.g.", "i.e.", "U.S.", "vs.",
];

/// Splits raw text into an ordered document.
///
/// Errors if nothing remains after segmentation.
pub fn segment(id: &str, raw_text: &str, mode: SegmentMode) -> Result<Document> {
    let texts: Vec<String> = match mode {
        SegmentMode::PreSegmented => raw_text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect(),
        SegmentMode::Auto => split_auto(raw_text),
    };
    if texts.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let sentences = texts
        .into_iter()
        .enumerate()
        .map(|(index, text)| {
            let tokens = tokenize(&text);
            Sentence {
                index,
                text,
                tokens,
                entities: BTreeSet::new(),
            }
        })
        .collect();
    Ok(Document {
        id: id.to_string(),
        sentences,
    })
}

/// Rule-based splitter: break after `.`, `!` or `?` when followed by
/// whitespace and an uppercase letter or digit, unless the terminator closes
/// a listed abbreviation. Newlines are treated as plain whitespace so the
/// produced sentences are always single-line.
fn split_auto(raw: &str) -> Vec<String> {
    let flat: String = raw
        .chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .collect();
    let chars: Vec<char> = flat.chars().collect();

    let mut sentences = Vec::new();
    let mut start = 0usize;
    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            continue;
        }
        let Some(&next) = chars.get(i + 1) else { continue };
        if next != ' ' {
            continue;
        }
        let upcoming = chars[i + 2..].iter().find(|c| **c != ' ');
        let starts_sentence = upcoming.is_some_and(|c| c.is_uppercase() || c.is_ascii_digit());
        if !starts_sentence {
            continue;
        }
        if c == '.' && ends_with_abbreviation(&chars[start..=i]) {
            continue;
        }
        let sentence: String = chars[start..=i].iter().collect();
        let sentence = sentence.trim().to_string();
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
        start = i + 1;
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim().to_string();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences
}

fn ends_with_abbreviation(prefix: &[char]) -> bool {
    let last_word: String = prefix
        .rsplit(|c| *c == ' ')
        .next()
        .unwrap_or(&[])
        .iter()
        .collect();
    ABBREVIATIONS.contains(&last_word.as_str())
}

/// Lowercased tokens with surrounding punctuation stripped.
///
/// Commas between digits are deleted so "1,000" survives as one numeric
/// token; hyphenated words stay intact; chunks that are pure punctuation
/// vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|chunk| {
            let lowered = chunk.to_lowercase();
            let decommaed = strip_digit_commas(&lowered);
            let trimmed = decommaed.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

fn strip_digit_commas(token: &str) -> String {
    let chars: Vec<char> = token.chars().collect();
    let mut out = String::with_capacity(token.len());
    for (i, &c) in chars.iter().enumerate() {
        let between_digits = c == ','
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
        if !between_digits {
            out.push(c);
        }
    }
    out
}

/// Finds entity-store keys occurring in the sentence as space-joined token
/// n-grams of length at most `max_span`.
///
/// Matching is longest-match-wins, left to right, over non-overlapping
/// spans; the result is a set so repeated mentions collapse.
pub fn detect_entities(
    sentence: &Sentence,
    entity_store: &VectorStore,
    max_span: usize,
) -> BTreeSet<String> {
    assert!(max_span >= 1, "max_span must be at least 1");
    let tokens = &sentence.tokens;
    let mut found = BTreeSet::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=max_span.min(tokens.len() - i))
            .rev()
            .map(|n| (n, tokens[i..i + n].join(" ")))
            .find(|(_, surface)| entity_store.contains(surface));
        match longest {
            Some((n, surface)) => {
                found.insert(crate::store::fold_key(&surface));
                i += n;
            }
            None => i += 1,
        }
    }
    found
}

/// Runs entity detection over every sentence of a document in place.
pub fn attach_entities(doc: &mut Document, entity_store: &VectorStore, max_span: usize) {
    for sentence in &mut doc.sentences {
        sentence.entities = detect_entities(sentence, entity_store, max_span);
    }
}
