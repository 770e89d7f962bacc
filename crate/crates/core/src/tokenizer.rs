//! Tokenizers and delimiter marking.
//!
//! Morphological analysers are not bundled. Realistic runs feed
//! pre-tokenized text; the whitespace and character tokenizers cover tests
//! and character-level CJK processing.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::Token;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TokenizeError {
    #[error("input is empty after trimming")]
    EmptyInput,
    #[error("delimiter set is empty")]
    EmptyDelimiterSet,
    #[error("delimiter `{0}` is not a single non-whitespace grapheme")]
    BadDelimiter(String),
    #[error("bad code point `{0}`")]
    BadCodePoint(String),
}

/// The default split points: ASCII comma, semicolon and colon plus their
/// CJK forms. Sentence-final punctuation is deliberately absent.
pub const DEFAULT_DELIMITERS: [&str; 7] = [",", ";", ":", "、", "，", "；", "："];

/// Punctuation strings at which sentences are split into segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelimiterSet {
    delimiters: BTreeSet<String>,
}

impl Default for DelimiterSet {
    fn default() -> Self {
        DelimiterSet::new(DEFAULT_DELIMITERS).expect("default delimiters are valid")
    }
}

impl DelimiterSet {
    pub fn new<I, S>(items: I) -> Result<Self, TokenizeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut delimiters = BTreeSet::new();
        for item in items {
            let item = item.into();
            let single = item.graphemes(true).count() == 1;
            if !single || item.chars().any(char::is_whitespace) {
                return Err(TokenizeError::BadDelimiter(item));
            }
            delimiters.insert(item);
        }
        if delimiters.is_empty() {
            return Err(TokenizeError::EmptyDelimiterSet);
        }
        Ok(DelimiterSet { delimiters })
    }

    /// Parses a comma-separated list of [`parse_item`](Self::parse_item)
    /// forms. The comma itself can only be written as `U+002C`.
    pub fn parse_list(spec: &str) -> Result<Self, TokenizeError> {
        let items = spec
            .split(',')
            .map(str::trim)
            .filter(|item| !item.is_empty())
            .map(Self::parse_item)
            .collect::<Result<Vec<_>, _>>()?;
        DelimiterSet::new(items)
    }

    /// `U+XXXX` or `0xXXXX` is a hexadecimal code point; anything else is
    /// taken literally.
    pub fn parse_item(item: &str) -> Result<String, TokenizeError> {
        let hex = item
            .strip_prefix("U+")
            .or_else(|| item.strip_prefix("u+"))
            .or_else(|| item.strip_prefix("0x"))
            .or_else(|| item.strip_prefix("0X"));
        match hex {
            Some(digits) => u32::from_str_radix(digits, 16)
                .ok()
                .and_then(char::from_u32)
                .map(String::from)
                .ok_or_else(|| TokenizeError::BadCodePoint(item.to_string())),
            None => Ok(item.to_string()),
        }
    }

    pub fn contains(&self, text: &str) -> bool {
        self.delimiters.contains(text)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.delimiters.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.delimiters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delimiters.is_empty()
    }
}

fn token(text: &str, delims: &DelimiterSet) -> Token {
    Token {
        text: text.to_string(),
        is_delimiter: delims.contains(text),
    }
}

/// Splits on whitespace runs, then splits delimiter graphemes out of each
/// chunk into their own tokens.
pub fn tokenize_whitespace(raw: &str, delims: &DelimiterSet) -> Result<Vec<Token>, TokenizeError> {
    if raw.trim().is_empty() {
        return Err(TokenizeError::EmptyInput);
    }
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        let mut start = 0;
        for (idx, g) in chunk.grapheme_indices(true) {
            if delims.contains(g) {
                if start < idx {
                    tokens.push(token(&chunk[start..idx], delims));
                }
                tokens.push(token(g, delims));
                start = idx + g.len();
            }
        }
        if start < chunk.len() {
            tokens.push(token(&chunk[start..], delims));
        }
    }
    Ok(tokens)
}

/// One token per grapheme cluster with whitespace removed.
pub fn tokenize_chars(raw: &str, delims: &DelimiterSet) -> Result<Vec<Token>, TokenizeError> {
    if raw.trim().is_empty() {
        return Err(TokenizeError::EmptyInput);
    }
    let mut tokens = Vec::new();
    for g in raw.graphemes(true) {
        if g.chars().any(char::is_whitespace) {
            // A cluster may be whitespace followed by combining marks.
            let kept: String = g.chars().filter(|c| !c.is_whitespace()).collect();
            if !kept.is_empty() {
                tokens.push(token(&kept, delims));
            }
        } else {
            tokens.push(token(g, delims));
        }
    }
    Ok(tokens)
}

/// Recomputes `is_delimiter` for every token. Token texts are untouched.
pub fn mark_delimiters(mut tokens: Vec<Token>, delims: &DelimiterSet) -> Vec<Token> {
    mark_in_place(&mut tokens, delims);
    tokens
}

pub fn mark_in_place(tokens: &mut [Token], delims: &DelimiterSet) {
    for t in tokens {
        t.is_delimiter = delims.contains(&t.text);
    }
}

/// Tokenization strategy applied to raw lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tokenizer {
    /// Split on whitespace only; tokens already exist upstream.
    #[default]
    Pretokenized,
    Whitespace,
    Chars,
}

impl Tokenizer {
    pub fn tokenize(self, raw: &str, delims: &DelimiterSet) -> Result<Vec<Token>, TokenizeError> {
        match self {
            Tokenizer::Pretokenized => {
                if raw.trim().is_empty() {
                    return Err(TokenizeError::EmptyInput);
                }
                Ok(raw.split_whitespace().map(|t| token(t, delims)).collect())
            }
            Tokenizer::Whitespace => tokenize_whitespace(raw, delims),
            Tokenizer::Chars => tokenize_chars(raw, delims),
        }
    }
}

impl FromStr for Tokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pre" | "pretokenized" => Ok(Tokenizer::Pretokenized),
            "whitespace" | "word" => Ok(Tokenizer::Whitespace),
            "chars" | "char" => Ok(Tokenizer::Chars),
            other => Err(format!(
                "unknown tokenizer `{other}` (expected pre|whitespace|chars)"
            )),
        }
    }
}

impl fmt::Display for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tokenizer::Pretokenized => "pre",
            Tokenizer::Whitespace => "whitespace",
            Tokenizer::Chars => "chars",
        })
    }
}
