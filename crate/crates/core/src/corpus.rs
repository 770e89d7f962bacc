//! Sentence pairs, corpora, and line-aligned corpus files.
//!
//! Two on-disk layouts are supported: a pair of line-aligned UTF-8 files
//! (one per language) and a single TSV file holding `source \t target` per
//! line. Blank lines are rejected so that line alignment is never silently
//! lost.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("invalid UTF-8 in {side} input at byte offset {offset}")]
    Encoding { side: SideName, offset: usize },
    #[error("blank line {line} in {side} input")]
    EmptyLine { side: SideName, line: usize },
    #[error("line {line}: expected `source<TAB>target`")]
    MalformedTsv { line: usize },
    #[error("source and target language tags are both `{0}`")]
    SameLanguage(String),
    #[error("refusing to write an empty corpus")]
    EmptyCorpus,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Which half of a pair an error or value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideName {
    Source,
    Target,
}

impl fmt::Display for SideName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideName::Source => f.write_str("source"),
            SideName::Target => f.write_str("target"),
        }
    }
}

/// A single token. The text is never empty and never contains a line break.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub is_delimiter: bool,
}

impl Token {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        debug_assert!(!text.is_empty(), "empty token");
        debug_assert!(!text.contains('\n'), "token contains a newline");
        Token {
            text,
            is_delimiter: false,
        }
    }

    pub fn delimiter(text: impl Into<String>) -> Self {
        Token {
            is_delimiter: true,
            ..Token::new(text)
        }
    }
}

/// Opaque language tag such as `ja` or `zh`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lang(pub String);

impl Lang {
    pub fn new(tag: impl Into<String>) -> Self {
        Lang(tag.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub lang: Lang,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, lang: Lang) -> Self {
        Sentence { tokens, lang }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn join(&self, joiner: Joiner) -> String {
        join_tokens(&self.tokens, joiner)
    }
}

/// Where a pair came from. Only pairs read from an input corpus are `Original`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Partial,
    Pseudo,
    CopiedDuplicate,
    BackTranslated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPair {
    pub id: usize,
    pub source: Sentence,
    pub target: Sentence,
    pub provenance: Provenance,
}

impl ParallelPair {
    /// True when both sides carry the same token texts as `other`.
    pub fn same_text(&self, other: &ParallelPair) -> bool {
        self.source.texts().eq(other.source.texts()) && self.target.texts().eq(other.target.texts())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub source_lang: Lang,
    pub target_lang: Lang,
    pub pairs: Vec<ParallelPair>,
}

impl Corpus {
    pub fn new(source_lang: Lang, target_lang: Lang) -> Result<Self, CorpusError> {
        if source_lang == target_lang {
            return Err(CorpusError::SameLanguage(source_lang.0));
        }
        Ok(Corpus {
            source_lang,
            target_lang,
            pairs: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Smallest id not used by any pair.
    pub fn next_id(&self) -> usize {
        self.pairs.iter().map(|p| p.id + 1).max().unwrap_or(0)
    }

    /// Appends a pair built from token sequences, assigning the next free id.
    pub fn push_tokens(
        &mut self,
        source: Vec<Token>,
        target: Vec<Token>,
        provenance: Provenance,
    ) -> usize {
        let id = self.next_id();
        self.pairs.push(ParallelPair {
            id,
            source: Sentence::new(source, self.source_lang.clone()),
            target: Sentence::new(target, self.target_lang.clone()),
            provenance,
        });
        id
    }
}

/// How a language's tokens are joined back into a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Joiner {
    #[default]
    Space,
    /// No separator, for unsegmented CJK output.
    Empty,
}

impl Joiner {
    pub fn as_str(self) -> &'static str {
        match self {
            Joiner::Space => " ",
            Joiner::Empty => "",
        }
    }
}

impl FromStr for Joiner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "space" | " " => Ok(Joiner::Space),
            "none" | "empty" | "" => Ok(Joiner::Empty),
            other => Err(format!("unknown joiner `{other}` (expected space|none)")),
        }
    }
}

pub fn join_tokens(tokens: &[Token], joiner: Joiner) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push_str(joiner.as_str());
        }
        out.push_str(&t.text);
    }
    out
}

/// How corpus lines become tokens at read time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineMode {
    /// Whitespace-split; the input was tokenized upstream.
    #[default]
    Pretokenized,
    /// The whole trimmed line becomes one pseudo-token, to be tokenized later.
    Raw,
}

fn decode(bytes: &[u8], side: SideName) -> Result<&str, CorpusError> {
    std::str::from_utf8(bytes).map_err(|e| CorpusError::Encoding {
        side,
        offset: e.valid_up_to(),
    })
}

/// Splits on LF, tolerating a missing trailing newline and CRLF endings.
fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect()
}

fn line_tokens(line: &str, mode: LineMode) -> Vec<Token> {
    match mode {
        LineMode::Pretokenized => line.split_whitespace().map(Token::new).collect(),
        LineMode::Raw => {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                Vec::new()
            } else {
                vec![Token::new(trimmed)]
            }
        }
    }
}

fn build_corpus<'a>(
    lines: impl Iterator<Item = (&'a str, &'a str)>,
    source_lang: &Lang,
    target_lang: &Lang,
    mode: LineMode,
) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::new(source_lang.clone(), target_lang.clone())?;
    for (i, (src, tgt)) in lines.enumerate() {
        let source = line_tokens(src, mode);
        if source.is_empty() {
            return Err(CorpusError::EmptyLine {
                side: SideName::Source,
                line: i + 1,
            });
        }
        let target = line_tokens(tgt, mode);
        if target.is_empty() {
            return Err(CorpusError::EmptyLine {
                side: SideName::Target,
                line: i + 1,
            });
        }
        corpus.pairs.push(ParallelPair {
            id: i,
            source: Sentence::new(source, source_lang.clone()),
            target: Sentence::new(target, target_lang.clone()),
            provenance: Provenance::Original,
        });
    }
    Ok(corpus)
}

/// Parses two line-aligned buffers into a corpus. Ids are line numbers
/// starting at 0.
pub fn parse_parallel(
    source: &[u8],
    target: &[u8],
    source_lang: &Lang,
    target_lang: &Lang,
    mode: LineMode,
) -> Result<Corpus, CorpusError> {
    let src = split_lines(decode(source, SideName::Source)?);
    let tgt = split_lines(decode(target, SideName::Target)?);
    if src.len() != tgt.len() {
        return Err(CorpusError::LineCountMismatch {
            source_lines: src.len(),
            target_lines: tgt.len(),
        });
    }
    build_corpus(
        src.into_iter().zip(tgt),
        source_lang,
        target_lang,
        mode,
    )
}

pub fn read_parallel(
    source_path: &Path,
    target_path: &Path,
    source_lang: &Lang,
    target_lang: &Lang,
    mode: LineMode,
) -> Result<Corpus, CorpusError> {
    let src = fs::read(source_path).map_err(|e| CorpusError::io(source_path, e))?;
    let tgt = fs::read(target_path).map_err(|e| CorpusError::io(target_path, e))?;
    parse_parallel(&src, &tgt, source_lang, target_lang, mode)
}

/// Parses a `source \t target` buffer. Exactly one tab per line.
pub fn parse_tsv(
    bytes: &[u8],
    source_lang: &Lang,
    target_lang: &Lang,
    mode: LineMode,
) -> Result<Corpus, CorpusError> {
    let text = decode(bytes, SideName::Source)?;
    let mut rows = Vec::new();
    for (i, line) in split_lines(text).into_iter().enumerate() {
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(t), None) => rows.push((s, t)),
            _ => return Err(CorpusError::MalformedTsv { line: i + 1 }),
        }
    }
    build_corpus(rows.into_iter(), source_lang, target_lang, mode)
}

pub fn read_tsv(
    path: &Path,
    source_lang: &Lang,
    target_lang: &Lang,
    mode: LineMode,
) -> Result<Corpus, CorpusError> {
    let bytes = fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    parse_tsv(&bytes, source_lang, target_lang, mode)
}

fn write_lines<'a>(path: &Path, lines: impl Iterator<Item = String> + 'a) -> Result<(), CorpusError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CorpusError::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))
}

/// Writes one line per pair to each file, joining tokens with the given
/// per-side joiner.
pub fn write_parallel(
    corpus: &Corpus,
    source_path: &Path,
    target_path: &Path,
    source_joiner: Joiner,
    target_joiner: Joiner,
) -> Result<(), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    write_lines(
        source_path,
        corpus.pairs.iter().map(|p| p.source.join(source_joiner)),
    )?;
    write_lines(
        target_path,
        corpus.pairs.iter().map(|p| p.target.join(target_joiner)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn langs() -> (Lang, Lang) {
        (Lang::new("ja"), Lang::new("zh"))
    }

    fn texts(s: &Sentence) -> Vec<&str> {
        s.texts().collect()
    }

    #[test]
    fn three_lines_give_three_pairs() {
        let (s, t) = langs();
        let c = parse_parallel(b"a\nb\nc\n", b"x\ny\nz", &s, &t, LineMode::Pretokenized).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.pairs.iter().map(|p| p.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(c.pairs.iter().all(|p| p.provenance == Provenance::Original));
    }

    #[test]
    fn line_count_mismatch() {
        let (s, t) = langs();
        let err = parse_parallel(b"a\nb\nc\n", b"x\ny\n", &s, &t, LineMode::Pretokenized).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::LineCountMismatch {
                source_lines: 3,
                target_lines: 2
            }
        ));
    }

    #[test]
    fn pretokenized_split() {
        let (s, t) = langs();
        let c = parse_parallel(b"a b , c\n", b"x\n", &s, &t, LineMode::Pretokenized).unwrap();
        assert_eq!(texts(&c.pairs[0].source), vec!["a", "b", ",", "c"]);
    }

    #[test]
    fn raw_mode_keeps_line_whole() {
        let (s, t) = langs();
        let c = parse_parallel(b"  a b , c \r\n", b"x y\n", &s, &t, LineMode::Raw).unwrap();
        assert_eq!(texts(&c.pairs[0].source), vec!["a b , c"]);
    }

    #[test]
    fn blank_line_is_an_error() {
        let (s, t) = langs();
        let err = parse_parallel(b"a\n \nc\n", b"x\ny\nz\n", &s, &t, LineMode::Pretokenized).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::EmptyLine {
                side: SideName::Source,
                line: 2
            }
        ));
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let (s, t) = langs();
        let err = parse_parallel(b"ab\xffc\n", b"x\n", &s, &t, LineMode::Pretokenized).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::Encoding {
                side: SideName::Source,
                offset: 2
            }
        ));
    }

    #[test]
    fn same_language_rejected() {
        let l = Lang::new("ja");
        assert!(matches!(
            parse_parallel(b"a\n", b"b\n", &l, &l, LineMode::Raw),
            Err(CorpusError::SameLanguage(_))
        ));
    }

    #[test]
    fn tsv_reader() {
        let (s, t) = langs();
        let c = parse_tsv(b"a b\tx\nc\ty z\n", &s, &t, LineMode::Pretokenized).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(texts(&c.pairs[1].target), vec!["y", "z"]);
        assert!(matches!(
            parse_tsv(b"a\tb\tc\n", &s, &t, LineMode::Pretokenized),
            Err(CorpusError::MalformedTsv { line: 1 })
        ));
        assert!(matches!(
            parse_tsv(b"ab\n", &s, &t, LineMode::Pretokenized),
            Err(CorpusError::MalformedTsv { line: 1 })
        ));
    }

    #[test]
    fn empty_joiner_concatenates() {
        let s = Sentence::new(vec![Token::new("a"), Token::new("b")], Lang::new("zh"));
        assert_eq!(s.join(Joiner::Empty), "ab");
        assert_eq!(s.join(Joiner::Space), "a b");
    }

    #[test]
    fn write_one_line_per_pair() {
        let (s, t) = langs();
        let c = parse_parallel(b"a b\nc\n", b"x\ny z\n", &s, &t, LineMode::Pretokenized).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (sp, tp) = (dir.path().join("out.ja"), dir.path().join("out.zh"));
        write_parallel(&c, &sp, &tp, Joiner::Space, Joiner::Empty).unwrap();
        assert_eq!(fs::read_to_string(&sp).unwrap(), "a b\nc\n");
        assert_eq!(fs::read_to_string(&tp).unwrap(), "x\nyz\n");
    }

    #[test]
    fn writing_empty_corpus_fails() {
        let (s, t) = langs();
        let c = Corpus::new(s, t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_parallel(&c, &dir.path().join("a"), &dir.path().join("b"), Joiner::Space, Joiner::Space),
            Err(CorpusError::EmptyCorpus)
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let (s, t) = langs();
        let err = read_parallel(
            Path::new("/nonexistent/a"),
            Path::new("/nonexistent/b"),
            &s,
            &t,
            LineMode::Raw,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }
}
