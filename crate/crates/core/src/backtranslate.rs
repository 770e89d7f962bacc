//! The translator boundary used to back-translate target partials.
//!
//! No translation model ships with the crate. Translation is delegated to an
//! external line-in/line-out command, an HTTP service, or one of two
//! deterministic mocks. Batches that fail are recorded per item and never
//! abort the run.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{join_tokens, Joiner, Token};
use crate::tokenizer::{mark_delimiters, DelimiterSet, Tokenizer};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("nothing to translate")]
    EmptyInput,
    #[error("batch {batch:?}: cannot start translator command: {reason}")]
    ProcessSpawn { batch: Range<usize>, reason: String },
    #[error("batch {batch:?}: translator command exited with {status}: {stderr}")]
    ProcessExitNonZero {
        batch: Range<usize>,
        status: String,
        stderr: String,
    },
    #[error("batch {batch:?}: translator produced {found} lines for {expected} inputs")]
    LineCountMismatch {
        batch: Range<usize>,
        expected: usize,
        found: usize,
    },
    #[error("batch {batch:?}: translator timed out after {after:?}")]
    Timeout { batch: Range<usize>, after: Duration },
    #[error("batch {batch:?}: unreadable translator output: {reason}")]
    InvalidOutput { batch: Range<usize>, reason: String },
    #[error("batch {batch:?}: HTTP error: {reason}")]
    Http { batch: Range<usize>, reason: String },
    #[error("batch {batch:?}: expected {expected} translations, got {found}")]
    ShapeMismatch {
        batch: Range<usize>,
        expected: usize,
        found: usize,
    },
    #[error("item {index}: empty translation")]
    EmptyOutput { index: usize },
    #[error("invalid translator spec: {0}")]
    InvalidSpec(String),
    #[error("dictionary line {line}: {reason}")]
    Dictionary { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorKind {
    /// Shell command reading one sentence per line on stdin and writing one
    /// translation per line on stdout, in order.
    ExternalCommand { command: String },
    /// Endpoint accepting `{"texts": [...]}` and answering
    /// `{"translations": [...]}`.
    HttpService { url: String },
    /// Per-token lookup; unknown tokens pass through unchanged.
    MockDictionary { dictionary: BTreeMap<String, String> },
    MockIdentity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslatorSpec {
    pub kind: TranslatorKind,
    pub batch_size: usize,
    pub timeout: Duration,
    /// HTTP batches in flight at once.
    pub concurrency: usize,
    /// Retry a failed batch once.
    pub retry: bool,
}

impl TranslatorSpec {
    pub fn new(kind: TranslatorKind) -> Self {
        TranslatorSpec {
            kind,
            batch_size: 64,
            timeout: Duration::from_secs(60),
            concurrency: 4,
            retry: false,
        }
    }

    pub fn validate(&self) -> Result<(), TranslateError> {
        if self.batch_size == 0 {
            return Err(TranslateError::InvalidSpec("batch size must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(TranslateError::InvalidSpec("timeout must be positive".into()));
        }
        if self.concurrency == 0 {
            return Err(TranslateError::InvalidSpec("concurrency must be at least 1".into()));
        }
        Ok(())
    }
}

/// Command-line form of a translator choice:
/// `cmd:"..."`, `http:URL`, `mock-identity` or `mock-dict:FILE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslatorArg {
    Command(String),
    Http(String),
    MockIdentity,
    MockDict(PathBuf),
}

impl FromStr for TranslatorArg {
    type Err = TranslateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let nonempty = |v: &str, what: &str| {
            if v.is_empty() {
                Err(TranslateError::InvalidSpec(format!("{what} is empty")))
            } else {
                Ok(v.to_string())
            }
        };
        if s == "mock-identity" {
            Ok(TranslatorArg::MockIdentity)
        } else if let Some(path) = s.strip_prefix("mock-dict:") {
            Ok(TranslatorArg::MockDict(PathBuf::from(nonempty(path, "dictionary path")?)))
        } else if let Some(cmd) = s.strip_prefix("cmd:") {
            let cmd = cmd
                .strip_prefix('"')
                .and_then(|c| c.strip_suffix('"'))
                .unwrap_or(cmd);
            Ok(TranslatorArg::Command(nonempty(cmd, "command")?))
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Ok(TranslatorArg::Http(s.to_string()))
        } else if let Some(url) = s.strip_prefix("http:") {
            Ok(TranslatorArg::Http(nonempty(url, "URL")?))
        } else {
            Err(TranslateError::InvalidSpec(format!(
                "`{s}` (expected cmd:\"...\", http:URL, mock-identity or mock-dict:FILE)"
            )))
        }
    }
}

impl TranslatorArg {
    /// Resolves the argument, loading the dictionary file for `mock-dict`.
    pub fn into_kind(self) -> Result<TranslatorKind, TranslateError> {
        Ok(match self {
            TranslatorArg::Command(command) => TranslatorKind::ExternalCommand { command },
            TranslatorArg::Http(url) => TranslatorKind::HttpService { url },
            TranslatorArg::MockIdentity => TranslatorKind::MockIdentity,
            TranslatorArg::MockDict(path) => TranslatorKind::MockDictionary {
                dictionary: load_dictionary(&path)?,
            },
        })
    }
}

/// Parses `word<TAB>translation` lines (any whitespace separates the two
/// fields). Blank lines and `#` comments are skipped.
pub fn parse_dictionary(text: &str) -> Result<BTreeMap<String, String>, TranslateError> {
    let mut dictionary = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let [from, to] = fields[..] else {
            return Err(TranslateError::Dictionary {
                line: i + 1,
                reason: format!("expected 2 fields, found {}", fields.len()),
            });
        };
        if dictionary.insert(from.to_string(), to.to_string()).is_some() {
            return Err(TranslateError::Dictionary {
                line: i + 1,
                reason: format!("duplicate entry `{from}`"),
            });
        }
    }
    Ok(dictionary)
}

pub fn load_dictionary(path: &Path) -> Result<BTreeMap<String, String>, TranslateError> {
    let text = std::fs::read_to_string(path).map_err(|e| TranslateError::Dictionary {
        line: 0,
        reason: format!("{}: {e}", path.display()),
    })?;
    parse_dictionary(&text)
}

/// Conversions at the text boundary: target partials are joined into lines,
/// and translator output is tokenized as source-language text.
#[derive(Debug, Clone)]
pub struct TextCodec {
    pub target_joiner: Joiner,
    pub source_tokenizer: Tokenizer,
    pub source_delimiters: DelimiterSet,
}

impl Default for TextCodec {
    fn default() -> Self {
        TextCodec {
            target_joiner: Joiner::Space,
            source_tokenizer: Tokenizer::Pretokenized,
            source_delimiters: DelimiterSet::default(),
        }
    }
}

impl TextCodec {
    fn retokenize(&self, line: &str, index: usize) -> Result<Vec<Token>, TranslateError> {
        self.source_tokenizer
            .tokenize(line, &self.source_delimiters)
            .map_err(|_| TranslateError::EmptyOutput { index })
    }

    fn words_to_tokens(&self, words: Vec<String>, index: usize) -> Result<Vec<Token>, TranslateError> {
        if words.is_empty() {
            return Err(TranslateError::EmptyOutput { index });
        }
        Ok(mark_delimiters(words.into_iter().map(Token::new).collect(), &self.source_delimiters))
    }
}

/// Per-input outcome of a back-translation call. `outputs[i]` is `None`
/// exactly when `i` appears in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationBatchResult {
    pub outputs: Vec<Option<Vec<Token>>>,
    pub failures: Vec<(usize, TranslateError)>,
}

impl TranslationBatchResult {
    fn with_len(n: usize) -> Self {
        TranslationBatchResult {
            outputs: vec![None; n],
            failures: Vec::new(),
        }
    }

    pub fn succeeded(&self) -> usize {
        self.outputs.iter().filter(|o| o.is_some()).count()
    }
}

type ItemResult = Result<Vec<Token>, TranslateError>;

/// Back-translates every partial, in batches of `spec.batch_size`. Only an
/// empty input or an invalid spec is an error; translator failures are
/// reported per item.
pub fn backtranslate(
    partials: &[Vec<Token>],
    spec: &TranslatorSpec,
    codec: &TextCodec,
) -> Result<TranslationBatchResult, TranslateError> {
    if partials.is_empty() {
        return Err(TranslateError::EmptyInput);
    }
    spec.validate()?;
    let batches: Vec<Range<usize>> = (0..partials.len())
        .step_by(spec.batch_size)
        .map(|start| start..(start + spec.batch_size).min(partials.len()))
        .collect();

    let outcomes: Vec<Result<Vec<ItemResult>, TranslateError>> = match &spec.kind {
        TranslatorKind::HttpService { url } => {
            let mut outcomes = Vec::with_capacity(batches.len());
            for wave in batches.chunks(spec.concurrency) {
                let results: Vec<_> = thread::scope(|scope| {
                    let handles: Vec<_> = wave
                        .iter()
                        .map(|range| {
                            scope.spawn(|| {
                                with_retry(spec.retry, || {
                                    http_batch(url, &partials[range.clone()], range.clone(), spec.timeout, codec)
                                })
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("HTTP worker panicked")).collect()
                });
                outcomes.extend(results);
            }
            outcomes
        }
        kind => batches
            .iter()
            .map(|range| {
                with_retry(spec.retry, || {
                    local_batch(kind, &partials[range.clone()], range.clone(), spec.timeout, codec)
                })
            })
            .collect(),
    };

    let mut result = TranslationBatchResult::with_len(partials.len());
    for (range, outcome) in batches.into_iter().zip(outcomes) {
        match outcome {
            Ok(items) => {
                for (index, item) in range.zip(items) {
                    match item {
                        Ok(tokens) => result.outputs[index] = Some(tokens),
                        Err(e) => result.failures.push((index, e)),
                    }
                }
            }
            Err(e) => result.failures.extend(range.map(|i| (i, e.clone()))),
        }
    }
    Ok(result)
}

fn with_retry<T>(retry: bool, mut f: impl FnMut() -> Result<T, TranslateError>) -> Result<T, TranslateError> {
    match f() {
        Err(_) if retry => f(),
        other => other,
    }
}

fn local_batch(
    kind: &TranslatorKind,
    batch: &[Vec<Token>],
    range: Range<usize>,
    timeout: Duration,
    codec: &TextCodec,
) -> Result<Vec<ItemResult>, TranslateError> {
    let indexed = range.clone().zip(batch);
    match kind {
        TranslatorKind::MockIdentity => Ok(indexed
            .map(|(i, tokens)| codec.words_to_tokens(tokens.iter().map(|t| t.text.clone()).collect(), i))
            .collect()),
        TranslatorKind::MockDictionary { dictionary } => Ok(indexed
            .map(|(i, tokens)| {
                let words = tokens
                    .iter()
                    .map(|t| dictionary.get(&t.text).unwrap_or(&t.text).clone())
                    .collect();
                codec.words_to_tokens(words, i)
            })
            .collect()),
        TranslatorKind::ExternalCommand { command } => {
            let lines: Vec<String> = batch.iter().map(|t| join_tokens(t, codec.target_joiner)).collect();
            let outputs = run_command(command, &lines, range.clone(), timeout)?;
            Ok(range
                .zip(outputs)
                .map(|(i, line)| codec.retokenize(&line, i))
                .collect())
        }
        TranslatorKind::HttpService { .. } => unreachable!("HTTP batches run concurrently"),
    }
}

fn split_output_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    text.strip_suffix('\n')
        .unwrap_or(text)
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

fn run_command(
    command: &str,
    lines: &[String],
    batch: Range<usize>,
    timeout: Duration,
) -> Result<Vec<String>, TranslateError> {
    let deadline = Instant::now() + timeout;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| TranslateError::ProcessSpawn {
            batch: batch.clone(),
            reason: e.to_string(),
        })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input: String = lines.iter().map(|l| format!("{l}\n")).collect();
    let writer = thread::spawn(move || {
        // A child that exits early closes the pipe; its output decides the result.
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = Vec::new();
        let read = stdout.read_to_end(&mut buf).map(|_| buf);
        let _ = tx.send(read);
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let stderr_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let timed_out = |child: &mut std::process::Child| {
        let _ = child.kill();
        let _ = child.wait();
        TranslateError::Timeout {
            batch: batch.clone(),
            after: timeout,
        }
    };
    let remaining = deadline.saturating_duration_since(Instant::now());
    let output = match rx.recv_timeout(remaining) {
        Ok(Ok(bytes)) => bytes,
        Ok(Err(e)) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(TranslateError::InvalidOutput {
                batch,
                reason: e.to_string(),
            });
        }
        Err(_) => return Err(timed_out(&mut child)),
    };
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => return Err(timed_out(&mut child)),
            Ok(None) => thread::sleep(Duration::from_millis(2)),
            Err(e) => {
                return Err(TranslateError::ProcessSpawn {
                    batch,
                    reason: e.to_string(),
                })
            }
        }
    };
    let _ = writer.join();
    let stderr = stderr_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(TranslateError::ProcessExitNonZero {
            batch,
            status: status.to_string(),
            stderr: stderr.chars().take(500).collect(),
        });
    }
    let text = String::from_utf8(output).map_err(|e| TranslateError::InvalidOutput {
        batch: batch.clone(),
        reason: e.to_string(),
    })?;
    let out_lines = split_output_lines(&text);
    if out_lines.len() != lines.len() {
        return Err(TranslateError::LineCountMismatch {
            batch,
            expected: lines.len(),
            found: out_lines.len(),
        });
    }
    Ok(out_lines)
}

#[derive(Debug, Serialize)]
pub struct HttpRequest<'a> {
    pub texts: &'a [String],
}

#[derive(Debug, Deserialize)]
pub struct HttpResponse {
    pub translations: Vec<String>,
}

/// Decodes a service response body, checking it has one translation per
/// request text.
pub fn decode_http_response(body: &str, expected: usize, batch: Range<usize>) -> Result<Vec<String>, TranslateError> {
    let response: HttpResponse = serde_json::from_str(body).map_err(|e| TranslateError::Http {
        batch: batch.clone(),
        reason: format!("bad response body: {e}"),
    })?;
    if response.translations.len() != expected {
        return Err(TranslateError::ShapeMismatch {
            batch,
            expected,
            found: response.translations.len(),
        });
    }
    Ok(response.translations)
}

fn http_batch(
    url: &str,
    batch: &[Vec<Token>],
    range: Range<usize>,
    timeout: Duration,
    codec: &TextCodec,
) -> Result<Vec<ItemResult>, TranslateError> {
    let texts: Vec<String> = batch.iter().map(|t| join_tokens(t, codec.target_joiner)).collect();
    let http_err = |reason: String| TranslateError::Http {
        batch: range.clone(),
        reason,
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent
        .post(url)
        .send_json(&HttpRequest { texts: &texts })
        .map_err(|e| http_err(e.to_string()))?;
    let status = response.status();
    if status != 200 {
        return Err(http_err(format!("status {status}")));
    }
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| http_err(e.to_string()))?;
    let translations = decode_http_response(&body, texts.len(), range.clone())?;
    Ok(range
        .zip(translations)
        .map(|(i, line)| codec.retokenize(&line, i))
        .collect())
}

/// Translator with an exact-match cache: identical partials across the
/// corpus are sent once.
#[derive(Debug)]
pub struct Backtranslator {
    spec: TranslatorSpec,
    codec: TextCodec,
    cache: Option<HashMap<Vec<String>, Vec<Token>>>,
    requested: usize,
    items: usize,
    failures: usize,
    first_failure: Option<TranslateError>,
}

impl Backtranslator {
    pub fn new(spec: TranslatorSpec, codec: TextCodec, use_cache: bool) -> Self {
        Backtranslator {
            spec,
            codec,
            cache: use_cache.then(HashMap::new),
            requested: 0,
            items: 0,
            failures: 0,
            first_failure: None,
        }
    }

    pub fn spec(&self) -> &TranslatorSpec {
        &self.spec
    }

    /// Number of partials handed to the underlying translator so far.
    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Cached back-translation of a target partial, if any.
    pub fn lookup(&self, key: &[Token]) -> Option<&[Token]> {
        let key: Vec<String> = key.iter().map(|t| t.text.clone()).collect();
        self.cache.as_ref()?.get(&key).map(Vec::as_slice)
    }

    /// True when at least one item was requested and none succeeded.
    pub fn all_failed(&self) -> bool {
        self.items > 0 && self.failures == self.items
    }

    /// The first per-item failure seen, if any.
    pub fn first_failure(&self) -> Option<&TranslateError> {
        self.first_failure.as_ref()
    }

    pub fn translate(&mut self, partials: &[Vec<Token>]) -> TranslationBatchResult {
        let result = self.translate_inner(partials);
        self.items += partials.len();
        self.failures += result.failures.len();
        if self.first_failure.is_none() {
            self.first_failure = result.failures.first().map(|(_, e)| e.clone());
        }
        result
    }

    fn translate_inner(&mut self, partials: &[Vec<Token>]) -> TranslationBatchResult {
        let mut result = TranslationBatchResult::with_len(partials.len());
        if partials.is_empty() {
            return result;
        }
        let Some(cache) = self.cache.as_mut() else {
            self.requested += partials.len();
            return backtranslate(partials, &self.spec, &self.codec).expect("non-empty input, validated spec");
        };

        let keys: Vec<Vec<String>> = partials
            .iter()
            .map(|p| p.iter().map(|t| t.text.clone()).collect())
            .collect();
        // First occurrence of every uncached key, in input order.
        let mut pending: Vec<usize> = Vec::new();
        let mut slot: HashMap<&[String], usize> = HashMap::new();
        for (i, key) in keys.iter().enumerate() {
            if !cache.contains_key(key) && !slot.contains_key(key.as_slice()) {
                slot.insert(key, pending.len());
                pending.push(i);
            }
        }
        let mut fresh_failures: HashMap<usize, TranslateError> = HashMap::new();
        if !pending.is_empty() {
            let inputs: Vec<Vec<Token>> = pending.iter().map(|&i| partials[i].clone()).collect();
            self.requested += inputs.len();
            let fresh = backtranslate(&inputs, &self.spec, &self.codec).expect("non-empty input, validated spec");
            for (k, output) in fresh.outputs.into_iter().enumerate() {
                if let Some(tokens) = output {
                    cache.insert(keys[pending[k]].clone(), tokens);
                }
            }
            for (k, e) in fresh.failures {
                fresh_failures.insert(k, e);
            }
        }
        for (i, key) in keys.iter().enumerate() {
            match cache.get(key) {
                Some(tokens) => result.outputs[i] = Some(tokens.clone()),
                None => {
                    let k = slot[key.as_slice()];
                    let reason = fresh_failures
                        .get(&k)
                        .cloned()
                        .map(|e| reindex(e, i))
                        .unwrap_or(TranslateError::EmptyOutput { index: i });
                    result.failures.push((i, reason));
                }
            }
        }
        result
    }
}

/// Per-item errors carry the index they were raised for; point them at the
/// caller's index instead of the deduplicated one.
fn reindex(e: TranslateError, to: usize) -> TranslateError {
    match e {
        TranslateError::EmptyOutput { .. } => TranslateError::EmptyOutput { index: to },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<Token> {
        words.iter().map(|w| Token::new(*w)).collect()
    }

    fn texts(result: &TranslationBatchResult) -> Vec<Option<Vec<String>>> {
        result
            .outputs
            .iter()
            .map(|o| o.as_ref().map(|t| t.iter().map(|t| t.text.clone()).collect()))
            .collect()
    }

    fn owned(words: &[&str]) -> Option<Vec<String>> {
        Some(words.iter().map(|w| w.to_string()).collect())
    }

    #[test]
    fn identity_mock() {
        let spec = TranslatorSpec::new(TranslatorKind::MockIdentity);
        let r = backtranslate(&[toks(&["x", "y"])], &spec, &TextCodec::default()).unwrap();
        assert_eq!(texts(&r), vec![owned(&["x", "y"])]);
        assert!(r.failures.is_empty());
    }

    #[test]
    fn dictionary_mock() {
        let dictionary = parse_dictionary("x\ta\ny b\n").unwrap();
        let spec = TranslatorSpec::new(TranslatorKind::MockDictionary { dictionary });
        let r = backtranslate(&[toks(&["x", "y"]), toks(&["x", "q"])], &spec, &TextCodec::default()).unwrap();
        assert_eq!(texts(&r), vec![owned(&["a", "b"]), owned(&["a", "q"])]);
    }

    #[test]
    fn mock_output_is_marked_with_source_delimiters() {
        let spec = TranslatorSpec::new(TranslatorKind::MockIdentity);
        let r = backtranslate(&[toks(&["a", "，", "b"])], &spec, &TextCodec::default()).unwrap();
        let out = r.outputs[0].as_ref().unwrap();
        assert!(out[1].is_delimiter);
    }

    #[test]
    fn empty_input_and_bad_spec() {
        let spec = TranslatorSpec::new(TranslatorKind::MockIdentity);
        assert_eq!(backtranslate(&[], &spec, &TextCodec::default()), Err(TranslateError::EmptyInput));
        let spec = TranslatorSpec {
            batch_size: 0,
            ..spec
        };
        assert!(matches!(
            backtranslate(&[toks(&["a"])], &spec, &TextCodec::default()),
            Err(TranslateError::InvalidSpec(_))
        ));
    }

    #[test]
    fn parse_translator_args() {
        assert_eq!("mock-identity".parse::<TranslatorArg>().unwrap(), TranslatorArg::MockIdentity);
        assert_eq!(
            "cmd:\"sed s/a/b/\"".parse::<TranslatorArg>().unwrap(),
            TranslatorArg::Command("sed s/a/b/".into())
        );
        assert_eq!("cmd:cat".parse::<TranslatorArg>().unwrap(), TranslatorArg::Command("cat".into()));
        assert_eq!(
            "http:http://localhost:8080/t".parse::<TranslatorArg>().unwrap(),
            TranslatorArg::Http("http://localhost:8080/t".into())
        );
        assert_eq!(
            "http://h/x".parse::<TranslatorArg>().unwrap(),
            TranslatorArg::Http("http://h/x".into())
        );
        assert_eq!(
            "mock-dict:d.tsv".parse::<TranslatorArg>().unwrap(),
            TranslatorArg::MockDict("d.tsv".into())
        );
        for bad in ["", "cmd:", "mock-dict:", "ftp://x", "mock"] {
            assert!(bad.parse::<TranslatorArg>().is_err(), "{bad}");
        }
    }

    #[test]
    fn dictionary_errors() {
        assert!(parse_dictionary("a b c\n").is_err());
        assert!(parse_dictionary("a b\na c\n").is_err());
        assert_eq!(parse_dictionary("# c\n\na b\n").unwrap().len(), 1);
    }

    #[test]
    fn http_response_shape() {
        assert_eq!(
            decode_http_response(r#"{"translations":["a","b"]}"#, 2, 0..2).unwrap(),
            vec!["a".to_string(), "b".to_string()]
        );
        assert!(matches!(
            decode_http_response(r#"{"translations":["a"]}"#, 2, 4..6),
            Err(TranslateError::ShapeMismatch { batch, expected: 2, found: 1 }) if batch == (4..6)
        ));
        assert!(matches!(decode_http_response("nope", 1, 0..1), Err(TranslateError::Http { .. })));
    }

    #[test]
    fn cache_translates_duplicates_once() {
        let spec = TranslatorSpec::new(TranslatorKind::MockIdentity);
        let mut bt = Backtranslator::new(spec.clone(), TextCodec::default(), true);
        let r = bt.translate(&[toks(&["x"]), toks(&["x"])]);
        assert_eq!(r.succeeded(), 2);
        assert_eq!(bt.requested(), 1);
        assert_eq!(bt.lookup(&toks(&["x"])).map(|t| t.len()), Some(1));
        assert!(bt.lookup(&toks(&["y"])).is_none());

        bt.translate(&[toks(&["y"]), toks(&["z"])]);
        assert_eq!(bt.requested(), 3);

        let mut uncached = Backtranslator::new(spec, TextCodec::default(), false);
        uncached.translate(&[toks(&["x"]), toks(&["x"])]);
        assert_eq!(uncached.requested(), 2);
        assert!(uncached.lookup(&toks(&["x"])).is_none());
    }

    #[test]
    fn cat_echoes_lines() {
        let spec = TranslatorSpec {
            batch_size: 2,
            ..TranslatorSpec::new(TranslatorKind::ExternalCommand { command: "cat".into() })
        };
        let inputs = vec![toks(&["a", "b"]), toks(&["c"]), toks(&["d", "e", "f"])];
        let r = backtranslate(&inputs, &spec, &TextCodec::default()).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(texts(&r), vec![owned(&["a", "b"]), owned(&["c"]), owned(&["d", "e", "f"])]);
    }

    #[test]
    fn command_failures_are_per_batch() {
        let codec = TextCodec::default();
        let inputs = vec![toks(&["a"]), toks(&["b"]), toks(&["c"])];
        let run = |command: &str| {
            let spec = TranslatorSpec {
                batch_size: 2,
                timeout: Duration::from_secs(5),
                ..TranslatorSpec::new(TranslatorKind::ExternalCommand { command: command.into() })
            };
            backtranslate(&inputs, &spec, &codec).unwrap()
        };

        let r = run("exit 3");
        assert_eq!(r.failures.len(), 3);
        assert!(matches!(&r.failures[0].1, TranslateError::ProcessExitNonZero { batch, .. } if *batch == (0..2)));
        assert!(matches!(&r.failures[2].1, TranslateError::ProcessExitNonZero { batch, .. } if *batch == (2..3)));

        let r = run("head -n 1");
        assert!(matches!(
            &r.failures[0].1,
            TranslateError::LineCountMismatch { expected: 2, found: 1, .. }
        ));
        // The last batch has one line, so `head -n 1` echoes it correctly.
        assert_eq!(texts(&r)[2], owned(&["c"]));

        let r = run("sed 's/b//'");
        assert_eq!(r.failures, vec![(1, TranslateError::EmptyOutput { index: 1 })]);
    }

    #[test]
    fn command_timeout() {
        let spec = TranslatorSpec {
            timeout: Duration::from_millis(200),
            ..TranslatorSpec::new(TranslatorKind::ExternalCommand {
                command: "sleep 5".into(),
            })
        };
        let start = Instant::now();
        let r = backtranslate(&[toks(&["a"])], &spec, &TextCodec::default()).unwrap();
        assert!(matches!(r.failures[0].1, TranslateError::Timeout { .. }));
        assert!(start.elapsed() < Duration::from_secs(4));
    }

    #[test]
    fn missing_command_is_reported() {
        let spec = TranslatorSpec::new(TranslatorKind::ExternalCommand {
            command: "/definitely/not/here".into(),
        });
        let r = backtranslate(&[toks(&["a"])], &spec, &TextCodec::default()).unwrap();
        assert!(matches!(r.failures[0].1, TranslateError::ProcessExitNonZero { .. }));
    }
}
