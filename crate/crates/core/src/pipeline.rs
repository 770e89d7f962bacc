//! End-to-end orchestration: read, tokenize, align, extract, back-translate,
//! generate and write, with every failure tagged by the stage it came from.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{
    read_pharaoh_file, write_pharaoh_file, BidirectionalModel, Heuristic, PharaohError, TableError, TrainError,
    WordAlignment,
};
use crate::augment::{export_partials, extract_corpus, run_mode_with, AugmentConfig, AugmentError, AugmentationMode};
use crate::backtranslate::{Backtranslator, TextCodec, TranslateError, TranslatorKind, TranslatorSpec};
use crate::corpus::{read_parallel, read_tsv, write_parallel, Corpus, CorpusError, Joiner, Lang, LineMode, SideName};
use crate::report::{corpus_stats_with, AugmentationReport};
use crate::segment::{RateDenominator, SegmentError};
use crate::tokenizer::{DelimiterSet, TokenizeError, Tokenizer};

/// Environment variable bounding the worker pool size.
pub const THREADS_ENV: &str = "SEGAUG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Read,
    Tokenize,
    Align,
    Extract,
    Backtranslate,
    Generate,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Read => "read",
            Stage::Tokenize => "tokenize",
            Stage::Align => "align",
            Stage::Extract => "extract",
            Stage::Backtranslate => "backtranslate",
            Stage::Generate => "generate",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum ErrorKind {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{side} line {line}: {source}")]
    Tokenize {
        side: SideName,
        line: usize,
        #[source]
        source: TokenizeError,
    },
    #[error(transparent)]
    Pharaoh(#[from] PharaohError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
#[error("{stage}: {kind}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub kind: ErrorKind,
}

impl PipelineError {
    pub fn new(stage: Stage, kind: impl Into<ErrorKind>) -> Self {
        PipelineError {
            stage,
            kind: kind.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        PipelineError::new(Stage::Config, ErrorKind::Config(msg.into()))
    }

    /// 2 configuration, 3 input/output, 4 translator, 5 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match &self.kind {
            ErrorKind::Config(_) => 2,
            ErrorKind::Corpus(CorpusError::SameLanguage(_)) => 2,
            ErrorKind::Train(TrainError::ZeroIterations) => 2,
            ErrorKind::Translate(TranslateError::InvalidSpec(_)) => 2,
            ErrorKind::Translate(TranslateError::Dictionary { .. }) => 2,
            ErrorKind::Translate(_) => 4,
            ErrorKind::Augment(AugmentError::InvariantViolation(_) | AugmentError::SpanMismatch { .. }) => 5,
            ErrorKind::Augment(AugmentError::Segment {
                source: SegmentError::InvalidTheta(_) | SegmentError::InvalidMinSegments(_),
                ..
            }) => 2,
            _ => 3,
        }
    }
}

fn at<E: Into<ErrorKind>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::new(stage, e)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputFiles {
    Parallel { source: PathBuf, target: PathBuf },
    Tsv(PathBuf),
}

#[derive(Debug, Clone)]
pub struct InputConfig {
    pub files: InputFiles,
    pub source_lang: Lang,
    pub target_lang: Lang,
    pub source_tokenizer: Tokenizer,
    pub target_tokenizer: Tokenizer,
    pub source_joiner: Joiner,
    pub target_joiner: Joiner,
    pub delimiters: DelimiterSet,
}

impl InputConfig {
    pub fn parallel(source: impl Into<PathBuf>, target: impl Into<PathBuf>) -> Self {
        InputConfig {
            files: InputFiles::Parallel {
                source: source.into(),
                target: target.into(),
            },
            source_lang: Lang::new("src"),
            target_lang: Lang::new("tgt"),
            source_tokenizer: Tokenizer::default(),
            target_tokenizer: Tokenizer::default(),
            source_joiner: Joiner::Space,
            target_joiner: Joiner::Space,
            delimiters: DelimiterSet::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlignmentSource {
    Pharaoh(PathBuf),
    Train { iterations: usize, heuristic: Heuristic },
}

impl Default for AlignmentSource {
    fn default() -> Self {
        AlignmentSource::Train {
            iterations: 5,
            heuristic: Heuristic::GrowDiagFinal,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub alignment: AlignmentSource,
    pub augment: AugmentConfig,
    pub modes: Vec<AugmentationMode>,
    /// Needed by every mode except `baseline` and `partial`.
    pub translator: Option<TranslatorSpec>,
    pub use_cache: bool,
    /// Output files are `{out_prefix}{mode}.{lang}`; a `.` is inserted when
    /// the prefix is a file stem rather than a directory.
    pub out_prefix: String,
    pub report: Option<PathBuf>,
    /// Directory receiving alignments, tables and extracted partials.
    pub intermediates: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(input: InputConfig, out_prefix: impl Into<String>) -> Self {
        PipelineConfig {
            input,
            alignment: AlignmentSource::default(),
            augment: AugmentConfig::default(),
            modes: vec![AugmentationMode::Proposed],
            translator: None,
            use_cache: true,
            out_prefix: out_prefix.into(),
            report: None,
            intermediates: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.modes.is_empty() {
            return Err(PipelineError::config("no augmentation mode requested"));
        }
        self.augment
            .segmenter
            .validate()
            .map_err(|e| PipelineError::config(e.to_string()))?;
        let needs_translator = self.modes.iter().any(|m| {
            matches!(
                m,
                AugmentationMode::Copied | AugmentationMode::BackTranslation | AugmentationMode::Proposed
            )
        });
        match &self.translator {
            Some(spec) => spec.validate().map_err(at(Stage::Config))?,
            None if needs_translator => {
                return Err(PipelineError::config("the requested modes need a translator"));
            }
            None => {}
        }
        if let AlignmentSource::Train { iterations: 0, .. } = self.alignment {
            return Err(PipelineError::new(Stage::Config, TrainError::ZeroIterations));
        }
        if self.out_prefix.is_empty() {
            return Err(PipelineError::config("output prefix is empty"));
        }
        Ok(())
    }

    pub fn output_paths(&self, mode: AugmentationMode) -> (PathBuf, PathBuf) {
        output_paths(&self.out_prefix, mode, &self.input.source_lang, &self.input.target_lang)
    }
}

pub fn output_paths(prefix: &str, mode: AugmentationMode, source: &Lang, target: &Lang) -> (PathBuf, PathBuf) {
    let stem = if prefix.ends_with('/') || prefix.ends_with(std::path::MAIN_SEPARATOR) {
        format!("{prefix}{mode}")
    } else {
        format!("{prefix}.{mode}")
    };
    (
        PathBuf::from(format!("{stem}.{source}")),
        PathBuf::from(format!("{stem}.{target}")),
    )
}

/// Reads the corpus and tokenizes both sides.
pub fn load_corpus(input: &InputConfig) -> Result<Corpus, PipelineError> {
    let raw = match &input.files {
        InputFiles::Parallel { source, target } => read_parallel(
            source,
            target,
            &input.source_lang,
            &input.target_lang,
            LineMode::Raw,
        ),
        InputFiles::Tsv(path) => read_tsv(path, &input.source_lang, &input.target_lang, LineMode::Raw),
    }
    .map_err(at(Stage::Read))?;
    if raw.is_empty() {
        return Err(PipelineError::new(Stage::Read, CorpusError::EmptyCorpus));
    }

    let tokenize = |line: usize, side: SideName, text: &str, tokenizer: Tokenizer| {
        tokenizer
            .tokenize(text, &input.delimiters)
            .map_err(|source| PipelineError::new(Stage::Tokenize, ErrorKind::Tokenize { side, line, source }))
    };
    let mut corpus = raw;
    corpus.pairs.par_iter_mut().try_for_each(|pair| {
        // Raw mode leaves exactly one token per side holding the whole line.
        let line = pair.id + 1;
        pair.source.tokens = tokenize(line, SideName::Source, &pair.source.tokens[0].text, input.source_tokenizer)?;
        pair.target.tokens = tokenize(line, SideName::Target, &pair.target.tokens[0].text, input.target_tokenizer)?;
        Ok(())
    })?;
    Ok(corpus)
}

/// Ingests or trains word alignments, one per pair. Training writes both
/// translation tables into `intermediates` when given.
pub fn obtain_alignments(
    corpus: &Corpus,
    source: &AlignmentSource,
    intermediates: Option<&Path>,
) -> Result<Vec<WordAlignment>, PipelineError> {
    match source {
        AlignmentSource::Pharaoh(path) => read_pharaoh_file(path, Some(corpus.len())).map_err(at(Stage::Align)),
        AlignmentSource::Train { iterations, heuristic } => {
            let model = BidirectionalModel::train(corpus, *iterations).map_err(at(Stage::Align))?;
            if let Some(dir) = intermediates {
                model
                    .forward
                    .write_tsv(&dir.join("model1.tgt-given-src.tsv"))
                    .map_err(at(Stage::Write))?;
                model
                    .reverse
                    .write_tsv(&dir.join("model1.src-given-tgt.tsv"))
                    .map_err(at(Stage::Write))?;
            }
            Ok(model.align_corpus(corpus, *heuristic))
        }
    }
}

/// Report file contents: statistics of the input and one entry per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input: AugmentationReport,
    pub runs: Vec<AugmentationReport>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    let io = |source| PipelineError::new(Stage::Write, ErrorKind::Io { path: path.into(), source });
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// Runs the whole pipeline inside a pool sized by `SEGAUG_THREADS` when set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    match threads_from_env()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::config(format!("cannot build thread pool: {e}")))?
            .install(|| run_stages(cfg)),
        None => run_stages(cfg),
    }
}

pub fn threads_from_env() -> Result<Option<usize>, PipelineError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(PipelineError::config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn run_stages(cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    cfg.validate()?;
    let corpus = load_corpus(&cfg.input)?;
    let intermediates = cfg.intermediates.as_deref();
    if let Some(dir) = intermediates {
        fs::create_dir_all(dir).map_err(|source| {
            PipelineError::new(Stage::Write, ErrorKind::Io {
                path: dir.into(),
                source,
            })
        })?;
    }
    let alignments = obtain_alignments(&corpus, &cfg.alignment, intermediates)?;
    let extraction = extract_corpus(&corpus, &alignments, &cfg.augment.segmenter).map_err(at(Stage::Extract))?;
    if let Some(dir) = intermediates {
        write_pharaoh_file(&dir.join("alignments.pharaoh"), &alignments).map_err(at(Stage::Write))?;
        export_partials(
            &extraction.partials,
            &dir.join(format!("partials.{}", cfg.input.source_lang)),
            &dir.join(format!("partials.{}", cfg.input.target_lang)),
            &dir.join("partials.tsv"),
            cfg.input.source_joiner,
            cfg.input.target_joiner,
        )
        .map_err(at(Stage::Write))?;
    }

    let codec = TextCodec {
        target_joiner: cfg.input.target_joiner,
        source_tokenizer: cfg.input.source_tokenizer,
        source_delimiters: cfg.input.delimiters.clone(),
    };
    // Modes that never translate get a placeholder that is never called.
    let spec = cfg
        .translator
        .clone()
        .unwrap_or_else(|| TranslatorSpec::new(TranslatorKind::MockIdentity));
    let mut translator = Backtranslator::new(spec, codec, cfg.use_cache);

    let mut runs = Vec::with_capacity(cfg.modes.len());
    for &mode in &cfg.modes {
        let (output, report) =
            run_mode_with(&corpus, &extraction, mode, &cfg.augment, &mut translator).map_err(|e| {
                let stage = match e {
                    AugmentError::InvariantViolation(_) | AugmentError::SpanMismatch { .. } => Stage::Generate,
                    _ => Stage::Extract,
                };
                PipelineError::new(stage, e)
            })?;
        if translator.all_failed() {
            let cause = translator
                .first_failure()
                .cloned()
                .unwrap_or(TranslateError::EmptyInput);
            return Err(PipelineError::new(Stage::Backtranslate, cause));
        }
        let (src_path, tgt_path) = cfg.output_paths(mode);
        write_parallel(
            &output,
            &src_path,
            &tgt_path,
            cfg.input.source_joiner,
            cfg.input.target_joiner,
        )
        .map_err(at(Stage::Write))?;
        runs.push(report);
    }

    let report = PipelineReport {
        input: corpus_stats_with(&corpus, &cfg.augment.segmenter),
        runs,
    };
    if let Some(path) = &cfg.report {
        write_file(path, &(report.to_json() + "\n"))?;
    }
    Ok(report)
}

/// Optional TOML configuration. Every key mirrors a command-line flag;
/// flags given on the command line win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub src_lang: Option<String>,
    pub tgt_lang: Option<String>,
    pub src_tokenizer: Option<String>,
    pub tgt_tokenizer: Option<String>,
    pub src_joiner: Option<String>,
    pub tgt_joiner: Option<String>,
    /// Delimiters as literal strings or `U+XXXX` code points.
    pub delims: Option<Vec<String>>,
    pub theta: Option<f64>,
    pub min_segments: Option<usize>,
    pub rate_denominator: Option<String>,
    pub iters: Option<usize>,
    pub heuristic: Option<String>,
    pub translator: Option<String>,
    pub batch_size: Option<usize>,
    /// Seconds.
    pub timeout: Option<f64>,
    pub concurrency: Option<usize>,
    pub retry: Option<bool>,
    pub no_cache: Option<bool>,
    pub keep_duplicates: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| {
            PipelineError::new(Stage::Config, ErrorKind::Io {
                path: path.into(),
                source,
            })
        })?;
        Self::parse(&text)
    }

    pub fn delimiter_set(&self) -> Result<Option<DelimiterSet>, PipelineError> {
        let Some(items) = &self.delims else { return Ok(None) };
        items
            .iter()
            .map(|item| DelimiterSet::parse_item(item))
            .collect::<Result<Vec<_>, _>>()
            .and_then(DelimiterSet::new)
            .map(Some)
            .map_err(|e| PipelineError::config(format!("config file delims: {e}")))
    }

    pub fn rate_denominator(&self) -> Result<Option<RateDenominator>, PipelineError> {
        parse_opt(&self.rate_denominator)
    }

    pub fn timeout(&self) -> Result<Option<Duration>, PipelineError> {
        self.timeout
            .map(|s| Duration::try_from_secs_f64(s).map_err(|e| PipelineError::config(format!("timeout: {e}"))))
            .transpose()
    }
}

/// Parses an optional string field with the type's `FromStr`.
pub fn parse_opt<T>(value: &Option<String>) -> Result<Option<T>, PipelineError>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value
        .as_deref()
        .map(|v| v.parse::<T>().map_err(|e| PipelineError::config(e.to_string())))
        .transpose()
}
