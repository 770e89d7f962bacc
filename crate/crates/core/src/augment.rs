//! Pseudo-parallel pair generation and the augmentation modes.
//!
//! All modes keep the original pairs first, in input order, and append the
//! pairs they generate in `(origin id, segment group)` order.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::WordAlignment;
use crate::backtranslate::Backtranslator;
use crate::corpus::{join_tokens, Corpus, CorpusError, Joiner, ParallelPair, Provenance, Sentence, Token};
use crate::report::{corpus_stats_with, AugmentationReport, PairAccount};
use crate::segment::{
    extract_partials, strip_delimiters, strip_trailing_delimiters, PartialPair, SegmentError, SegmenterConfig,
};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("partial {group:?} of pair {partial_pair} does not belong to pair {pair_id}")]
    SpanMismatch {
        pair_id: usize,
        partial_pair: usize,
        group: Range<usize>,
    },
    #[error("back-translated partial is empty")]
    EmptyBacktranslation,
    #[error("{found} alignments for {expected} sentence pairs")]
    AlignmentCount { expected: usize, found: usize },
    #[error("pair {pair_id}: {source}")]
    Segment {
        pair_id: usize,
        #[source]
        source: SegmentError,
    },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// The five corpus configurations compared in the augmentation experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentationMode {
    /// The original corpus.
    Baseline,
    /// Originals plus verbatim duplicates, sized to match `Proposed`.
    Copied,
    /// Originals plus the extracted partial pairs as standalone pairs.
    Partial,
    /// Originals plus back-translated full sentences of the long pairs.
    #[serde(rename = "backtrans")]
    BackTranslation,
    /// Originals plus pseudo pairs built by partial substitution.
    Proposed,
}

impl AugmentationMode {
    pub const ALL: [AugmentationMode; 5] = [
        AugmentationMode::Baseline,
        AugmentationMode::Copied,
        AugmentationMode::Partial,
        AugmentationMode::BackTranslation,
        AugmentationMode::Proposed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentationMode::Baseline => "baseline",
            AugmentationMode::Copied => "copied",
            AugmentationMode::Partial => "partial",
            AugmentationMode::BackTranslation => "backtrans",
            AugmentationMode::Proposed => "proposed",
        }
    }
}

impl fmt::Display for AugmentationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(AugmentationMode::Baseline),
            "copied" => Ok(AugmentationMode::Copied),
            "partial" => Ok(AugmentationMode::Partial),
            "backtrans" | "back-translation" => Ok(AugmentationMode::BackTranslation),
            "proposed" => Ok(AugmentationMode::Proposed),
            other => Err(format!(
                "unknown mode `{other}` (expected baseline|copied|partial|backtrans|proposed)"
            )),
        }
    }
}

/// A pair whose source has one partial replaced by its back-translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoPair {
    pub origin_id: usize,
    pub replaced_group: PartialPair,
    pub source: Sentence,
    pub target: Sentence,
}

impl PseudoPair {
    pub fn into_pair(self, id: usize) -> ParallelPair {
        ParallelPair {
            id,
            source: self.source,
            target: self.target,
            provenance: Provenance::Pseudo,
        }
    }
}

fn belongs_to(pair: &ParallelPair, partial: &PartialPair) -> bool {
    partial.pair_id == pair.id
        && partial.source_span.end <= pair.source.len()
        && partial.target_span.end <= pair.target.len()
        && pair.source.tokens[partial.source_span.clone()] == partial.source_tokens[..]
        && pair.target.tokens[partial.target_span.clone()] == partial.target_tokens[..]
}

/// Replaces the partial's source tokens, minus any trailing delimiters,
/// with `bt_source`. The target is copied unchanged.
pub fn make_pseudo(pair: &ParallelPair, partial: &PartialPair, bt_source: &[Token]) -> Result<PseudoPair, AugmentError> {
    if !belongs_to(pair, partial) {
        return Err(AugmentError::SpanMismatch {
            pair_id: pair.id,
            partial_pair: partial.pair_id,
            group: partial.source_group.clone(),
        });
    }
    if bt_source.is_empty() {
        return Err(AugmentError::EmptyBacktranslation);
    }
    let span = &partial.source_span;
    let content_end = span.start + strip_trailing_delimiters(&pair.source.tokens[span.clone()]).len();
    let tokens = &pair.source.tokens;
    let mut source = Vec::with_capacity(tokens.len() + bt_source.len());
    source.extend_from_slice(&tokens[..span.start]);
    source.extend_from_slice(bt_source);
    source.extend_from_slice(&tokens[content_end..]);
    Ok(PseudoPair {
        origin_id: pair.id,
        replaced_group: partial.clone(),
        source: Sentence::new(source, pair.source.lang.clone()),
        target: pair.target.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AugmentConfig {
    pub segmenter: SegmenterConfig,
    /// Keep pseudo pairs identical to a pair already in the corpus.
    pub keep_duplicates: bool,
    /// Include one [`PairAccount`] per original pair in reports.
    pub per_pair: bool,
}

/// Partial pairs of every corpus pair, in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub partials: Vec<Vec<PartialPair>>,
    pub long_pairs: usize,
}

impl Extraction {
    pub fn total(&self) -> usize {
        self.partials.iter().map(Vec::len).sum()
    }
}

pub fn extract_corpus(
    corpus: &Corpus,
    alignments: &[WordAlignment],
    cfg: &SegmenterConfig,
) -> Result<Extraction, AugmentError> {
    if alignments.len() != corpus.len() {
        return Err(AugmentError::AlignmentCount {
            expected: corpus.len(),
            found: alignments.len(),
        });
    }
    let partials = corpus
        .pairs
        .par_iter()
        .zip(alignments.par_iter())
        .map(|(pair, wa)| {
            extract_partials(pair, wa, cfg).map_err(|source| AugmentError::Segment {
                pair_id: pair.id,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let long_pairs = corpus.pairs.iter().filter(|p| cfg.is_long_pair(p)).count();
    Ok(Extraction { partials, long_pairs })
}

type TextKey = (Vec<String>, Vec<String>);

fn text_key(source: &[Token], target: &[Token]) -> TextKey {
    (
        source.iter().map(|t| t.text.clone()).collect(),
        target.iter().map(|t| t.text.clone()).collect(),
    )
}

/// Pairs a mode adds on top of the originals, with its accounting.
struct Generated {
    pairs: Vec<(usize, Vec<Token>, Vec<Token>)>,
    provenance: Provenance,
    accounts: Vec<PairAccount>,
    attempts: usize,
    emitted: usize,
    duplicates: usize,
    failures: usize,
    pairs_backtranslated: usize,
    partials_backtranslated: usize,
}

impl Generated {
    fn new(corpus: &Corpus, extraction: &Extraction, provenance: Provenance) -> Self {
        Generated {
            pairs: Vec::new(),
            provenance,
            accounts: corpus
                .pairs
                .iter()
                .zip(&extraction.partials)
                .map(|(p, parts)| PairAccount {
                    id: p.id,
                    partials: parts.len(),
                    ..Default::default()
                })
                .collect(),
            attempts: 0,
            emitted: 0,
            duplicates: 0,
            failures: 0,
            pairs_backtranslated: 0,
            partials_backtranslated: 0,
        }
    }

    fn attempt(&mut self, index: usize) {
        self.attempts += 1;
        self.accounts[index].attempts += 1;
    }

    fn emit(&mut self, index: usize, origin: usize, source: Vec<Token>, target: Vec<Token>) {
        self.emitted += 1;
        self.accounts[index].emitted += 1;
        self.pairs.push((origin, source, target));
    }
}

fn generate_partial(corpus: &Corpus, extraction: &Extraction) -> Generated {
    let mut g = Generated::new(corpus, extraction, Provenance::Partial);
    for (index, (pair, partials)) in corpus.pairs.iter().zip(&extraction.partials).enumerate() {
        for partial in partials {
            g.attempt(index);
            let source = strip_delimiters(&partial.source_tokens);
            let target = strip_delimiters(&partial.target_tokens);
            if source.is_empty() || target.is_empty() {
                g.failures += 1;
            } else {
                g.emit(index, pair.id, source.to_vec(), target.to_vec());
            }
        }
    }
    g
}

fn generate_backtranslation(corpus: &Corpus, extraction: &Extraction, translator: &mut Backtranslator) -> Generated {
    let mut g = Generated::new(corpus, extraction, Provenance::BackTranslated);
    let chosen: Vec<usize> = (0..corpus.len()).filter(|&i| !extraction.partials[i].is_empty()).collect();
    let inputs: Vec<Vec<Token>> = chosen.iter().map(|&i| corpus.pairs[i].target.tokens.clone()).collect();
    let result = translator.translate(&inputs);
    g.pairs_backtranslated = chosen.len();
    for (&index, output) in chosen.iter().zip(result.outputs) {
        g.attempt(index);
        match output {
            Some(source) => {
                let pair = &corpus.pairs[index];
                g.emit(index, pair.id, source, pair.target.tokens.clone());
            }
            None => g.failures += 1,
        }
    }
    g
}

fn generate_proposed(
    corpus: &Corpus,
    extraction: &Extraction,
    cfg: &AugmentConfig,
    translator: &mut Backtranslator,
) -> Result<Generated, AugmentError> {
    let mut g = Generated::new(corpus, extraction, Provenance::Pseudo);

    // Target partials without their trailing delimiters are what gets
    // back-translated; the source delimiter survives substitution.
    let mut jobs: Vec<(usize, usize, Option<usize>)> = Vec::new();
    let mut inputs: Vec<Vec<Token>> = Vec::new();
    for (index, partials) in extraction.partials.iter().enumerate() {
        for (k, partial) in partials.iter().enumerate() {
            let content = strip_trailing_delimiters(&partial.target_tokens);
            let slot = (!content.is_empty()).then(|| {
                inputs.push(content.to_vec());
                inputs.len() - 1
            });
            jobs.push((index, k, slot));
        }
    }
    let result = translator.translate(&inputs);
    g.pairs_backtranslated = extraction
        .partials
        .iter()
        .filter(|parts| !parts.is_empty())
        .count();
    g.partials_backtranslated = result.succeeded();

    let mut seen: HashSet<TextKey> = corpus
        .pairs
        .iter()
        .map(|p| text_key(&p.source.tokens, &p.target.tokens))
        .collect();
    for (index, k, slot) in jobs {
        g.attempt(index);
        let Some(bt) = slot.and_then(|s| result.outputs[s].as_ref()) else {
            g.failures += 1;
            continue;
        };
        let pair = &corpus.pairs[index];
        let pseudo = make_pseudo(pair, &extraction.partials[index][k], bt)?;
        check_pseudo(pair, &pseudo)?;
        let key = text_key(&pseudo.source.tokens, &pseudo.target.tokens);
        if !cfg.keep_duplicates && seen.contains(&key) {
            g.duplicates += 1;
            continue;
        }
        seen.insert(key);
        g.emit(index, pair.id, pseudo.source.tokens, pseudo.target.tokens);
    }
    Ok(g)
}

fn generate_copied(corpus: &Corpus, extraction: &Extraction, size: usize) -> Generated {
    let mut g = Generated::new(corpus, extraction, Provenance::CopiedDuplicate);
    if corpus.is_empty() {
        return g;
    }
    // Round-robin from the start of the corpus.
    for n in 0..size {
        let index = n % corpus.len();
        let pair = &corpus.pairs[index];
        g.attempt(index);
        g.emit(index, pair.id, pair.source.tokens.clone(), pair.target.tokens.clone());
    }
    g
}

/// Target preserved verbatim; source changed only inside the replaced span.
fn check_pseudo(origin: &ParallelPair, pseudo: &PseudoPair) -> Result<(), AugmentError> {
    if pseudo.target != origin.target {
        return Err(AugmentError::InvariantViolation(format!(
            "pseudo pair from {} changed the target",
            origin.id
        )));
    }
    let span = &pseudo.replaced_group.source_span;
    let (orig, new) = (&origin.source.tokens, &pseudo.source.tokens);
    let suffix = orig.len() - span.end;
    let kept = orig[..span.start] == new[..span.start]
        && new.len() >= span.start + suffix
        && orig[span.end..] == new[new.len() - suffix..];
    if !kept {
        return Err(AugmentError::InvariantViolation(format!(
            "pseudo pair from {} changed tokens outside {:?}",
            origin.id, span
        )));
    }
    Ok(())
}

/// Applies `mode` to `corpus`, given one word alignment per pair.
pub fn run_mode(
    corpus: &Corpus,
    alignments: &[WordAlignment],
    mode: AugmentationMode,
    cfg: &AugmentConfig,
    translator: &mut Backtranslator,
) -> Result<(Corpus, AugmentationReport), AugmentError> {
    let extraction = extract_corpus(corpus, alignments, &cfg.segmenter)?;
    run_mode_with(corpus, &extraction, mode, cfg, translator)
}

/// As [`run_mode`], reusing an existing extraction.
pub fn run_mode_with(
    corpus: &Corpus,
    extraction: &Extraction,
    mode: AugmentationMode,
    cfg: &AugmentConfig,
    translator: &mut Backtranslator,
) -> Result<(Corpus, AugmentationReport), AugmentError> {
    if extraction.partials.len() != corpus.len() {
        return Err(AugmentError::AlignmentCount {
            expected: corpus.len(),
            found: extraction.partials.len(),
        });
    }
    let generated = match mode {
        AugmentationMode::Baseline => Generated::new(corpus, extraction, Provenance::Original),
        AugmentationMode::Partial => generate_partial(corpus, extraction),
        AugmentationMode::BackTranslation => generate_backtranslation(corpus, extraction, translator),
        AugmentationMode::Proposed => generate_proposed(corpus, extraction, cfg, translator)?,
        AugmentationMode::Copied => {
            let proposed = generate_proposed(corpus, extraction, cfg, translator)?;
            generate_copied(corpus, extraction, proposed.emitted)
        }
    };

    let mut output = corpus.clone();
    let first = output.next_id();
    for (k, (_, source, target)) in generated.pairs.iter().enumerate() {
        output.pairs.push(ParallelPair {
            id: first + k,
            source: Sentence::new(source.clone(), corpus.source_lang.clone()),
            target: Sentence::new(target.clone(), corpus.target_lang.clone()),
            provenance: generated.provenance,
        });
    }
    check_output(corpus, &output)?;

    let mut report = corpus_stats_with(&output, &cfg.segmenter);
    report.mode = Some(mode);
    report.originals = corpus.len();
    report.long_pairs = extraction.long_pairs;
    report.partial_pairs_extracted = extraction.total();
    report.pairs_backtranslated = generated.pairs_backtranslated;
    report.partials_backtranslated = generated.partials_backtranslated;
    report.attempts = generated.attempts;
    report.pseudo_pairs_emitted = generated.emitted;
    report.duplicates_dropped = generated.duplicates;
    report.failures = generated.failures;
    if cfg.per_pair {
        report.per_pair = generated.accounts;
    }
    if !report.is_balanced() {
        return Err(AugmentError::InvariantViolation(format!(
            "report accounting does not balance for mode {mode}"
        )));
    }
    Ok((output, report))
}

/// Every input pair survives unchanged at the front of the output.
fn check_output(input: &Corpus, output: &Corpus) -> Result<(), AugmentError> {
    if output.len() < input.len() || output.pairs[..input.len()] != input.pairs[..] {
        return Err(AugmentError::InvariantViolation("original pairs were not preserved".into()));
    }
    let mut ids = HashSet::new();
    if !output.pairs.iter().all(|p| ids.insert(p.id)) {
        return Err(AugmentError::InvariantViolation("duplicate pair ids".into()));
    }
    Ok(())
}

/// Writes partial pairs as line-aligned files (delimiters stripped at both
/// ends) plus a sidecar TSV `pair_id \t src_span \t tgt_span`, spans as
/// `start:end` token offsets. Partials that strip to nothing are skipped.
/// Returns the number of lines written.
pub fn export_partials(
    partials: &[Vec<PartialPair>],
    source_path: &Path,
    target_path: &Path,
    sidecar_path: &Path,
    source_joiner: Joiner,
    target_joiner: Joiner,
) -> Result<usize, CorpusError> {
    let open = |path: &Path| -> Result<BufWriter<fs::File>, CorpusError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CorpusError::io(parent, e))?;
        }
        Ok(BufWriter::new(fs::File::create(path).map_err(|e| CorpusError::io(path, e))?))
    };
    let mut src = open(source_path)?;
    let mut tgt = open(target_path)?;
    let mut side = open(sidecar_path)?;
    let mut written = 0;
    for p in partials.iter().flatten() {
        let (s, t) = (strip_delimiters(&p.source_tokens), strip_delimiters(&p.target_tokens));
        if s.is_empty() || t.is_empty() {
            continue;
        }
        writeln!(src, "{}", join_tokens(s, source_joiner)).map_err(|e| CorpusError::io(source_path, e))?;
        writeln!(tgt, "{}", join_tokens(t, target_joiner)).map_err(|e| CorpusError::io(target_path, e))?;
        writeln!(
            side,
            "{}\t{}:{}\t{}:{}",
            p.pair_id, p.source_span.start, p.source_span.end, p.target_span.start, p.target_span.end
        )
        .map_err(|e| CorpusError::io(sidecar_path, e))?;
        written += 1;
    }
    for (w, path) in [(&mut src, source_path), (&mut tgt, target_path), (&mut side, sidecar_path)] {
        w.flush().map_err(|e| CorpusError::io(path, e))?;
    }
    Ok(written)
}
