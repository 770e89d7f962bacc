//! Parallel-corpus augmentation by long-sentence segmentation and
//! back-translation.
//!
//! Long sentence pairs (pairs whose sides split into several
//! punctuation-delimited segments) are cut into aligned partial pairs using
//! word alignments. The target side of each partial is back-translated and
//! substituted into the original source sentence, producing pseudo-parallel
//! pairs that share the genuine target sentence.
//!
//! The crate is organised along the processing stages:
//!
//! * [`corpus`]: sentence pairs, corpora and line-aligned file I/O.
//! * [`tokenizer`]: whitespace, character and pre-tokenized input handling.
//! * [`align`]: Pharaoh alignment files, IBM Model 1 and symmetrization.
//! * [`segment`]: segment splitting, segment alignment and partial extraction.
//! * [`backtranslate`]: the translator boundary (command, HTTP, mocks).
//! * [`augment`]: pseudo-pair construction and the augmentation modes.
//! * [`pipeline`]: end-to-end orchestration used by the `segaug` binary.

pub mod align;
pub mod augment;
pub mod backtranslate;
pub mod corpus;
pub mod pipeline;
pub mod report;
pub mod segment;
pub mod tokenizer;

pub use align::{
    format_pharaoh, parse_pharaoh, symmetrize, train_model1, viterbi_align, Heuristic,
    ModelDirection, TranslationTable, WordAlignment,
};
pub use augment::{make_pseudo, run_mode, AugmentConfig, AugmentationMode, PseudoPair};
pub use backtranslate::{backtranslate, Backtranslator, TranslationBatchResult, TranslatorSpec};
pub use corpus::{Corpus, Joiner, Lang, LineMode, ParallelPair, Provenance, Sentence, Token};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineReport};
pub use report::{corpus_stats, AugmentationReport};
pub use segment::{extract_partials, split_segments, PartialPair, SegmenterConfig};
pub use tokenizer::{DelimiterSet, Tokenizer};
