//! Size accounting for corpora and augmentation runs.

use serde::{Deserialize, Serialize};

use crate::augment::AugmentationMode;
use crate::corpus::{Corpus, Provenance};
use crate::segment::SegmenterConfig;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceCounts {
    pub original: usize,
    pub partial: usize,
    pub pseudo: usize,
    pub copied_duplicate: usize,
    pub back_translated: usize,
}

impl ProvenanceCounts {
    pub fn add(&mut self, provenance: Provenance) {
        match provenance {
            Provenance::Original => self.original += 1,
            Provenance::Partial => self.partial += 1,
            Provenance::Pseudo => self.pseudo += 1,
            Provenance::CopiedDuplicate => self.copied_duplicate += 1,
            Provenance::BackTranslated => self.back_translated += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.original + self.partial + self.pseudo + self.copied_duplicate + self.back_translated
    }
}

/// Generation bookkeeping for one original pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAccount {
    pub id: usize,
    pub partials: usize,
    pub attempts: usize,
    pub emitted: usize,
}

/// Counts describing a corpus or the output of one augmentation mode.
///
/// `attempts` is the number of candidate pairs a mode tried to add;
/// `pseudo_pairs_emitted + duplicates_dropped + failures == attempts`.
/// `pairs_backtranslated` is the number of original pairs whose material was
/// sent through the translator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub mode: Option<AugmentationMode>,
    pub total_pairs: usize,
    pub by_provenance: ProvenanceCounts,
    pub originals: usize,
    pub long_pairs: usize,
    pub partial_pairs_extracted: usize,
    pub pairs_backtranslated: usize,
    pub partials_backtranslated: usize,
    pub attempts: usize,
    pub pseudo_pairs_emitted: usize,
    pub duplicates_dropped: usize,
    pub failures: usize,
    pub mean_source_tokens: f64,
    pub mean_target_tokens: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_pair: Vec<PairAccount>,
}

impl AugmentationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Whether the attempt accounting balances.
    pub fn is_balanced(&self) -> bool {
        self.pseudo_pairs_emitted + self.duplicates_dropped + self.failures == self.attempts
            && self.by_provenance.total() == self.total_pairs
    }
}

/// Counts by provenance, long pairs (two or more segments on both sides)
/// and mean sentence lengths.
pub fn corpus_stats(corpus: &Corpus) -> AugmentationReport {
    corpus_stats_with(corpus, &SegmenterConfig::default())
}

pub fn corpus_stats_with(corpus: &Corpus, cfg: &SegmenterConfig) -> AugmentationReport {
    let mut report = AugmentationReport {
        total_pairs: corpus.len(),
        ..Default::default()
    };
    let (mut src_tokens, mut tgt_tokens) = (0usize, 0usize);
    for pair in &corpus.pairs {
        report.by_provenance.add(pair.provenance);
        if cfg.is_long_pair(pair) {
            report.long_pairs += 1;
        }
        src_tokens += pair.source.len();
        tgt_tokens += pair.target.len();
    }
    report.originals = report.by_provenance.original;
    if !corpus.is_empty() {
        report.mean_source_tokens = src_tokens as f64 / corpus.len() as f64;
        report.mean_target_tokens = tgt_tokens as f64 / corpus.len() as f64;
    }
    report
}
