//! Word alignment: Pharaoh-format ingestion, a built-in IBM Model 1 aligner
//! and symmetrization of directional alignments.

mod model1;
mod pharaoh;
mod symmetrize;

use std::collections::BTreeSet;

pub use model1::{
    log_likelihood, parse_translation_table, train_model1, train_model1_traced, viterbi_align,
    ModelDirection, TableError, TrainError, Trained, TranslationTable, NULL_WORD, OOV_NULL_FLOOR,
};
pub use pharaoh::{
    format_pharaoh, parse_pharaoh, parse_pharaoh_lines, read_pharaoh_file, write_pharaoh_file,
    PharaohError,
};
pub use symmetrize::{symmetrize, Heuristic};

/// Links between source and target token indices, stored sorted and
/// without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WordAlignment {
    links: BTreeSet<(usize, usize)>,
}

impl WordAlignment {
    pub fn new() -> Self {
        WordAlignment::default()
    }

    pub fn insert(&mut self, source: usize, target: usize) -> bool {
        self.links.insert((source, target))
    }

    pub fn contains(&self, source: usize, target: usize) -> bool {
        self.links.contains(&(source, target))
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in `(source, target)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub(crate) fn set(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    /// Swaps the roles of source and target.
    pub fn transposed(&self) -> WordAlignment {
        self.iter().map(|(s, t)| (t, s)).collect()
    }

    /// First link (in sorted order) that falls outside the given lengths.
    pub fn out_of_range(&self, source_len: usize, target_len: usize) -> Option<(usize, usize)> {
        self.iter().find(|&(s, t)| s >= source_len || t >= target_len)
    }
}

impl FromIterator<(usize, usize)> for WordAlignment {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        WordAlignment {
            links: iter.into_iter().collect(),
        }
    }
}

impl<const N: usize> From<[(usize, usize); N]> for WordAlignment {
    fn from(links: [(usize, usize); N]) -> Self {
        links.into_iter().collect()
    }
}

/// Both directional Model 1 tables for one corpus.
#[derive(Debug, Clone)]
pub struct BidirectionalModel {
    /// `t(target | source)`.
    pub forward: TranslationTable,
    /// `t(source | target)`.
    pub reverse: TranslationTable,
}

impl BidirectionalModel {
    pub fn train(corpus: &crate::corpus::Corpus, iters: usize) -> Result<Self, TrainError> {
        Ok(BidirectionalModel {
            forward: train_model1(corpus, ModelDirection::TgtGivenSrc, iters)?,
            reverse: train_model1(corpus, ModelDirection::SrcGivenTgt, iters)?,
        })
    }

    /// Decodes both directions and merges them with `heuristic`.
    pub fn align(&self, pair: &crate::corpus::ParallelPair, heuristic: Heuristic) -> WordAlignment {
        symmetrize(
            &viterbi_align(pair, &self.forward),
            &viterbi_align(pair, &self.reverse),
            heuristic,
        )
    }

    /// Alignments for every pair, in corpus order.
    pub fn align_corpus(&self, corpus: &crate::corpus::Corpus, heuristic: Heuristic) -> Vec<WordAlignment> {
        use rayon::prelude::*;
        corpus
            .pairs
            .par_iter()
            .map(|pair| self.align(pair, heuristic))
            .collect()
    }
}
