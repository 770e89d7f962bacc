//! Splitting long sentence pairs into aligned partial pairs.
//!
//! Both sides are cut after delimiter tokens into segments. Word alignment
//! links are counted per segment pair; a source segment corresponds to a
//! target segment when the share of its aligned tokens linking into that
//! segment reaches `theta`, and the same test is run from the target side.
//! The union of both relations is reduced to one-to-one groups by taking
//! connected components, keeping only components that are contiguous on
//! both sides.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

use crate::align::WordAlignment;
use crate::corpus::{ParallelPair, Sentence, SideName, Token};

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("link {source_index}-{target_index} outside a {source_len}x{target_len} pair")]
    IndexOutOfRange {
        source_index: usize,
        target_index: usize,
        source_len: usize,
        target_len: usize,
    },
    #[error("theta {0} is not in [0, 1]")]
    InvalidTheta(f64),
    #[error("min_segments must be at least 2, got {0}")]
    InvalidMinSegments(usize),
}

/// Half-open token range `[start, end)` of one side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub side: SideName,
}

impl Segment {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedSentence<'a> {
    pub sentence: &'a Sentence,
    pub segments: Vec<Segment>,
}

impl<'a> SegmentedSentence<'a> {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Token span covered by a contiguous group of segments.
    pub fn group_span(&self, group: &Range<usize>) -> Range<usize> {
        self.segments[group.start].start..self.segments[group.end - 1].end
    }

    /// Segment index of every token.
    fn owners(&self) -> Vec<usize> {
        let mut owners = vec![0; self.sentence.len()];
        for (i, seg) in self.segments.iter().enumerate() {
            owners[seg.span()].fill(i);
        }
        owners
    }
}

/// Segment spans: a cut after every run of delimiter tokens that is followed
/// by a non-delimiter. The delimiters stay with the preceding segment, and a
/// trailing delimiter never opens an empty segment.
pub fn segment_spans(tokens: &[Token]) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    for i in 0..tokens.len() {
        let cut = tokens[i].is_delimiter && tokens.get(i + 1).is_some_and(|next| !next.is_delimiter);
        if cut {
            spans.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        spans.push(start..tokens.len());
    }
    spans
}

pub fn split_segments(sentence: &Sentence, side: SideName) -> SegmentedSentence<'_> {
    let segments = segment_spans(&sentence.tokens)
        .into_iter()
        .map(|r| Segment {
            start: r.start,
            end: r.end,
            side,
        })
        .collect();
    SegmentedSentence { sentence, segments }
}

/// A sentence is long when it splits into at least `min_segments` segments.
pub fn is_long(sentence: &Sentence, min_segments: usize) -> bool {
    segment_spans(&sentence.tokens).len() >= min_segments
}

/// Denominator used for segment alignment rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateDenominator {
    /// Tokens of the segment carrying at least one alignment link.
    #[default]
    Aligned,
    /// Every token of the segment.
    All,
}

impl FromStr for RateDenominator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aligned" => Ok(RateDenominator::Aligned),
            "all" => Ok(RateDenominator::All),
            other => Err(format!("unknown rate denominator `{other}` (expected aligned|all)")),
        }
    }
}

impl fmt::Display for RateDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateDenominator::Aligned => "aligned",
            RateDenominator::All => "all",
        })
    }
}

/// Link counts between source segments `i` and target segments `j`, from
/// both sides, with the per-segment denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentAlignmentMatrix {
    theta: f64,
    /// `[i][j]`: tokens of source segment `i` linked into target segment `j`.
    source_counts: Vec<Vec<usize>>,
    /// `[i][j]`: tokens of target segment `j` linked into source segment `i`.
    target_counts: Vec<Vec<usize>>,
    source_denominators: Vec<usize>,
    target_denominators: Vec<usize>,
}

impl SegmentAlignmentMatrix {
    /// Builds a matrix from raw counts. Shapes must agree and no count may
    /// exceed its denominator.
    pub fn from_counts(
        theta: f64,
        source_counts: Vec<Vec<usize>>,
        source_denominators: Vec<usize>,
        target_counts: Vec<Vec<usize>>,
        target_denominators: Vec<usize>,
    ) -> Self {
        let n = source_denominators.len();
        let m = target_denominators.len();
        assert_eq!(source_counts.len(), n);
        assert_eq!(target_counts.len(), n);
        for i in 0..n {
            assert_eq!(source_counts[i].len(), m);
            assert_eq!(target_counts[i].len(), m);
            for j in 0..m {
                assert!(source_counts[i][j] <= source_denominators[i]);
                assert!(target_counts[i][j] <= target_denominators[j]);
            }
        }
        SegmentAlignmentMatrix {
            theta,
            source_counts,
            target_counts,
            source_denominators,
            target_denominators,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn source_segments(&self) -> usize {
        self.source_denominators.len()
    }

    pub fn target_segments(&self) -> usize {
        self.target_denominators.len()
    }

    pub fn link_count(&self, i: usize, j: usize) -> usize {
        self.source_counts[i][j]
    }

    pub fn reverse_link_count(&self, i: usize, j: usize) -> usize {
        self.target_counts[i][j]
    }

    fn ratio(count: usize, denominator: usize) -> f64 {
        if denominator == 0 {
            0.0
        } else {
            count as f64 / denominator as f64
        }
    }

    /// Share of source segment `i` that links into target segment `j`.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        Self::ratio(self.source_counts[i][j], self.source_denominators[i])
    }

    /// Share of target segment `j` that links into source segment `i`.
    pub fn reverse_rate(&self, i: usize, j: usize) -> f64 {
        Self::ratio(self.target_counts[i][j], self.target_denominators[j])
    }

    pub fn rates(&self) -> Vec<Vec<f64>> {
        (0..self.source_segments())
            .map(|i| (0..self.target_segments()).map(|j| self.rate(i, j)).collect())
            .collect()
    }
}

pub fn segment_alignment_matrix(
    src: &SegmentedSentence<'_>,
    tgt: &SegmentedSentence<'_>,
    alignment: &WordAlignment,
    theta: f64,
    denominator: RateDenominator,
) -> Result<SegmentAlignmentMatrix, SegmentError> {
    let (source_len, target_len) = (src.sentence.len(), tgt.sentence.len());
    if let Some((s, t)) = alignment.out_of_range(source_len, target_len) {
        return Err(SegmentError::IndexOutOfRange {
            source_index: s,
            target_index: t,
            source_len,
            target_len,
        });
    }
    let (n, m) = (src.len(), tgt.len());
    let src_owner = src.owners();
    let tgt_owner = tgt.owners();

    // Per token: the set of opposite-side segments it links into.
    let mut source_reach = vec![BTreeSet::new(); source_len];
    let mut target_reach = vec![BTreeSet::new(); target_len];
    for (s, t) in alignment.iter() {
        source_reach[s].insert(tgt_owner[t]);
        target_reach[t].insert(src_owner[s]);
    }

    let mut source_counts = vec![vec![0; m]; n];
    let mut target_counts = vec![vec![0; m]; n];
    let mut source_aligned = vec![0; n];
    let mut target_aligned = vec![0; m];
    for (s, reach) in source_reach.iter().enumerate() {
        let i = src_owner[s];
        if !reach.is_empty() {
            source_aligned[i] += 1;
        }
        for &j in reach {
            source_counts[i][j] += 1;
        }
    }
    for (t, reach) in target_reach.iter().enumerate() {
        let j = tgt_owner[t];
        if !reach.is_empty() {
            target_aligned[j] += 1;
        }
        for &i in reach {
            target_counts[i][j] += 1;
        }
    }

    let (source_denominators, target_denominators) = match denominator {
        RateDenominator::Aligned => (source_aligned, target_aligned),
        RateDenominator::All => (
            src.segments.iter().map(Segment::len).collect(),
            tgt.segments.iter().map(Segment::len).collect(),
        ),
    };
    Ok(SegmentAlignmentMatrix {
        theta,
        source_counts,
        target_counts,
        source_denominators,
        target_denominators,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferDirection {
    SrcToTgt,
    TgtToSrc,
}

/// Segment pairs `(i, j)` whose rate in the given direction is at least
/// theta and backed by at least one link.
pub fn infer_directional(m: &SegmentAlignmentMatrix, direction: InferDirection) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..m.source_segments() {
        for j in 0..m.target_segments() {
            let (count, rate) = match direction {
                InferDirection::SrcToTgt => (m.link_count(i, j), m.rate(i, j)),
                InferDirection::TgtToSrc => (m.reverse_link_count(i, j), m.reverse_rate(i, j)),
            };
            if count >= 1 && rate >= m.theta {
                out.insert((i, j));
            }
        }
    }
    out
}

/// One-to-one aligned groups of segments and their tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialPair {
    pub pair_id: usize,
    pub source_group: Range<usize>,
    pub target_group: Range<usize>,
    pub source_span: Range<usize>,
    pub target_span: Range<usize>,
    pub source_tokens: Vec<Token>,
    pub target_tokens: Vec<Token>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

fn contiguous(sorted: &[usize]) -> Option<Range<usize>> {
    let (&first, &last) = (sorted.first()?, sorted.last()?);
    (last - first + 1 == sorted.len()).then_some(first..last + 1)
}

/// Connected components of the segment graph `fwd ∪ rev`. Components that
/// are contiguous on both sides become partial pairs, ordered by source
/// position; everything else is dropped.
pub fn combine_one_to_one(
    fwd: &BTreeSet<(usize, usize)>,
    rev: &BTreeSet<(usize, usize)>,
    src: &SegmentedSentence<'_>,
    tgt: &SegmentedSentence<'_>,
    pair_id: usize,
) -> Vec<PartialPair> {
    let (n, m) = (src.len(), tgt.len());
    // Nodes 0..n are source segments, n..n+m target segments.
    let mut parent: Vec<usize> = (0..n + m).collect();
    let mut has_edge = vec![false; n + m];
    for &(i, j) in fwd.union(rev) {
        if i >= n || j >= m {
            continue;
        }
        has_edge[i] = true;
        has_edge[n + j] = true;
        let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }

    let mut components: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut slot = vec![usize::MAX; n + m];
    for node in (0..n + m).filter(|&v| has_edge[v]) {
        let root = find(&mut parent, node);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push((Vec::new(), Vec::new()));
        }
        let component = &mut components[slot[root]];
        if node < n {
            component.0.push(node);
        } else {
            component.1.push(node - n);
        }
    }

    let mut partials: Vec<PartialPair> = components
        .into_iter()
        .filter_map(|(s, t)| {
            let source_group = contiguous(&s)?;
            let target_group = contiguous(&t)?;
            let source_span = src.group_span(&source_group);
            let target_span = tgt.group_span(&target_group);
            Some(PartialPair {
                pair_id,
                source_tokens: src.sentence.tokens[source_span.clone()].to_vec(),
                target_tokens: tgt.sentence.tokens[target_span.clone()].to_vec(),
                source_group,
                target_group,
                source_span,
                target_span,
            })
        })
        .collect();
    partials.sort_by_key(|p| p.source_group.start);
    partials
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmenterConfig {
    pub theta: f64,
    pub denominator: RateDenominator,
    /// Segments each side needs before the pair counts as long.
    pub min_segments: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            theta: 0.5,
            denominator: RateDenominator::Aligned,
            min_segments: 2,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(SegmentError::InvalidTheta(self.theta));
        }
        if self.min_segments < 2 {
            return Err(SegmentError::InvalidMinSegments(self.min_segments));
        }
        Ok(())
    }

    /// Both sides must be long.
    pub fn is_long_pair(&self, pair: &ParallelPair) -> bool {
        is_long(&pair.source, self.min_segments) && is_long(&pair.target, self.min_segments)
    }
}

/// Runs the whole split/align/combine procedure on one pair. Pairs that are
/// not long on both sides yield nothing.
pub fn extract_partials(
    pair: &ParallelPair,
    alignment: &WordAlignment,
    cfg: &SegmenterConfig,
) -> Result<Vec<PartialPair>, SegmentError> {
    cfg.validate()?;
    let src = split_segments(&pair.source, SideName::Source);
    let tgt = split_segments(&pair.target, SideName::Target);
    let matrix = segment_alignment_matrix(&src, &tgt, alignment, cfg.theta, cfg.denominator)?;
    if src.len() < cfg.min_segments || tgt.len() < cfg.min_segments {
        return Ok(Vec::new());
    }
    let fwd = infer_directional(&matrix, InferDirection::SrcToTgt);
    let rev = infer_directional(&matrix, InferDirection::TgtToSrc);
    Ok(combine_one_to_one(&fwd, &rev, &src, &tgt, pair.id))
}

/// Slice without the trailing run of delimiter tokens.
pub fn strip_trailing_delimiters(tokens: &[Token]) -> &[Token] {
    let end = tokens.iter().rposition(|t| !t.is_delimiter).map_or(0, |i| i + 1);
    &tokens[..end]
}

/// Slice without delimiter tokens at either end.
pub fn strip_delimiters(tokens: &[Token]) -> &[Token] {
    let trimmed = strip_trailing_delimiters(tokens);
    let start = trimmed.iter().position(|t| !t.is_delimiter).unwrap_or(trimmed.len());
    &trimmed[start..]
}
