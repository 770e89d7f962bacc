//! IBM Model 1 trained with exact EM, and Viterbi decoding.
//!
//! The table is parameterised as `t(f | e)`, where `e` is a conditioning
//! word (or NULL) and `f` the generated word. Which corpus side plays which
//! role is chosen by [`ModelDirection`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use super::WordAlignment;
use crate::corpus::{Corpus, ParallelPair, Sentence};

/// Spelling of the empty word in serialized tables. A corpus token with the
/// same text cannot be distinguished from it after serialization.
pub const NULL_WORD: &str = "<NULL>";

/// Probability an unseen generated word receives from NULL at decode time.
/// Every other conditioning word gives it 0, so OOV words never link.
pub const OOV_NULL_FLOOR: f64 = 1e-12;

const NULL_ID: u32 = 0;
const SHARD_PAIRS: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrainError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("iteration count must be at least 1")]
    ZeroIterations,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Which side is generated from which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelDirection {
    /// `t(source word | target word)`: source tokens are generated.
    SrcGivenTgt,
    /// `t(target word | source word)`: target tokens are generated.
    TgtGivenSrc,
}

impl ModelDirection {
    /// `(conditioning, generated)` sides of a pair.
    fn sides(self, pair: &ParallelPair) -> (&Sentence, &Sentence) {
        match self {
            ModelDirection::SrcGivenTgt => (&pair.target, &pair.source),
            ModelDirection::TgtGivenSrc => (&pair.source, &pair.target),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            ModelDirection::SrcGivenTgt => ModelDirection::TgtGivenSrc,
            ModelDirection::TgtGivenSrc => ModelDirection::SrcGivenTgt,
        }
    }
}

impl fmt::Display for ModelDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelDirection::SrcGivenTgt => "src-given-tgt",
            ModelDirection::TgtGivenSrc => "tgt-given-src",
        })
    }
}

impl FromStr for ModelDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "src-given-tgt" => Ok(ModelDirection::SrcGivenTgt),
            "tgt-given-src" => Ok(ModelDirection::TgtGivenSrc),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }
}

/// Lexical translation probabilities `t(f | e)`.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    direction: ModelDirection,
    // id 0 is NULL
    cond: Vocab,
    generated: Vocab,
    probs: HashMap<(u32, u32), f64>,
}

impl TranslationTable {
    fn empty(direction: ModelDirection) -> Self {
        let mut cond = Vocab::default();
        cond.intern(NULL_WORD);
        TranslationTable {
            direction,
            cond,
            generated: Vocab::default(),
            probs: HashMap::new(),
        }
    }

    pub fn direction(&self) -> ModelDirection {
        self.direction
    }

    /// `t(generated | conditioning)`; `None` conditions on NULL. Missing
    /// entries are 0.
    pub fn prob(&self, conditioning: Option<&str>, generated: &str) -> f64 {
        let c = match conditioning {
            None => Some(NULL_ID),
            Some(w) => self.cond.get(w).filter(|&id| id != NULL_ID),
        };
        match (c, self.generated.get(generated)) {
            (Some(c), Some(g)) => self.probs.get(&(c, g)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Sum of `t(f | e)` over `f`, per conditioning word (NULL as
    /// [`NULL_WORD`]).
    pub fn conditional_sums(&self) -> HashMap<String, f64> {
        let mut sums = HashMap::new();
        for (&(c, _), &p) in &self.probs {
            *sums.entry(self.cond.words[c as usize].clone()).or_insert(0.0) += p;
        }
        sums
    }

    /// Rows `(e, f, prob)` sorted by conditioning word then generated word,
    /// NULL first.
    pub fn rows(&self) -> Vec<(&str, &str, f64)> {
        let mut rows: Vec<_> = self
            .probs
            .iter()
            .map(|(&(c, g), &p)| (c, self.cond.words[c as usize].as_str(), self.generated.words[g as usize].as_str(), p))
            .collect();
        rows.sort_by(|a, b| (a.0 != NULL_ID, a.1, a.2).cmp(&(b.0 != NULL_ID, b.1, b.2)));
        rows.into_iter().map(|(_, e, f, p)| (e, f, p)).collect()
    }

    /// Serializes as TSV rows `e \t f \t prob` after a `#` header naming the
    /// direction.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# segaug model1 direction={}\n", self.direction);
        for (e, f, p) in self.rows() {
            out.push_str(&format!("{e}\t{f}\t{p}\n"));
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<(), TableError> {
        fs::write(path, self.to_tsv()).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Parses the TSV produced by [`TranslationTable::to_tsv`]. A missing header
/// means `tgt-given-src`. Blank lines and other `#` lines are ignored.
pub fn parse_translation_table(text: &str) -> Result<TranslationTable, TableError> {
    let mut table = TranslationTable::empty(ModelDirection::TgtGivenSrc);
    let bad = |line: usize, reason: String| TableError::Malformed { line, reason };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(dir) = comment.trim().strip_prefix("segaug model1 direction=") {
                table.direction = dir.parse().map_err(|e| bad(line_no, e))?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [e, f, p] = fields[..] else {
            return Err(bad(line_no, format!("expected 3 fields, found {}", fields.len())));
        };
        if e.is_empty() || f.is_empty() {
            return Err(bad(line_no, "empty word".into()));
        }
        let prob: f64 = p
            .parse()
            .map_err(|_| bad(line_no, format!("bad probability `{p}`")))?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(bad(line_no, format!("probability {prob} outside [0, 1]")));
        }
        let c = table.cond.intern(e);
        let g = table.generated.intern(f);
        if table.probs.insert((c, g), prob).is_some() {
            return Err(bad(line_no, format!("duplicate entry `{e}` `{f}`")));
        }
    }
    Ok(table)
}

/// A trained table with the corpus log-likelihood before the first
/// iteration and after each one (`iters + 1` values).
#[derive(Debug, Clone)]
pub struct Trained {
    pub table: TranslationTable,
    pub log_likelihoods: Vec<f64>,
}

struct EncodedPair {
    cond: Vec<u32>,
    generated: Vec<u32>,
}

fn encode(corpus: &Corpus, table: &mut TranslationTable) -> Vec<EncodedPair> {
    let direction = table.direction;
    corpus
        .pairs
        .iter()
        .map(|pair| {
            let (c, g) = direction.sides(pair);
            EncodedPair {
                cond: c.texts().map(|w| table.cond.intern(w)).collect(),
                generated: g.texts().map(|w| table.generated.intern(w)).collect(),
            }
        })
        .collect()
}

struct Expectation {
    counts: HashMap<(u32, u32), f64>,
    totals: Vec<f64>,
    log_likelihood: f64,
}

fn expectation(pairs: &[EncodedPair], probs: &HashMap<(u32, u32), f64>, n_cond: usize) -> Expectation {
    let mut counts = HashMap::new();
    let mut totals = vec![0.0; n_cond];
    let mut ll = 0.0;
    let p = |c: u32, g: u32| probs.get(&(c, g)).copied().unwrap_or(0.0);
    for pair in pairs {
        let norm = (pair.cond.len() + 1) as f64;
        for &g in &pair.generated {
            let denom: f64 = p(NULL_ID, g) + pair.cond.iter().map(|&c| p(c, g)).sum::<f64>();
            if denom <= 0.0 {
                ll = f64::NEG_INFINITY;
                continue;
            }
            ll += (denom / norm).ln();
            for c in std::iter::once(NULL_ID).chain(pair.cond.iter().copied()) {
                let share = p(c, g) / denom;
                *counts.entry((c, g)).or_insert(0.0) += share;
                totals[c as usize] += share;
            }
        }
    }
    Expectation {
        counts,
        totals,
        log_likelihood: ll,
    }
}

/// E-step over fixed-size shards, merged in shard order so the result does
/// not depend on the number of worker threads.
fn sharded_expectation(
    pairs: &[EncodedPair],
    probs: &HashMap<(u32, u32), f64>,
    n_cond: usize,
    shard: usize,
) -> Expectation {
    let parts: Vec<Expectation> = pairs
        .par_chunks(shard.max(1))
        .map(|chunk| expectation(chunk, probs, n_cond))
        .collect();
    let mut merged = Expectation {
        counts: HashMap::new(),
        totals: vec![0.0; n_cond],
        log_likelihood: 0.0,
    };
    for part in parts {
        for (k, v) in part.counts {
            *merged.counts.entry(k).or_insert(0.0) += v;
        }
        for (t, v) in merged.totals.iter_mut().zip(part.totals) {
            *t += v;
        }
        merged.log_likelihood += part.log_likelihood;
    }
    merged
}

/// Corpus log-likelihood `sum_pairs sum_j ln(sum_i t(f_j|e_i) / (l+1))`.
pub fn log_likelihood(corpus: &Corpus, table: &TranslationTable) -> f64 {
    let direction = table.direction;
    corpus
        .pairs
        .iter()
        .map(|pair| {
            let (c, g) = direction.sides(pair);
            let norm = (c.len() + 1) as f64;
            g.texts()
                .map(|f| {
                    let denom = table.prob(None, f) + c.texts().map(|e| table.prob(Some(e), f)).sum::<f64>();
                    (denom / norm).ln()
                })
                .sum::<f64>()
        })
        .sum()
}

pub fn train_model1(
    corpus: &Corpus,
    direction: ModelDirection,
    iters: usize,
) -> Result<TranslationTable, TrainError> {
    train_model1_traced(corpus, direction, iters, SHARD_PAIRS).map(|t| t.table)
}

/// Trains with `iters` EM iterations, starting from `t(f|e)` uniform over
/// the words `f` co-occurring with `e` (every generated word co-occurs with
/// NULL). `shard` is the number of pairs per E-step work unit.
pub fn train_model1_traced(
    corpus: &Corpus,
    direction: ModelDirection,
    iters: usize,
    shard: usize,
) -> Result<Trained, TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if iters == 0 {
        return Err(TrainError::ZeroIterations);
    }
    let mut table = TranslationTable::empty(direction);
    let pairs = encode(corpus, &mut table);
    let n_cond = table.cond.words.len();

    let mut support: HashSet<(u32, u32)> = HashSet::new();
    for pair in &pairs {
        for c in std::iter::once(NULL_ID).chain(pair.cond.iter().copied()) {
            for &g in &pair.generated {
                support.insert((c, g));
            }
        }
    }
    let mut fanout = vec![0usize; n_cond];
    for &(c, _) in &support {
        fanout[c as usize] += 1;
    }
    table.probs = support
        .into_iter()
        .map(|(c, g)| ((c, g), 1.0 / fanout[c as usize] as f64))
        .collect();

    let mut log_likelihoods = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let e = sharded_expectation(&pairs, &table.probs, n_cond, shard);
        log_likelihoods.push(e.log_likelihood);
        for (&(c, g), p) in table.probs.iter_mut() {
            let total = e.totals[c as usize];
            *p = if total > 0.0 {
                e.counts.get(&(c, g)).copied().unwrap_or(0.0) / total
            } else {
                0.0
            };
        }
    }
    log_likelihoods.push(sharded_expectation(&pairs, &table.probs, n_cond, shard).log_likelihood);
    Ok(Trained {
        table,
        log_likelihoods,
    })
}

/// Links every generated-side token to its most probable conditioning token.
/// NULL wins ties and produces no link; otherwise ties go to the smaller
/// index. Links are returned in `(source, target)` orientation whatever the
/// table direction.
pub fn viterbi_align(pair: &ParallelPair, table: &TranslationTable) -> WordAlignment {
    let direction = table.direction;
    let (cond, generated) = direction.sides(pair);
    let cond_ids: Vec<Option<u32>> = cond
        .texts()
        .map(|w| table.cond.get(w).filter(|&id| id != NULL_ID))
        .collect();
    let mut alignment = WordAlignment::new();
    for (j, f) in generated.texts().enumerate() {
        let Some(g) = table.generated.get(f) else {
            continue;
        };
        let p = |c: u32| table.probs.get(&(c, g)).copied().unwrap_or(0.0);
        let mut best = p(NULL_ID);
        let mut best_index = None;
        for (i, c) in cond_ids.iter().enumerate() {
            let score = c.map_or(0.0, p);
            if score > best {
                best = score;
                best_index = Some(i);
            }
        }
        if let Some(i) = best_index {
            match direction {
                ModelDirection::TgtGivenSrc => alignment.insert(i, j),
                ModelDirection::SrcGivenTgt => alignment.insert(j, i),
            };
        }
    }
    alignment
}
