//! Shared fixtures and brute-force oracles for the integration tests.
//!
//! The oracles deliberately avoid the library's own helpers: they work on
//! plain booleans, strings and index sets.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use segaug::corpus::{Lang, ParallelPair, Provenance, Sentence, Token};
use segaug::WordAlignment;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Toy corpus

pub const TOY_SEED: u64 = 20_170_101;
pub const TOY_PAIRS: usize = 100;
const VOCAB: usize = 40;

/// Contents of the bundled toy corpus files.
pub struct ToyFiles {
    pub src: String,
    pub tgt: String,
    /// Gold alignments of `src`/`tgt`.
    pub pharaoh: String,
    /// Target word to a novel source-side word.
    pub dict: String,
    /// `mirror.tgt` repeats `src`; `mirror.pharaoh` is the diagonal.
    pub mirror_pharaoh: String,
}

impl ToyFiles {
    pub fn files(&self) -> Vec<(&'static str, &str)> {
        vec![
            ("toy.src", &self.src),
            ("toy.tgt", &self.tgt),
            ("toy.pharaoh", &self.pharaoh),
            ("toy.dict", &self.dict),
            ("mirror.src", &self.src),
            ("mirror.tgt", &self.src),
            ("mirror.pharaoh", &self.mirror_pharaoh),
        ]
    }
}

/// Clauses of 2-5 dictionary words joined by punctuation. The target
/// translates each clause word by word and shuffles the words inside it.
pub fn generate_toy() -> ToyFiles {
    let mut rng = rng(TOY_SEED);
    let (mut src, mut tgt, mut pharaoh, mut mirror) = (String::new(), String::new(), String::new(), String::new());
    for _ in 0..TOY_PAIRS {
        let clauses = *[1, 2, 2, 3, 3, 3, 4].choose(&mut rng).unwrap();
        let mut s: Vec<String> = Vec::new();
        let mut t: Vec<String> = Vec::new();
        let mut links: Vec<(usize, usize)> = Vec::new();
        for c in 0..clauses {
            let len = rng.random_range(2..=5);
            let words: Vec<usize> = (0..len).map(|_| rng.random_range(0..VOCAB)).collect();
            let mut order: Vec<usize> = (0..len).collect();
            order.shuffle(&mut rng);
            let (s0, t0) = (s.len(), t.len());
            for &w in &words {
                s.push(format!("s{w:02}"));
            }
            for (k, &i) in order.iter().enumerate() {
                t.push(format!("t{:02}", words[i]));
                links.push((s0 + i, t0 + k));
            }
            if c + 1 < clauses {
                let semi = rng.random_bool(0.3);
                s.push(if semi { ";" } else { "," }.to_string());
                t.push(if semi { "；" } else { "，" }.to_string());
                links.push((s.len() - 1, t.len() - 1));
            }
        }
        s.push(".".into());
        t.push("。".into());
        links.push((s.len() - 1, t.len() - 1));
        links.sort();

        src.push_str(&s.join(" "));
        src.push('\n');
        tgt.push_str(&t.join(" "));
        tgt.push('\n');
        let items: Vec<String> = links.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        pharaoh.push_str(&items.join(" "));
        pharaoh.push('\n');
        let diag: Vec<String> = (0..s.len()).map(|i| format!("{i}-{i}")).collect();
        mirror.push_str(&diag.join(" "));
        mirror.push('\n');
    }
    let mut dict = String::new();
    for w in 0..VOCAB {
        dict.push_str(&format!("t{w:02}\tb{w:02}\n"));
    }
    dict.push_str("，\t,\n；\t;\n。\t.\n");
    ToyFiles {
        src,
        tgt,
        pharaoh,
        dict,
        mirror_pharaoh: mirror,
    }
}

/// Writes the toy files into `dir` and returns the directory.
pub fn write_toy(dir: &Path) -> PathBuf {
    for (name, contents) in generate_toy().files() {
        std::fs::write(dir.join(name), contents).unwrap();
    }
    dir.to_path_buf()
}

// ---------------------------------------------------------------------------
// Segment extraction oracle

/// One random extraction instance: delimiter flags per token and links.
#[derive(Debug, Clone)]
pub struct Instance {
    pub source: Vec<bool>,
    pub target: Vec<bool>,
    pub links: BTreeSet<(usize, usize)>,
}

/// Segment start offsets by definition: a token starts a new segment when it
/// is not a delimiter and the token before it is one.
fn oracle_segments(delims: &[bool]) -> Vec<Range<usize>> {
    let mut starts = vec![0];
    for i in 1..delims.len() {
        if delims[i - 1] && !delims[i] {
            starts.push(i);
        }
    }
    if delims.is_empty() {
        return Vec::new();
    }
    starts
        .iter()
        .enumerate()
        .map(|(k, &s)| s..starts.get(k + 1).copied().unwrap_or(delims.len()))
        .collect()
}

pub fn oracle_segment_count(delims: &[bool]) -> usize {
    oracle_segments(delims).len()
}

/// Rate-threshold relation seen from one side: `(mine, theirs)` pairs where
/// the share of my tokens linking into their segment reaches theta.
fn oracle_relation(
    my_segments: &[Range<usize>],
    their_segments: &[Range<usize>],
    links: &[(usize, usize)],
    theta: f64,
    denominator_all: bool,
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, mine) in my_segments.iter().enumerate() {
        let aligned = mine.clone().filter(|&a| links.iter().any(|&(x, _)| x == a)).count();
        let denom = if denominator_all { mine.len() } else { aligned };
        for (j, theirs) in their_segments.iter().enumerate() {
            let count = mine
                .clone()
                .filter(|&a| links.iter().any(|&(x, y)| x == a && theirs.contains(&y)))
                .count();
            if count >= 1 && denom > 0 && count as f64 / denom as f64 >= theta {
                out.insert((i, j));
            }
        }
    }
    out
}

/// `(source group, target group, source span, target span)` of every
/// extracted partial pair, ordered by source group.
pub type OracleGroup = (Range<usize>, Range<usize>, Range<usize>, Range<usize>);

pub fn oracle_extract(inst: &Instance, theta: f64, denominator_all: bool, min_segments: usize) -> Vec<OracleGroup> {
    let ss = oracle_segments(&inst.source);
    let ts = oracle_segments(&inst.target);
    if ss.len() < min_segments || ts.len() < min_segments {
        return Vec::new();
    }
    let fwd_links: Vec<(usize, usize)> = inst.links.iter().copied().collect();
    let rev_links: Vec<(usize, usize)> = inst.links.iter().map(|&(s, t)| (t, s)).collect();
    let fwd = oracle_relation(&ss, &ts, &fwd_links, theta, denominator_all);
    let rev: BTreeSet<(usize, usize)> = oracle_relation(&ts, &ss, &rev_links, theta, denominator_all)
        .into_iter()
        .map(|(j, i)| (i, j))
        .collect();
    let edges: BTreeSet<(usize, usize)> = fwd.union(&rev).copied().collect();

    // Reachability closure on the bipartite graph by repeated relaxation.
    let (n, m) = (ss.len(), ts.len());
    let mut label: Vec<usize> = (0..n + m).collect();
    loop {
        let mut changed = false;
        for &(i, j) in &edges {
            let low = label[i].min(label[n + j]);
            if label[i] != low || label[n + j] != low {
                label[i] = low;
                label[n + j] = low;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let touched: BTreeSet<usize> = edges.iter().flat_map(|&(i, j)| [i, n + j]).collect();
    let mut components: BTreeMap<usize, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for node in touched {
        let entry = components.entry(label[node]).or_default();
        if node < n {
            entry.0.insert(node);
        } else {
            entry.1.insert(node - n);
        }
    }
    let is_run = |set: &BTreeSet<usize>| {
        let (lo, hi) = (*set.iter().next().unwrap(), *set.iter().last().unwrap());
        (hi - lo + 1 == set.len()).then_some(lo..hi + 1)
    };
    let mut out: Vec<OracleGroup> = components
        .values()
        .filter_map(|(s, t)| {
            let sg = is_run(s)?;
            let tg = is_run(t)?;
            let sspan = ss[sg.start].start..ss[sg.end - 1].end;
            let tspan = ts[tg.start].start..ts[tg.end - 1].end;
            Some((sg, tg, sspan, tspan))
        })
        .collect();
    out.sort_by_key(|g| g.0.start);
    out
}

/// Random instance with at most `max_segments` segments per side and at
/// most `max_links` links.
pub fn random_instance(rng: &mut impl Rng, max_segments: usize, max_links: usize) -> Instance {
    let side = |rng: &mut dyn rand::RngCore| loop {
        let len = rng.random_range(1..=10);
        let flags: Vec<bool> = (0..len).map(|_| rng.random_bool(0.3)).collect();
        if oracle_segment_count(&flags) <= max_segments {
            return flags;
        }
    };
    let source = side(rng);
    let target = side(rng);
    let wanted = rng.random_range(0..=max_links);
    let mut links = BTreeSet::new();
    for _ in 0..wanted {
        links.insert((rng.random_range(0..source.len()), rng.random_range(0..target.len())));
    }
    Instance { source, target, links }
}

pub fn instance_pair(inst: &Instance) -> (ParallelPair, WordAlignment) {
    let sentence = |flags: &[bool], prefix: &str, lang: &str| {
        let tokens = flags
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if d {
                    Token::delimiter(",")
                } else {
                    Token::new(format!("{prefix}{i}"))
                }
            })
            .collect();
        Sentence::new(tokens, Lang::new(lang))
    };
    let pair = ParallelPair {
        id: 0,
        source: sentence(&inst.source, "s", "src"),
        target: sentence(&inst.target, "t", "tgt"),
        provenance: Provenance::Original,
    };
    (pair, inst.links.iter().copied().collect())
}

// ---------------------------------------------------------------------------
// IBM Model 1 oracle

pub const ORACLE_NULL: &str = "\u{0}NULL";

/// Textbook Model 1 EM on string pairs `(conditioning, generated)`, same
/// initialisation as the library: uniform over co-occurring words, NULL
/// co-occurring with everything. Returns `t(g | c)` keyed by `(c, g)`.
pub fn naive_model1(pairs: &[(Vec<String>, Vec<String>)], iters: usize) -> HashMap<(String, String), f64> {
    let with_null = |c: &[String]| -> Vec<String> {
        std::iter::once(ORACLE_NULL.to_string()).chain(c.iter().cloned()).collect()
    };
    let mut t: HashMap<(String, String), f64> = HashMap::new();
    let mut fan: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (c, g) in pairs {
        for e in with_null(c) {
            for f in g {
                fan.entry(e.clone()).or_default().insert(f.clone());
            }
        }
    }
    for (e, fs) in &fan {
        for f in fs {
            t.insert((e.clone(), f.clone()), 1.0 / fs.len() as f64);
        }
    }
    for _ in 0..iters {
        let mut count: HashMap<(String, String), f64> = HashMap::new();
        let mut total: HashMap<String, f64> = HashMap::new();
        for (c, g) in pairs {
            let es = with_null(c);
            for f in g {
                let z: f64 = es.iter().map(|e| t[&(e.clone(), f.clone())]).sum();
                for e in &es {
                    let delta = t[&(e.clone(), f.clone())] / z;
                    *count.entry((e.clone(), f.clone())).or_default() += delta;
                    *total.entry(e.clone()).or_default() += delta;
                }
            }
        }
        for ((e, f), p) in t.iter_mut() {
            *p = count.get(&(e.clone(), f.clone())).copied().unwrap_or(0.0) / total[e];
        }
    }
    t
}

/// Synthetic one-to-one dictionary corpus: each target sentence is the
/// word-by-word translation of its source, shuffled. Returns the lines and
/// the gold links per pair.
pub type Gold = BTreeSet<(usize, usize)>;

pub fn dictionary_corpus(pairs: usize, vocab: usize, seed: u64) -> (Vec<String>, Vec<String>, Vec<Gold>) {
    let mut rng = rng(seed);
    let (mut src, mut tgt, mut gold) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..pairs {
        let len = rng.random_range(3..=7);
        let mut words: Vec<usize> = (0..vocab).collect();
        words.shuffle(&mut rng);
        words.truncate(len);
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        src.push(words.iter().map(|w| format!("e{w}")).collect::<Vec<_>>().join(" "));
        tgt.push(order.iter().map(|&i| format!("f{}", words[i])).collect::<Vec<_>>().join(" "));
        gold.push(order.iter().enumerate().map(|(k, &i)| (i, k)).collect());
    }
    (src, tgt, gold)
}

pub fn lines(v: &[String]) -> String {
    v.iter().map(|l| format!("{l}\n")).collect()
}

/// Random link set on an `n x m` grid.
pub fn random_links(rng: &mut impl Rng, n: usize, m: usize, max: usize) -> WordAlignment {
    let k = rng.random_range(0..=max);
    (0..k)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..m)))
        .collect()
}

/// Reads every file below `dir` into a sorted map of relative path to bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}
