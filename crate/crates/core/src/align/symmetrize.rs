use std::collections::HashSet;
use std::fmt;
use std::ops::Bound;
use std::str::FromStr;

use super::WordAlignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    Intersection,
    Union,
    #[default]
    GrowDiagFinal,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intersect" | "intersection" => Ok(Heuristic::Intersection),
            "union" => Ok(Heuristic::Union),
            "grow-diag-final" => Ok(Heuristic::GrowDiagFinal),
            other => Err(format!(
                "unknown heuristic `{other}` (expected intersection|union|grow-diag-final)"
            )),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::Intersection => "intersection",
            Heuristic::Union => "union",
            Heuristic::GrowDiagFinal => "grow-diag-final",
        })
    }
}

// Visiting order used by the reference grow-diag implementation.
const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// Merges two directional alignments. Both must already be in
/// `(source, target)` orientation.
pub fn symmetrize(fwd: &WordAlignment, rev: &WordAlignment, heuristic: Heuristic) -> WordAlignment {
    match heuristic {
        Heuristic::Intersection => fwd.set().intersection(rev.set()).copied().collect(),
        Heuristic::Union => fwd.set().union(rev.set()).copied().collect(),
        Heuristic::GrowDiagFinal => grow_diag_final(fwd, rev),
    }
}

struct Growing {
    links: WordAlignment,
    source_aligned: HashSet<usize>,
    target_aligned: HashSet<usize>,
}

impl Growing {
    fn add(&mut self, s: usize, t: usize) {
        self.links.insert(s, t);
        self.source_aligned.insert(s);
        self.target_aligned.insert(t);
    }

    /// A candidate may be added while either of its words is still unaligned.
    fn open(&self, s: usize, t: usize) -> bool {
        !self.source_aligned.contains(&s) || !self.target_aligned.contains(&t)
    }
}

fn grow_diag_final(fwd: &WordAlignment, rev: &WordAlignment) -> WordAlignment {
    let union = symmetrize(fwd, rev, Heuristic::Union);
    let mut g = Growing {
        links: WordAlignment::new(),
        source_aligned: HashSet::new(),
        target_aligned: HashSet::new(),
    };
    for (s, t) in symmetrize(fwd, rev, Heuristic::Intersection).iter() {
        g.add(s, t);
    }

    // Row-major sweeps over the current alignment; points added ahead of the
    // cursor are visited in the same sweep.
    loop {
        let mut added = false;
        let mut cursor: Option<(usize, usize)> = None;
        loop {
            let next = match cursor {
                None => g.links.set().iter().next().copied(),
                Some(c) => g
                    .links
                    .set()
                    .range((Bound::Excluded(c), Bound::Unbounded))
                    .next()
                    .copied(),
            };
            let Some((s, t)) = next else { break };
            cursor = Some((s, t));
            for (ds, dt) in NEIGHBORS {
                let (Some(ns), Some(nt)) = (s.checked_add_signed(ds), t.checked_add_signed(dt)) else {
                    continue;
                };
                if g.open(ns, nt) && union.contains(ns, nt) && !g.links.contains(ns, nt) {
                    g.add(ns, nt);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    for directional in [fwd, rev] {
        for (s, t) in directional.iter() {
            if g.open(s, t) {
                g.add(s, t);
            }
        }
    }
    g.links
}
