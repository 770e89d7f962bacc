use proptest::prelude::*;

use segaug::{symmetrize, Heuristic, WordAlignment};

const HEURISTICS: [Heuristic; 3] = [Heuristic::Intersection, Heuristic::Union, Heuristic::GrowDiagFinal];

fn links() -> impl Strategy<Value = WordAlignment> {
    prop::collection::btree_set((0usize..8, 0usize..8), 0..20).prop_map(|s| s.into_iter().collect())
}

fn subset(a: &WordAlignment, b: &WordAlignment) -> bool {
    a.iter().all(|(s, t)| b.contains(s, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn grow_diag_final_is_between_intersection_and_union(fwd in links(), rev in links()) {
        let inter = symmetrize(&fwd, &rev, Heuristic::Intersection);
        let gdf = symmetrize(&fwd, &rev, Heuristic::GrowDiagFinal);
        let union = symmetrize(&fwd, &rev, Heuristic::Union);
        prop_assert!(subset(&inter, &gdf));
        prop_assert!(subset(&gdf, &union));
    }

    #[test]
    fn idempotent(a in links()) {
        for h in HEURISTICS {
            prop_assert_eq!(&symmetrize(&a, &a, h), &a);
        }
    }

    #[test]
    fn set_heuristics_commute(a in links(), b in links()) {
        for h in [Heuristic::Intersection, Heuristic::Union] {
            prop_assert_eq!(symmetrize(&a, &b, h), symmetrize(&b, &a, h));
        }
    }

    /// Every word aligned by either direction stays aligned after the final
    /// step.
    #[test]
    fn grow_diag_final_covers_all_aligned_words(fwd in links(), rev in links()) {
        let gdf = symmetrize(&fwd, &rev, Heuristic::GrowDiagFinal);
        for (s, t) in fwd.iter().chain(rev.iter()) {
            prop_assert!(gdf.iter().any(|(a, _)| a == s));
            prop_assert!(gdf.iter().any(|(_, b)| b == t));
        }
    }
}
