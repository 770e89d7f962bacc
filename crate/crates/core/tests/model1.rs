mod common;

use std::time::Instant;

use segaug::align::{
    log_likelihood, train_model1, train_model1_traced, viterbi_align, BidirectionalModel, Heuristic, ModelDirection,
};
use segaug::corpus::{parse_parallel, Corpus, Lang, LineMode};

fn corpus_from(src: &str, tgt: &str) -> Corpus {
    parse_parallel(
        src.as_bytes(),
        tgt.as_bytes(),
        &Lang::new("e"),
        &Lang::new("f"),
        LineMode::Pretokenized,
    )
    .unwrap()
}

fn string_pairs(corpus: &Corpus, direction: ModelDirection) -> Vec<(Vec<String>, Vec<String>)> {
    corpus
        .pairs
        .iter()
        .map(|p| {
            let (s, t) = (p.source.texts(), p.target.texts());
            let (s, t): (Vec<String>, Vec<String>) = (s.map(String::from).collect(), t.map(String::from).collect());
            match direction {
                ModelDirection::TgtGivenSrc => (s, t),
                ModelDirection::SrcGivenTgt => (t, s),
            }
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn two_pair_corpus_prefers_the_cooccurring_word() {
    let c = corpus_from("a b\na\n", "x y\nx\n");
    let t = train_model1(&c, ModelDirection::TgtGivenSrc, 5).unwrap();
    assert!(t.prob(Some("a"), "x") > t.prob(Some("a"), "y"));
    assert!(t.prob(Some("b"), "y") > t.prob(Some("a"), "y"));
}

#[test]
fn two_pair_first_iteration_by_hand() {
    // Initial t(.|a) = 1/2 over {x, y}; t(.|b) = 1/2; t(.|NULL) = 1/2.
    // Pair 1: x and y each split 1/3 between NULL, a, b.
    // Pair 2: x splits 1/2 between NULL and a.
    // count(x|a) = 1/3 + 1/2, count(y|a) = 1/3, total(a) = 7/6.
    let c = corpus_from("a b\na\n", "x y\nx\n");
    let t = train_model1(&c, ModelDirection::TgtGivenSrc, 1).unwrap();
    assert!(close(t.prob(Some("a"), "x"), (5.0 / 6.0) / (7.0 / 6.0)));
    assert!(close(t.prob(Some("a"), "y"), (1.0 / 3.0) / (7.0 / 6.0)));
    assert!(close(t.prob(Some("b"), "x"), 0.5));
    assert!(close(t.prob(None, "x"), (5.0 / 6.0) / (7.0 / 6.0)));
}

#[test]
fn matches_naive_em_in_both_directions() {
    let (src, tgt, _) = common::dictionary_corpus(30, 12, 3);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    for direction in [ModelDirection::TgtGivenSrc, ModelDirection::SrcGivenTgt] {
        for iters in [1, 3, 7] {
            let table = train_model1(&c, direction, iters).unwrap();
            let oracle = common::naive_model1(&string_pairs(&c, direction), iters);
            assert_eq!(table.len(), oracle.len());
            for ((e, f), p) in &oracle {
                let cond = (e != common::ORACLE_NULL).then_some(e.as_str());
                let got = table.prob(cond, f);
                assert!(close(got, *p), "{direction} t({f}|{e}) = {got}, oracle {p}");
            }
        }
    }
}

#[test]
fn conditional_distributions_sum_to_one() {
    let (src, tgt, _) = common::dictionary_corpus(40, 15, 5);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let t = train_model1(&c, ModelDirection::SrcGivenTgt, 4).unwrap();
    for (word, sum) in t.conditional_sums() {
        assert!((sum - 1.0).abs() < 1e-9, "{word}: {sum}");
    }
}

#[test]
fn log_likelihood_never_decreases() {
    let (src, tgt, _) = common::dictionary_corpus(50, 20, 9);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let trained = train_model1_traced(&c, ModelDirection::TgtGivenSrc, 10, 512).unwrap();
    assert_eq!(trained.log_likelihoods.len(), 11);
    for w in trained.log_likelihoods.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{:?}", trained.log_likelihoods);
    }
    let last = *trained.log_likelihoods.last().unwrap();
    assert!(close(last, log_likelihood(&c, &trained.table)));
}

#[test]
fn shard_size_does_not_change_the_result() {
    let (src, tgt, _) = common::dictionary_corpus(200, 30, 13);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let whole = train_model1_traced(&c, ModelDirection::TgtGivenSrc, 6, usize::MAX).unwrap();
    for shard in [1, 7, 64] {
        let sharded = train_model1_traced(&c, ModelDirection::TgtGivenSrc, 6, shard).unwrap();
        for (e, f, p) in whole.table.rows() {
            let cond = (e != "<NULL>").then_some(e);
            assert!(close(sharded.table.prob(cond, f), p), "shard {shard}: t({f}|{e})");
        }
        for (a, b) in whole.log_likelihoods.iter().zip(&sharded.log_likelihoods) {
            assert!(close(*a, *b));
        }
    }
}

#[test]
fn same_result_on_any_pool_size() {
    let (src, tgt, _) = common::dictionary_corpus(1500, 40, 17);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train_model1(&c, ModelDirection::TgtGivenSrc, 3).unwrap().to_tsv())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn dictionary_links_are_recovered() {
    let start = Instant::now();
    let (src, tgt, gold) = common::dictionary_corpus(50, 20, 1);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let t = train_model1(&c, ModelDirection::TgtGivenSrc, 10).unwrap();
    let (mut correct, mut total) = (0, 0);
    for (pair, gold) in c.pairs.iter().zip(&gold) {
        for link in viterbi_align(pair, &t).iter() {
            total += 1;
            correct += usize::from(gold.contains(&link));
        }
    }
    assert!(total > 0);
    let precision = correct as f64 / total as f64;
    assert!(precision >= 0.9, "precision {precision}");
    for w in 0..20 {
        let (e, f) = (format!("e{w}"), format!("f{w}"));
        if src.iter().any(|l| l.split(' ').any(|x| x == e)) {
            assert!(t.prob(Some(&e), &f) > 0.5, "t({f}|{e}) = {}", t.prob(Some(&e), &f));
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn symmetrized_alignment_recovers_gold() {
    let (src, tgt, gold) = common::dictionary_corpus(60, 15, 21);
    let c = corpus_from(&common::lines(&src), &common::lines(&tgt));
    let model = BidirectionalModel::train(&c, 10).unwrap();
    let aligned = model.align_corpus(&c, Heuristic::GrowDiagFinal);
    let (mut hit, mut total) = (0, 0);
    for (wa, gold) in aligned.iter().zip(&gold) {
        total += gold.len();
        hit += wa.iter().filter(|l| gold.contains(l)).count();
    }
    assert!(hit as f64 / total as f64 >= 0.9, "recall {hit}/{total}");
}
