use increparse::conllu::{parse_conllu, parse_conllu_with, write_conllu, InvalidPolicy};
use increparse::evaluation::{baseline_parse, displacement_curve, score, Baseline, Bucket};
use increparse::stats::branching_stats;
use increparse::synth::synthetic_treebank;
use increparse::{DepTree, Token};
use proptest::prelude::*;

const RELS: [&str; 3] = ["nsubj", "obj", "det"];

fn labeled_tree(n: usize) -> impl Strategy<Value = DepTree> {
    (
        Just(Vec::from_iter(1..=n)).prop_shuffle(),
        proptest::collection::vec(any::<u32>(), n),
        proptest::collection::vec(0..RELS.len(), n),
    )
        .prop_map(|(order, picks, rels)| {
            let n = order.len();
            let mut heads = vec![0; n];
            for j in 1..n {
                heads[order[j] - 1] = order[picks[j] as usize % j];
            }
            let tokens = (1..=n)
                .map(|i| {
                    let rel = if heads[i - 1] == 0 {
                        "root"
                    } else {
                        RELS[rels[i - 1]]
                    };
                    Token::new(i, format!("w{i}"), "X", heads[i - 1], rel)
                })
                .collect();
            DepTree::new(tokens)
        })
}

/// Gold and predicted trees over the same tokens.
fn aligned_pair() -> impl Strategy<Value = (DepTree, DepTree)> {
    (1usize..15).prop_flat_map(|n| (labeled_tree(n), labeled_tree(n)))
}

fn to_text(trees: &[DepTree]) -> String {
    let mut out = Vec::new();
    write_conllu(trees, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn conllu_round_trip_on_synthetic_treebank() {
    let trees = synthetic_treebank(3, 200);
    let text = to_text(&trees);
    let back = parse_conllu(text.as_bytes()).unwrap();
    assert_eq!(back.len(), trees.len());
    for (a, b) in trees.iter().zip(&back) {
        assert_eq!(a.tokens, b.tokens);
        assert_eq!(a.sentence_id, b.sentence_id);
    }
    assert_eq!(to_text(&back), text);
}

#[test]
fn conllu_skips_ranges_and_empty_nodes() {
    let text = "# sent_id = a\n# text = Im Haus\n1-2\tIm\t_\t_\t_\t_\t_\t_\t_\t_\n\
                1\tIn\t_\tADP\t_\t_\t3\tcase\t_\t_\n2\tdem\t_\tDET\t_\t_\t3\tdet\t_\t_\n\
                2.1\tx\t_\tX\t_\t_\t_\t_\t_\t_\n3\tHaus\t_\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
    let trees = parse_conllu(text.as_bytes()).unwrap();
    assert_eq!(trees.len(), 1);
    assert_eq!(trees[0].heads(), vec![3, 3, 0]);
    assert_eq!(trees[0].sentence_id.as_deref(), Some("a"));
    assert_eq!(trees[0].comments.len(), 2);
}

#[test]
fn invalid_sentences_fail_or_skip() {
    let text = "1\ta\t_\tX\t_\t_\t2\tdep\t_\t_\n2\tb\t_\tX\t_\t_\t1\tdep\t_\t_\n\n\
                1\tc\t_\tX\t_\t_\t0\troot\t_\t_\n\n";
    assert!(parse_conllu(text.as_bytes()).is_err());
    let (trees, skipped) = parse_conllu_with(text.as_bytes(), InvalidPolicy::SkipAndWarn).unwrap();
    assert_eq!(trees.len(), 1);
    assert_eq!(skipped.len(), 1);
    let malformed = "1\ta\tX\n\n";
    assert!(parse_conllu_with(malformed.as_bytes(), InvalidPolicy::SkipAndWarn).is_err());
}

#[test]
fn synthetic_branching_profile() {
    let trees = synthetic_treebank(2024, 6000);
    let stats = branching_stats(&trees).unwrap();
    assert_eq!(stats.n_sentences, 6000);
    assert!((stats.pct_left_arcs + stats.pct_right_arcs - 100.0).abs() < 1e-9);
    assert!(stats.pct_left_arcs > 50.0 && stats.pct_left_arcs < 70.0);
    assert!(stats.pct_nonprojective_sentences > 1.0 && stats.pct_nonprojective_sentences < 10.0);
}

#[test]
fn right_branching_baseline_on_a_chain() {
    let chain = DepTree::from_heads(&[0, 1, 2, 3]);
    let base = baseline_parse(std::slice::from_ref(&chain), Baseline::RightBranching);
    let m = score(std::slice::from_ref(&chain), &base).unwrap();
    assert_eq!(m.uas, 1.0);
    let left = baseline_parse(std::slice::from_ref(&chain), Baseline::LeftBranching);
    assert_eq!(left[0].heads(), vec![2, 3, 4, 0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn las_never_exceeds_uas((gold, pred) in aligned_pair()) {
        let m = score(std::slice::from_ref(&gold), std::slice::from_ref(&pred)).unwrap();
        prop_assert!(m.las <= m.uas);
        prop_assert!((0.0..=1.0).contains(&m.uas));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn self_score_is_perfect(tree in (1usize..30).prop_flat_map(labeled_tree)) {
        let m = score(std::slice::from_ref(&tree), std::slice::from_ref(&tree)).unwrap();
        prop_assert_eq!(m.uas, 1.0);
        prop_assert_eq!(m.las, 1.0);
    }

    #[test]
    fn displacement_buckets_recombine(pairs in proptest::collection::vec(aligned_pair(), 1..8)) {
        let (gold, pred): (Vec<DepTree>, Vec<DepTree>) = pairs.into_iter().unzip();
        let m = score(&gold, &pred).unwrap();
        let curve = displacement_curve(&gold, &pred).unwrap();
        let correct = gold
            .iter()
            .zip(&pred)
            .flat_map(|(g, p)| g.tokens.iter().zip(&p.tokens))
            .filter(|(a, b)| a.head == b.head)
            .count();
        prop_assert_eq!(curve.true_positives(), correct);
        prop_assert_eq!(curve.true_positives() as f64 / m.n_tokens as f64, m.uas);
        let merged = curve.merged(3);
        prop_assert_eq!(merged.true_positives(), correct);
        let gold_total: usize = merged.buckets.values().map(|b| b.gold_count).sum();
        prop_assert_eq!(gold_total, m.n_tokens);
        let in_range = merged.buckets.keys().all(|b| match b {
            Bucket::Root => true,
            Bucket::Offset(d) => d.abs() <= 3 && *d != 0,
        });
        prop_assert!(in_range);
    }

    #[test]
    fn direction_percentages_sum_to_one_hundred(
        trees in proptest::collection::vec((1usize..20).prop_flat_map(labeled_tree), 1..10)
    ) {
        let s = branching_stats(&trees).unwrap();
        prop_assert!((s.pct_left_arcs + s.pct_right_arcs - 100.0).abs() < 1e-9);
    }
}
