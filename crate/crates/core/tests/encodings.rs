use std::collections::BTreeSet;

use increparse::encodings::{
    coverage, decode, encode, BracketString, IncrementalDecoder, Label, LabelSequence, PosTarget,
    Scheme,
};
use increparse::synth::{all_trees, tree_with_random_tags};
use increparse::{DepArc, DepTree};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LOSSLESS: [Scheme; 3] = [Scheme::AbsIdx, Scheme::RelIdx, Scheme::PosIdx];
const TAGS: [&str; 3] = ["NOUN", "VERB", "DET"];

/// Random recursive tree over a random node order: any single-rooted tree
/// can come out, projective or not.
fn tree_strategy(lo: usize, hi: usize) -> impl Strategy<Value = DepTree> {
    (lo..=hi)
        .prop_flat_map(|n| {
            (
                Just(Vec::from_iter(1..=n)).prop_shuffle(),
                proptest::collection::vec(any::<u32>(), n),
                proptest::collection::vec(0..TAGS.len(), n),
            )
        })
        .prop_map(|(order, picks, tags)| {
            let n = order.len();
            let mut heads = vec![0; n];
            for j in 1..n {
                heads[order[j] - 1] = order[picks[j] as usize % j];
            }
            let upos: Vec<&str> = tags.iter().map(|&t| TAGS[t]).collect();
            DepTree::from_heads_and_tags(&heads, &upos)
        })
}

fn heads_of(tree: &DepTree) -> Vec<usize> {
    tree.tokens.iter().map(|t| t.head).collect()
}

/// Arcs that cross and point the same way.
fn conflicts(arcs: &[DepArc]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            let (a, b) = (arcs[i], arcs[j]);
            let (a0, a1) = (a.head.min(a.dependent), a.head.max(a.dependent));
            let (b0, b1) = (b.head.min(b.dependent), b.head.max(b.dependent));
            let cross = (a0 < b0 && b0 < a1 && a1 < b1) || (b0 < a0 && a0 < b1 && b1 < a1);
            if cross && (a.head < a.dependent) == (b.head < b.dependent) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Exhaustive search for a 2-coloring of the conflict graph.
fn two_colorable(arcs: &[DepArc]) -> bool {
    let edges = conflicts(arcs);
    let m = arcs.len();
    (0u32..1 << m).any(|mask| {
        edges
            .iter()
            .all(|&(i, j)| (mask >> i & 1) != (mask >> j & 1))
    })
}

#[test]
fn lossless_round_trip_on_every_small_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=5 {
        for heads in all_trees(n) {
            for tree in [
                DepTree::from_heads(&heads),
                tree_with_random_tags(&mut rng, &heads),
            ] {
                for scheme in LOSSLESS {
                    let back = decode(&encode(&tree, scheme)).unwrap();
                    assert_eq!(heads_of(&back), heads, "{scheme} on {heads:?}");
                    assert_eq!(back, tree, "{scheme} on {heads:?}");
                }
            }
        }
    }
}

#[test]
fn bracket_coverage_on_every_tree_up_to_seven() {
    for n in 1..=7 {
        for heads in all_trees(n) {
            let tree = DepTree::from_heads(&heads);
            let arcs: Vec<DepArc> = tree.arcs().into_iter().collect();
            let decoded = decode(&encode(&tree, Scheme::Bracket2P)).unwrap();
            if two_colorable(&arcs) {
                assert_eq!(heads_of(&decoded), heads, "2p on {heads:?}");
            }
            if conflicts(&arcs).is_empty() {
                let one = decode(&encode(&tree, Scheme::Bracket1P)).unwrap();
                assert_eq!(heads_of(&one), heads, "1p on {heads:?}");
            }
        }
    }
}

#[test]
fn frozen_label_strings() {
    // 1 <- 2 -> 3, 2 is the root
    let tree = DepTree::from_heads_and_tags(&[2, 0, 2], &["DET", "NOUN", "ADJ"]);
    let show = |s: Scheme| -> Vec<String> {
        encode(&tree, s)
            .labels
            .iter()
            .map(|l| l.to_string())
            .collect()
    };
    assert_eq!(show(Scheme::AbsIdx), ["2", "0", "2"]);
    assert_eq!(show(Scheme::RelIdx), ["+1", "-2", "-1"]);
    assert_eq!(show(Scheme::PosIdx), ["+1,NOUN", "ROOT", "-1,NOUN"]);
    assert_eq!(show(Scheme::Bracket1P), ["<", "\\/>", ">"]);
}

#[test]
fn forward_looking_partition() {
    let fl: Vec<bool> = Scheme::ALL.iter().map(|s| s.forward_looking()).collect();
    assert_eq!(fl, [true, true, true, false, false]);
}

fn arbitrary_label(scheme: Scheme, n: usize) -> BoxedStrategy<Label> {
    match scheme {
        Scheme::AbsIdx => (0..=n + 3).prop_map(Label::Abs).boxed(),
        Scheme::RelIdx => (-(n as isize) - 3..=n as isize + 3)
            .prop_map(Label::Rel)
            .boxed(),
        Scheme::PosIdx => prop_oneof![
            Just(Label::Pos(PosTarget::Root)),
            (1..=4isize, any::<bool>(), 0..TAGS.len()).prop_map(|(k, left, t)| {
                Label::Pos(PosTarget::Offset {
                    k: if left { -k } else { k },
                    upos: TAGS[t].to_string(),
                })
            }),
        ]
        .boxed(),
        Scheme::Bracket1P | Scheme::Bracket2P => {
            let alphabet: &[&str] = if scheme == Scheme::Bracket1P {
                &["<", "\\", "/", ">"]
            } else {
                &["<", "\\", "/", ">", "<*", "\\*", "/*", ">*"]
            };
            let alphabet: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
            proptest::collection::vec(proptest::sample::select(alphabet), 0..4)
                .prop_map(|syms| Label::Brackets(BracketString::parse(&syms.concat(), 1).unwrap()))
                .boxed()
        }
    }
}

fn fuzz_sequence() -> impl Strategy<Value = LabelSequence> {
    (proptest::sample::select(Scheme::ALL.to_vec()), 1..=12usize).prop_flat_map(|(scheme, n)| {
        (
            proptest::collection::vec(arbitrary_label(scheme, n), n),
            proptest::collection::vec(0..TAGS.len(), n),
        )
            .prop_map(move |(labels, tags)| {
                let upos = tags.iter().map(|&t| TAGS[t].to_string()).collect();
                LabelSequence::new(scheme, labels, upos)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn lossless_round_trip_random(tree in tree_strategy(6, 40)) {
        for scheme in LOSSLESS {
            let back = decode(&encode(&tree, scheme)).unwrap();
            prop_assert_eq!(&back, &tree);
        }
    }

    #[test]
    fn two_planar_complete_at_eight(tree in tree_strategy(8, 8)) {
        let arcs: Vec<DepArc> = tree.arcs().into_iter().collect();
        prop_assume!(two_colorable(&arcs));
        prop_assert_eq!(coverage(&tree, Scheme::Bracket2P), 1.0);
    }

    #[test]
    fn one_planar_keeps_its_subset(tree in tree_strategy(1, 25)) {
        let kept = increparse::encodings::one_planar_subset(&tree);
        let decoded = decode(&encode(&tree, Scheme::Bracket1P)).unwrap();
        let arcs = decoded.arcs();
        for a in &kept {
            prop_assert!(arcs.contains(a), "kept arc {} lost", a);
        }
    }

    #[test]
    fn decode_is_total(seq in fuzz_sequence()) {
        let tree = decode(&seq).unwrap();
        prop_assert_eq!(tree.len(), seq.len());
        prop_assert!(tree.validate().is_ok());
    }

    #[test]
    fn raw_decode_grows_with_the_prefix(seq in fuzz_sequence()) {
        let mut decoder = IncrementalDecoder::new(seq.scheme);
        let mut previous: BTreeSet<DepArc> = BTreeSet::new();
        for (label, tag) in seq.labels.iter().zip(&seq.upos) {
            decoder.push(label, tag);
            let now: BTreeSet<DepArc> = decoder.committed().iter().copied().collect();
            prop_assert!(previous.is_subset(&now));
            for a in &now {
                prop_assert!(a.max_node() <= decoder.len());
            }
            previous = now;
        }
    }

    #[test]
    fn labels_print_and_parse_back(tree in tree_strategy(1, 20)) {
        for scheme in Scheme::ALL {
            for (i, label) in encode(&tree, scheme).labels.iter().enumerate() {
                let text = label.to_string();
                prop_assert_eq!(&Label::parse(&text, scheme, i + 1).unwrap(), label);
            }
        }
    }
}
