use std::collections::HashSet;
use std::sync::Arc;

use gwa_core::formats::{parse, to_canonical_json, TreeAutomatonDoc};
use gwa_core::repro::{accept_all, parity, tree_signature};
use gwa_core::suites::enumerate_graphs;
use gwa_core::trees::{
    apply_g, apply_h, build_characterization, decode_g, decode_h, enumerate_trees, eval_dta, is_tree, verify_characterization,
    BottomUpTreeAutomaton, Tree, TreeSignature,
};
use gwa_core::{canonical_encode, LabelId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of trees with exactly `m` nodes whose root fits `slot`
/// (0 for the root, i for the i-th child position).
fn count(ts: &TreeSignature, slot: usize, m: usize) -> u64 {
    let parent = if slot == 0 { None } else { Some(slot) };
    let mut total = 0;
    for l in ts.sig().label_ids() {
        if ts.parent(l) != parent {
            continue;
        }
        total += forests(ts, 1, ts.rank(l), m - 1);
    }
    total
}

/// Ways to fill child positions `from..=rank` with exactly `m` nodes.
fn forests(ts: &TreeSignature, from: usize, rank: usize, m: usize) -> u64 {
    if from > rank {
        return u64::from(m == 0);
    }
    (1..=m).map(|s| count(ts, from, s) * forests(ts, from + 1, rank, m - s)).sum()
}

fn code_set(graphs: impl Iterator<Item = gwa_core::Graph>) -> HashSet<String> {
    graphs.map(|g| canonical_encode(&g).unwrap().to_hex()).collect()
}

#[test]
fn tree_enumeration_matches_counts_and_graph_enumeration() {
    let ts = tree_signature();
    for m in 1..=6 {
        let trees = enumerate_trees(&ts, m);
        let expected: u64 = (1..=m).map(|s| count(&ts, 0, s)).sum();
        assert_eq!(trees.len() as u64, expected, "{m} nodes");
        let distinct: HashSet<&Tree> = trees.iter().collect();
        assert_eq!(distinct.len(), trees.len());
        let graphs = enumerate_graphs(ts.sig(), m);
        assert!(graphs.iter().all(is_tree));
        assert_eq!(code_set(trees.iter().map(|t| t.to_graph(&ts))), code_set(graphs.into_iter()));
    }
}

#[test]
fn tree_graph_round_trip() {
    let ts = tree_signature();
    for t in enumerate_trees(&ts, 6) {
        let g = t.to_graph(&ts);
        assert!(g.is_valid());
        assert_eq!(g.num_nodes(), t.size());
        assert_eq!(Tree::from_graph(&ts, &g).unwrap(), t);
    }
}

fn size(t: &Tree) -> usize {
    1 + t.children.iter().map(size).sum::<usize>()
}

#[test]
fn parity_evaluates_size() {
    let ts = tree_signature();
    let a = parity(ts.clone());
    for t in enumerate_trees(&ts, 7) {
        let (q, acc) = eval_dta(&a, &t);
        assert_eq!(q, size(&t) % 2);
        assert_eq!(acc, size(&t) % 2 == 1);
    }
}

fn random_automaton(ts: Arc<TreeSignature>, states: usize, seed: u64) -> BottomUpTreeAutomaton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table: Vec<Vec<usize>> = ts
        .sig()
        .label_ids()
        .map(|l| (0..states.pow(ts.rank(l) as u32)).map(|_| rng.gen_range(0..states)).collect())
        .collect();
    let names = (0..states).map(|q| format!("q{q}")).collect();
    BottomUpTreeAutomaton::from_fn(ts, names, rng.gen_range(0..states), move |l: LabelId, args: &[usize]| {
        let idx = args.iter().fold(0, |acc, &q| acc * states + q);
        table[l.index()][idx]
    })
    .unwrap()
}

/// Acceptance equals membership of the `h`-image among all `g`-images,
/// compared through canonical codes only.
fn check_language(a: &BottomUpTreeAutomaton, max_nodes: usize) -> Result<(), TestCaseError> {
    if a.is_empty() {
        // Refused, and indeed nothing small is accepted.
        prop_assert!(build_characterization(a).is_err());
        prop_assert!(enumerate_trees(a.tree_sig(), max_nodes).iter().all(|t| !eval_dta(a, t).1));
        return Ok(());
    }
    let b = build_characterization(a).unwrap();
    let g_images = code_set(enumerate_trees(&b.s_comp, max_nodes).iter().map(|t| apply_g(&b, t)));
    for t in enumerate_trees(&b.s_reg, max_nodes) {
        let img = apply_h(&b, &t);
        let code = canonical_encode(&img).unwrap().to_hex();
        prop_assert_eq!(eval_dta(a, &t).1, g_images.contains(&code));
        prop_assert_eq!(decode_h(&b, &img), Some(t));
    }
    for t in enumerate_trees(&b.s_comp, max_nodes) {
        let back = decode_g(&b, &apply_g(&b, &t));
        prop_assert_eq!(back, Some(t));
    }
    Ok(())
}

#[test]
fn fixed_automata_languages() {
    let ts = tree_signature();
    check_language(&accept_all(ts.clone()), 5).unwrap();
    check_language(&parity(ts), 5).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_automata_languages(seed in any::<u64>(), states in 1usize..4) {
        let ts = Arc::new(TreeSignature::from_labels(2, &[
            ("r", None, 2),
            ("r0", None, 0),
            ("x_1", Some(1), 1),
            ("y_1", Some(1), 0),
            ("x_2", Some(2), 0),
        ]).unwrap());
        check_language(&random_automaton(ts, states, seed), 5)?;
    }

    #[test]
    fn random_automata_verify_clean(seed in any::<u64>(), states in 1usize..4) {
        let a = random_automaton(tree_signature(), states, seed);
        if a.is_empty() {
            prop_assert!(build_characterization(&a).is_err());
        } else {
            let rep = verify_characterization(&build_characterization(&a).unwrap(), 5).unwrap();
            prop_assert!(rep.is_clean(), "{:?}", rep.counterexamples.first());
        }
    }
}

#[test]
fn tree_automaton_documents_round_trip() {
    let ts = tree_signature();
    for a in [accept_all(ts.clone()), parity(ts.clone()), random_automaton(ts.clone(), 3, 5)] {
        let text = to_canonical_json(&TreeAutomatonDoc::from_automaton(&a, true));
        let doc: TreeAutomatonDoc = parse(&text, "tree automaton").unwrap();
        assert_eq!(doc.to_automaton(ts.clone()).unwrap(), a);
    }
}

#[test]
fn decoders_reject_foreign_trees() {
    let ts = tree_signature();
    let b = build_characterization(&parity(ts.clone())).unwrap();
    // A plain tree over the original signature is no image at all.
    for t in enumerate_trees(&ts, 4).into_iter().filter(|t| size(t) > 1) {
        let g = t.to_graph(&ts);
        assert!(decode_h(&b, &g).is_none());
        assert!(decode_g(&b, &g).is_none());
    }
    // Images of rejected trees have no g-preimage.
    for t in enumerate_trees(&b.s_reg, 4).into_iter().filter(|t| size(t).is_multiple_of(2)) {
        assert!(decode_g(&b, &apply_h(&b, &t)).is_none());
    }
}
