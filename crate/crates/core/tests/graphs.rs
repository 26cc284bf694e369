mod common;

use std::collections::HashSet;
use std::sync::Arc;

use gwa_core::formats::{parse, to_canonical_json, GraphDoc, SignatureDoc};
use gwa_core::suites::{enumerate_graphs, random_graph};
use gwa_core::{canonical_encode, DirId, Graph, GraphViolation, LabelId, Signature};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{build, isomorphic, loop_sig, two_pair_sig};

fn bijections(from: &[usize], to: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if from.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &t) in to.iter().enumerate() {
        let mut rest = to.to_vec();
        rest.remove(i);
        for mut tail in bijections(&from[1..], &rest) {
            tail.insert(0, (from[0], t));
            out.push(tail);
        }
    }
    out
}

/// Every labelling and every slot matching, deduplicated by brute-force
/// isomorphism. Only for signatures without self-opposite directions.
fn brute_force_classes(sig: &Arc<Signature>, max_nodes: usize) -> Vec<Graph> {
    let initial: Vec<LabelId> = sig.initial_labels().collect();
    let others: Vec<LabelId> = sig.label_ids().filter(|&l| !sig.label(l).initial).collect();
    let pairs: Vec<(DirId, DirId)> = sig.dir_ids().map(|d| (d, sig.opposite(d))).filter(|(d, o)| d < o).collect();
    let mut classes: Vec<Graph> = Vec::new();
    for m in 1..=max_nodes {
        let mut labelings: Vec<Vec<LabelId>> = initial.iter().map(|&l| vec![l]).collect();
        for _ in 1..m {
            labelings = labelings
                .into_iter()
                .flat_map(|p| others.iter().map(move |&l| [p.clone(), vec![l]].concat()))
                .collect();
        }
        for labels in labelings {
            let mut choices: Vec<Vec<(usize, DirId, usize)>> = vec![vec![]];
            let mut ok = true;
            for &(d, o) in &pairs {
                let from: Vec<usize> = (0..m).filter(|&v| sig.has_dir(labels[v], d)).collect();
                let to: Vec<usize> = (0..m).filter(|&v| sig.has_dir(labels[v], o)).collect();
                if from.len() != to.len() {
                    ok = false;
                    break;
                }
                let bs = bijections(&from, &to);
                choices = choices
                    .into_iter()
                    .flat_map(|c| bs.iter().map(move |b| [c.clone(), b.iter().map(|&(u, v)| (u, d, v)).collect()].concat()))
                    .collect();
            }
            if !ok {
                continue;
            }
            let perm: Vec<usize> = (0..m).collect();
            for edges in choices {
                let g = build(sig, &labels, &edges, 0, &perm);
                if !g.is_valid() {
                    continue;
                }
                if !classes.iter().any(|h| isomorphic(&g, h)) {
                    classes.push(g);
                }
            }
        }
    }
    classes
}

#[test]
fn enumeration_matches_brute_force() {
    let sig = two_pair_sig();
    for max in 1..=4 {
        let oracle = brute_force_classes(&sig, max);
        let got = enumerate_graphs(&sig, max);
        assert_eq!(got.len(), oracle.len(), "class count at {max} nodes");
        for g in &got {
            assert!(g.is_valid());
            assert_eq!(oracle.iter().filter(|h| isomorphic(g, h)).count(), 1);
        }
    }
}

#[test]
fn enumeration_has_no_duplicates_with_self_opposite() {
    let sig = loop_sig();
    let got = enumerate_graphs(&sig, 5);
    assert!(!got.is_empty());
    for (i, g) in got.iter().enumerate() {
        assert!(g.is_valid());
        for h in &got[..i] {
            assert!(!isomorphic(g, h));
        }
    }
}

#[test]
fn canonical_code_agrees_with_brute_force_isomorphism() {
    for sig in [two_pair_sig(), loop_sig()] {
        let gs = enumerate_graphs(&sig, 4);
        let codes: Vec<_> = gs.iter().map(|g| canonical_encode(g).unwrap()).collect();
        for i in 0..gs.len() {
            for j in 0..gs.len() {
                assert_eq!(codes[i] == codes[j], isomorphic(&gs[i], &gs[j]));
            }
        }
        let distinct: HashSet<_> = codes.iter().map(|c| c.to_hex()).collect();
        assert_eq!(distinct.len(), gs.len());
    }
}

#[test]
fn violations_are_reported() {
    let sig = two_pair_sig();
    let s = sig.label_id("s").unwrap();
    let a = sig.label_id("a").unwrap();
    let r = sig.dir("r").unwrap();

    // Missing edges at a.
    let mut b = Graph::builder(sig.clone());
    let x = b.add_node("x", s).unwrap();
    let y = b.add_node("y", a).unwrap();
    b.connect(x, r, y).unwrap();
    b.set_initial(x);
    let g = b.build().unwrap();
    let v = g.validate();
    assert!(!v.is_empty());
    assert!(v.iter().any(|e| matches!(e, GraphViolation::MissingEdge { .. })), "{v:?}");

    // Second initial-labelled node.
    let mut b = Graph::builder(sig.clone());
    let x = b.add_node("x", s).unwrap();
    let y = b.add_node("y", s).unwrap();
    b.connect(x, r, y).unwrap();
    b.connect(y, r, x).unwrap();
    b.set_initial(x);
    assert!(!b.build().unwrap().is_valid());

    // Disconnected.
    let mut b = Graph::builder(sig.clone());
    let x = b.add_node("x", s).unwrap();
    b.connect(x, r, x).unwrap();
    let u = b.add_node("u", sig.label_id("b").unwrap()).unwrap();
    b.connect(u, sig.dir("u").unwrap(), u).unwrap();
    b.set_initial(x);
    assert!(!b.build().unwrap().is_valid());

    // A direction the label lacks.
    let mut b = Graph::builder(sig.clone());
    let x = b.add_node("x", s).unwrap();
    b.connect(x, r, x).unwrap();
    b.connect(x, sig.dir("u").unwrap(), x).unwrap();
    b.set_initial(x);
    let v = b.build().unwrap().validate();
    assert!(v.iter().any(|e| matches!(e, GraphViolation::UnexpectedEdge { .. })), "{v:?}");
}

#[test]
fn signature_rejects_bad_declarations() {
    assert!(Signature::builder().pair("r", "l").pair("r", "x").build().is_err());
    assert!(Signature::builder().pair("r", "l").label("s", true, &["r", "r"]).build().is_err());
    assert!(Signature::builder()
        .pair("r", "l")
        .label("s", true, &["q"])
        .build()
        .is_err());
    assert!(Signature::builder()
        .pair("r", "l")
        .label("s", true, &["r"])
        .label("s", false, &["l"])
        .build()
        .is_err());
}

fn random_valid(sig: &Arc<Signature>, seed: u64, nodes: usize) -> Option<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_graph(sig, nodes, 200, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graphs_are_valid_and_symmetric(seed in any::<u64>(), nodes in 1usize..12, which in 0usize..2) {
        let sig = if which == 0 { two_pair_sig() } else { loop_sig() };
        if let Some(g) = random_valid(&sig, seed, nodes) {
            prop_assert!(g.is_valid());
            prop_assert_eq!(g.num_nodes(), nodes);
            for (u, d, v) in g.edges() {
                prop_assert_eq!(g.neighbor(v, sig.opposite(d)), Some(u));
            }
        }
    }

    #[test]
    fn canonical_code_ignores_insertion_order(seed in any::<u64>(), nodes in 1usize..10, shuffle in any::<u64>()) {
        let sig = two_pair_sig();
        if let Some(g) = random_valid(&sig, seed, nodes) {
            let labels: Vec<LabelId> = (0..nodes).map(|v| g.label(v)).collect();
            let mut perm: Vec<usize> = (0..nodes).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
            rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
            let h = build(&sig, &labels, &g.edges(), g.initial(), &perm);
            prop_assert!(h.is_valid());
            prop_assert_eq!(canonical_encode(&g).unwrap(), canonical_encode(&h).unwrap());
        }
    }

    #[test]
    fn graph_documents_round_trip(seed in any::<u64>(), nodes in 1usize..10, which in 0usize..2) {
        let sig = if which == 0 { two_pair_sig() } else { loop_sig() };
        if let Some(g) = random_valid(&sig, seed, nodes) {
            let text = to_canonical_json(&GraphDoc::from_graph(&g, true));
            let doc: GraphDoc = parse(&text, "graph").unwrap();
            let back = doc.to_graph(sig.clone()).unwrap();
            prop_assert_eq!(canonical_encode(&g).unwrap(), canonical_encode(&back).unwrap());
            prop_assert_eq!(to_canonical_json(&GraphDoc::from_graph(&back, true)), text);
        }
    }
}

#[test]
fn signature_documents_round_trip() {
    for sig in [two_pair_sig(), loop_sig()] {
        let text = to_canonical_json(&SignatureDoc::from_signature(&sig));
        let doc: SignatureDoc = parse(&text, "signature").unwrap();
        assert_eq!(doc.to_signature().unwrap(), *sig);
    }
}

#[test]
fn malformed_json_reports_position() {
    let err = parse::<GraphDoc>("{\n  \"nodes\": [\n", "graph").unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
}
