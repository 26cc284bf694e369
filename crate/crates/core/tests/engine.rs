mod common;

use std::collections::HashSet;
use std::sync::Arc;

use gwa_core::engine::{agree_on, count_automata, enumerate_automata, execute};
use gwa_core::formats::{parse, to_canonical_json, AutomatonDoc};
use gwa_core::suites::{enumerate_graphs, random_automaton, random_graph};
use gwa_core::{run, trace, Action, Outcome, OutcomeKind, Signature, WalkingAutomaton};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{loop_sig, reference_run, two_pair_sig};

fn sig_for(which: usize) -> Arc<Signature> {
    if which == 0 {
        two_pair_sig()
    } else {
        loop_sig()
    }
}

fn check_against_reference(a: &WalkingAutomaton, g: &gwa_core::Graph) -> Result<(), TestCaseError> {
    let got = run(a, g).unwrap();
    let want = reference_run(a, g);
    prop_assert_eq!(got.kind(), want.kind);
    prop_assert_eq!(got.steps(), want.steps);
    let at = match got {
        Outcome::Accept { at, .. } | Outcome::Reject { at, .. } | Outcome::Loop { at, .. } => at,
    };
    prop_assert_eq!((at.state, at.node), (want.state, want.node));
    prop_assert!(got.steps() <= a.num_states() * g.num_nodes() + 1);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn run_matches_reference(seed in any::<u64>(), nodes in 1usize..14, states in 1usize..6, which in 0usize..2) {
        let sig = sig_for(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(g) = random_graph(&sig, nodes, 200, &mut rng) {
            let a = random_automaton(&sig, states, 0.05, 0.05, &mut rng);
            check_against_reference(&a, &g)?;
            // Deterministic: a second run is identical.
            prop_assert_eq!(run(&a, &g).unwrap(), run(&a, &g).unwrap());
        }
    }

    #[test]
    fn trace_is_the_computation(seed in any::<u64>(), nodes in 1usize..12, states in 1usize..5) {
        let sig = two_pair_sig();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(g) = random_graph(&sig, nodes, 200, &mut rng) {
            let a = random_automaton(&sig, states, 0.05, 0.05, &mut rng);
            let out = run(&a, &g).unwrap();
            let t = trace(&a, &g, usize::MAX).unwrap();
            let bound = a.num_states() * g.num_nodes() + 1;
            prop_assert!(t.len() <= bound + 1);
            prop_assert_eq!(t.len(), out.steps() + 1);
            prop_assert_eq!(t[0].state, a.initial());
            prop_assert_eq!(t[0].node, g.initial());
            // Each consecutive pair is one move of the automaton.
            for w in t.windows(2) {
                match a.action(w[0].state, g.label(w[0].node)) {
                    Action::Move { next, dir } => {
                        prop_assert_eq!(w[1].state, next as usize);
                        prop_assert_eq!(Some(w[1].node), g.neighbor(w[0].node, dir));
                    }
                    other => prop_assert!(false, "no move at {:?}: {:?}", w[0], other),
                }
            }
            // All distinct except a closing repeat for loops.
            let distinct: HashSet<_> = t.iter().collect();
            let expect = if out.kind() == OutcomeKind::Loop { t.len() - 1 } else { t.len() };
            prop_assert_eq!(distinct.len(), expect);
            // Prefixes and the unbounded executor agree.
            let short = trace(&a, &g, 3).unwrap();
            prop_assert_eq!(&short[..], &t[..short.len()]);
            prop_assert!(short.len() <= 3);
            let ex = execute(&a, &g, t.len() - 1).unwrap();
            prop_assert_eq!(ex, t);
        }
    }

    #[test]
    fn automaton_documents_round_trip(seed in any::<u64>(), states in 1usize..6, which in 0usize..2) {
        let sig = sig_for(which);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_automaton(&sig, states, 0.1, 0.1, &mut rng);
        let text = to_canonical_json(&AutomatonDoc::from_automaton(&a, true));
        let doc: AutomatonDoc = parse(&text, "automaton").unwrap();
        let b = doc.to_automaton(sig.clone()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(to_canonical_json(&AutomatonDoc::from_automaton(&b, true)), text);
    }
}

#[test]
fn enumerator_yields_every_table_once() {
    let sig = loop_sig();
    for states in 1..=2 {
        let total = count_automata(&sig, states);
        let all: Vec<WalkingAutomaton> = enumerate_automata(sig.clone(), states, usize::MAX).collect();
        assert_eq!(all.len() as u128, total);
        let distinct: HashSet<String> = all
            .iter()
            .map(|a| to_canonical_json(&AutomatonDoc::from_automaton(a, false)))
            .collect();
        assert_eq!(distinct.len(), all.len());
    }
    // Independent count: per cell, accept + undefined + states * dirs.
    let per_state: u128 = sig.labels().iter().map(|l| 2 + 2 * l.dirs.len() as u128).product();
    assert_eq!(count_automata(&sig, 2), per_state * per_state);
    assert_eq!(enumerate_automata(sig, 2, 17).count(), 17);
}

#[test]
fn every_small_automaton_matches_reference_on_small_graphs() {
    let sig = loop_sig();
    let graphs = enumerate_graphs(&sig, 4);
    for a in enumerate_automata(sig.clone(), 1, usize::MAX) {
        for g in &graphs {
            check_against_reference(&a, g).unwrap();
        }
    }
}

#[test]
fn agreement_flags_differences() {
    let sig = two_pair_sig();
    let graphs = enumerate_graphs(&sig, 4);
    let mut acc = WalkingAutomaton::with_indexed_states(sig.clone(), 1).unwrap();
    for l in sig.label_ids() {
        acc.set_accept(0, l);
    }
    let rej = WalkingAutomaton::with_indexed_states(sig.clone(), 1).unwrap();
    let same = agree_on(&acc, &acc, &graphs).unwrap();
    assert!(same.acceptance_disagreements().is_empty());
    let diff = agree_on(&acc, &rej, &graphs).unwrap();
    assert_eq!(diff.acceptance_disagreements().len(), graphs.len());
}

#[test]
fn moves_must_use_label_directions() {
    let sig = two_pair_sig();
    let mut a = WalkingAutomaton::with_indexed_states(sig.clone(), 1).unwrap();
    let s = sig.label_id("s").unwrap();
    assert!(a.set_move(0, s, 0, sig.dir("u").unwrap()).is_err());
    assert!(a.set_move(0, s, 0, sig.dir("r").unwrap()).is_ok());
    assert!(a.set_move(0, s, 3, sig.dir("r").unwrap()).is_err());
}
