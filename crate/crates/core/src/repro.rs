//! Fixed signatures, homomorphisms and suites shared by the command line
//! and the test suites.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::WalkingAutomaton;
use crate::graph::Graph;
use crate::hom::{invert, verify_inverse, HomError, Homomorphism, Pattern};
use crate::signature::Signature;
use crate::suites::{enumerate_graphs, random_automaton, random_suite};
use crate::trees::{BottomUpTreeAutomaton, TreeSignature};
use crate::witnesses::direction_names;

pub const DEFAULT_SEED: u64 = 20_240_917;

fn pattern(sig: &Arc<Signature>, nodes: &[(&str, &str)], edges: &[(&str, &str, &str)], ports: &[(&str, &str)]) -> Pattern {
    let mut b = Pattern::builder(sig.clone());
    for (id, l) in nodes {
        b.add_named(*id, l).expect("fixture node");
    }
    for (u, d, v) in edges {
        b.connect_named(u, d, v).expect("fixture edge");
    }
    for (d, v) in ports {
        b.port_named(d, v).expect("fixture port");
    }
    b.build()
}

/// Two labels over two direction pairs `r/l` and `u/w`; only `s` is initial.
pub fn small_source() -> Arc<Signature> {
    Arc::new(
        Signature::builder()
            .pair("r", "l")
            .pair("u", "w")
            .label("s", true, &["r", "l", "u", "w"])
            .label("m", false, &["r", "l", "u", "w"])
            .build()
            .expect("fixture signature"),
    )
}

/// Every label becomes two nodes joined by an extra `x/y` edge.
pub fn small_hom() -> Homomorphism {
    let src = small_source();
    let tgt = Arc::new(
        Signature::builder()
            .pair("r", "l")
            .pair("u", "w")
            .pair("x", "y")
            .label("S", true, &["r", "l", "x"])
            .label("T", false, &["u", "w", "y"])
            .label("M1", false, &["r", "u", "x"])
            .label("M2", false, &["l", "w", "y"])
            .build()
            .expect("fixture signature"),
    );
    let hs = pattern(&tgt, &[("s", "S"), ("t", "T")], &[("s", "x", "t")], &[("r", "s"), ("l", "s"), ("u", "t"), ("w", "t")]);
    let hm = pattern(
        &tgt,
        &[("m1", "M1"), ("m2", "M2")],
        &[("m1", "x", "m2")],
        &[("r", "m1"), ("u", "m1"), ("l", "m2"), ("w", "m2")],
    );
    Homomorphism::new(src, tgt, vec![("s".into(), hs), ("m".into(), hm)]).expect("fixture hom")
}

/// Three labels over `±a, ±b`, two of them initial.
pub fn random_source() -> Arc<Signature> {
    Arc::new(
        Signature::builder()
            .pair("+a", "-a")
            .pair("+b", "-b")
            .label("s0", true, &["+a", "-a"])
            .label("s1", true, &["+a", "-a", "+b", "-b"])
            .label("m", false, &["+a", "-a", "+b", "-b"])
            .build()
            .expect("fixture signature"),
    )
}

pub fn random_hom() -> Homomorphism {
    let src = random_source();
    let tgt = Arc::new(
        Signature::builder()
            .pair("+a", "-a")
            .pair("+b", "-b")
            .pair("+c", "-c")
            .label("S0", true, &["+a", "+c"])
            .label("X", false, &["-a", "-c"])
            .label("S1", true, &["+a", "-a", "+b", "-b"])
            .label("M1", false, &["+a", "+b", "+c"])
            .label("M2", false, &["-a", "-b", "-c"])
            .build()
            .expect("fixture signature"),
    );
    let h0 = pattern(&tgt, &[("s", "S0"), ("x", "X")], &[("s", "+c", "x")], &[("+a", "s"), ("-a", "x")]);
    let h1 = pattern(&tgt, &[("s", "S1")], &[], &[("+a", "s"), ("-a", "s"), ("+b", "s"), ("-b", "s")]);
    let hm = pattern(
        &tgt,
        &[("m1", "M1"), ("m2", "M2")],
        &[("m1", "+c", "m2")],
        &[("+a", "m1"), ("+b", "m1"), ("-a", "m2"), ("-b", "m2")],
    );
    Homomorphism::new(src, tgt, vec![("s0".into(), h0), ("s1".into(), h1), ("m".into(), hm)]).expect("fixture hom")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Every graph over [`small_source`] with at most 6 nodes.
    Small,
    /// 200 seeded random graphs over [`random_source`].
    Random,
}

impl Suite {
    pub fn hom(self) -> Homomorphism {
        match self {
            Suite::Small => small_hom(),
            Suite::Random => random_hom(),
        }
    }

    pub fn graphs(self, seed: u64) -> Vec<Graph> {
        match self {
            Suite::Small => enumerate_graphs(&small_source(), 6),
            Suite::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_suite(&random_source(), 200, 1..=14, &mut rng)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InverseRow {
    pub states: usize,
    pub automaton: usize,
    pub inverted_states: usize,
    pub expected_states: usize,
    pub accepted: usize,
    pub entries_aligned: usize,
    pub disagreements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InverseSweep {
    pub suite: Suite,
    pub seed: u64,
    pub graphs: usize,
    pub rows: Vec<InverseRow>,
}

impl InverseSweep {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().map(|r| r.disagreements).sum()
    }

    pub fn state_count_mismatches(&self) -> usize {
        self.rows.iter().filter(|r| r.inverted_states != r.expected_states).count()
    }
}

/// Runs `verify_inverse` for `per_size` seeded random automata of every
/// size in `sizes` over the suite's target signature.
pub fn inverse_sweep(suite: Suite, seed: u64, sizes: &[usize], per_size: usize) -> Result<InverseSweep, HomError> {
    let h = suite.hom();
    let graphs = suite.graphs(seed);
    let k = h.source().num_directions();
    let multi = h.source().initial_labels().count() > 1;
    let jobs: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..per_size).map(move |i| (n, i))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, i)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32) ^ i as u64);
            let a = random_automaton(h.target(), n, 0.08, 0.08, &mut rng);
            let rep = verify_inverse(&a, &h, &graphs)?;
            let expected = if multi {
                n * k + 1
            } else if rep.inverted_states == 1 {
                1
            } else {
                n * k
            };
            Ok(InverseRow {
                states: n,
                automaton: i,
                inverted_states: rep.inverted_states,
                expected_states: expected,
                accepted: rep.accepted,
                entries_aligned: rep.entries_aligned,
                disagreements: rep.disagreements.len(),
            })
        })
        .collect::<Result<Vec<_>, HomError>>()?;
    Ok(InverseSweep {
        suite,
        seed,
        graphs: graphs.len(),
        rows,
    })
}

/// Identity homomorphism over `k` directions with one or two initial
/// labels, and an `n`-state automaton that leaves the initial node at once.
pub fn state_count_case(n: usize, k: usize, multi_initial: bool) -> (Homomorphism, WalkingAutomaton) {
    let dirs = direction_names(k);
    let all: Vec<String> = dirs.iter().map(|d| d.0.clone()).collect();
    let mut labels = vec![("s".to_string(), true, all.clone())];
    if multi_initial {
        labels.push(("t".to_string(), true, all.clone()));
    }
    labels.push(("m".to_string(), false, all));
    let sig = Arc::new(Signature::from_parts(&dirs, &labels).expect("fixture signature"));
    let h = Homomorphism::identity(sig.clone());
    let mut a = WalkingAutomaton::with_indexed_states(sig.clone(), n).expect("n >= 1");
    let first = sig.dir_ids().next().expect("k >= 1");
    for l in sig.label_ids() {
        for q in 0..n {
            a.set_move(q, l, (q + 1) % n, first).expect("legal move");
        }
    }
    (h, a)
}

/// Inverted state count for [`state_count_case`].
pub fn inverted_state_count(n: usize, k: usize, multi_initial: bool) -> Result<usize, HomError> {
    let (h, a) = state_count_case(n, k, multi_initial);
    Ok(invert(&a, &h)?.num_states())
}

/// Tree signature with `k = 2`: roots `r2 r1 r0` and, for each child
/// position `d`, labels `a_d b_d c_d` of ranks 2, 1, 0.
pub fn tree_signature() -> Arc<TreeSignature> {
    Arc::new(
        TreeSignature::from_labels(
            2,
            &[
                ("r2", None, 2),
                ("r1", None, 1),
                ("r0", None, 0),
                ("a_1", Some(1), 2),
                ("b_1", Some(1), 1),
                ("c_1", Some(1), 0),
                ("a_2", Some(2), 2),
                ("b_2", Some(2), 1),
                ("c_2", Some(2), 0),
            ],
        )
        .expect("fixture tree signature"),
    )
}

pub fn accept_all(ts: Arc<TreeSignature>) -> BottomUpTreeAutomaton {
    BottomUpTreeAutomaton::from_fn(ts, vec!["q".into()], 0, |_, _| 0).expect("one state")
}

/// Subtree size modulo 2; accepts trees of odd size.
pub fn parity(ts: Arc<TreeSignature>) -> BottomUpTreeAutomaton {
    BottomUpTreeAutomaton::from_fn(ts, vec!["even".into(), "odd".into()], 1, |_, a| {
        (1 + a.iter().sum::<usize>()) % 2
    })
    .expect("two states")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_homs_are_valid() {
        assert!(small_hom().validate().is_empty());
        assert!(random_hom().validate().is_empty());
    }

    #[test]
    fn state_counts() {
        for n in 2..=4 {
            for k in [4, 9] {
                assert_eq!(inverted_state_count(n, k, true).unwrap(), n * k + 1);
                assert_eq!(inverted_state_count(n, k, false).unwrap(), n * k);
            }
        }
    }
}
