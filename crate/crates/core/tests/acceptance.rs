//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use gwa_core::hom::{apply, invert};
use gwa_core::repro::{accept_all, inverse_sweep, inverted_state_count, parity, tree_signature, Suite};
use gwa_core::suites::random_automaton;
use gwa_core::trees::{build_characterization, enumerate_trees, fishbone_lengths, verify_characterization, CharacterizationBundle};
use gwa_core::witnesses::{exhaustive_probe, HVariant, Witnesses};
use gwa_core::{run, Graph, OutcomeKind, WalkingAutomaton};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{reference_run, walk_pattern};

const SEED: u64 = 0x5eed;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn state_counts() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    for n in [2, 3, 4] {
        for k in [4, 9] {
            for multi in [true, false] {
                cases += 1;
                let got = inverted_state_count(n, k, multi).expect("fixture inverts");
                let want = n * k + usize::from(multi);
                if got != want {
                    bad.push(format!("n={n} k={k} multi={multi}: {got} != {want}"));
                }
            }
        }
    }
    if bad.is_empty() {
        pass(format!("{cases} cases, nk+1 and nk exact"))
    } else {
        check(false, bad.join("; "))
    }
}

fn inverse_suites() -> Outcome {
    let mut disagreements = 0;
    let mut runs = 0;
    let mut summary = Vec::new();
    for suite in [Suite::Small, Suite::Random] {
        let h = suite.hom();
        let graphs = suite.graphs(SEED);
        let images: Vec<Graph> = graphs.iter().map(|g| apply(&h, g).expect("valid image").graph).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for states in [2, 3, 4] {
            for _ in 0..8 {
                let a = random_automaton(h.target(), states, 0.08, 0.08, &mut rng);
                let inv = invert(&a, &h).expect("inverts");
                for (g, img) in graphs.iter().zip(&images) {
                    runs += 1;
                    let direct = reference_run(&a, img).kind == OutcomeKind::Accept;
                    if run(&inv.automaton, g).expect("runs").is_accept() != direct {
                        disagreements += 1;
                    }
                }
            }
        }
        summary.push(format!("{suite:?} {} graphs", graphs.len()));
    }
    // Trace alignment on the exhaustive suite.
    let sweep = inverse_sweep(Suite::Small, SEED, &[2, 3, 4], 8).expect("sweep");
    let aligned: usize = sweep.rows.iter().map(|r| r.entries_aligned).sum();
    let trace_bad = sweep.disagreements() + sweep.state_count_mismatches();
    check(
        disagreements == 0 && trace_bad == 0 && aligned > 0,
        format!(
            "{}; {runs} runs, {disagreements} acceptance disagreements; trace alignment: {aligned} entries, {trace_bad} failures",
            summary.join(", ")
        ),
    )
}

fn counter_tables() -> Outcome {
    let (n, k) = (4, 9);
    let w = Witnesses::theorem2(k).expect("k = 9");
    let a = w.counter_automaton(n).expect("n = 4");
    let h = w.theorem2_hom().expect("hom");
    let sig = w.sig();
    let (mut counter, mut probe, mut bad) = (0, 0, 0);
    for d in sig.dir_ids() {
        for i in 0..n {
            for j in 0..n {
                let img = apply(&h, &w.g_counter(n, i, j, d).expect("graph")).expect("image");
                counter += 1;
                bad += usize::from((reference_run(&a, &img.graph).kind == OutcomeKind::Accept) != (i == j));
            }
        }
    }
    for i in 0..n {
        for d in sig.dir_ids() {
            for d2 in sig.dir_ids() {
                let img = apply(&h, &w.g_probe(n, i, d, d2).expect("graph")).expect("image");
                probe += 1;
                bad += usize::from((reference_run(&a, &img.graph).kind == OutcomeKind::Accept) != (d == d2));
            }
        }
    }
    check(
        bad == 0 && counter == 16 * k && probe == 81 * n,
        format!("{counter} counter cases (16 per d), {probe} probe cases (81 per i), {bad} mismatches"),
    )
}

fn escape_exits() -> Outcome {
    let w = Witnesses::theorem2(9).expect("k = 9");
    let (mut cases, mut bad) = (0, 0);
    for n in [2, 4, 8] {
        let a = w.escape_automaton(n).expect("automaton");
        for d in w.sig().dir_ids() {
            for i in 0..n {
                let f = w.build_f(n, d, Some(i)).expect("F");
                let start = f.pattern.initial_node().expect("initial node");
                cases += 1;
                if walk_pattern(&a, &f.pattern, start, 0) != Some((i, d)) {
                    bad += 1;
                }
            }
        }
    }
    check(bad == 0, format!("{cases} cases (n in 2, 4, 8; all d; all i), {bad} wrong exits"))
}

fn bundles() -> Vec<(&'static str, CharacterizationBundle)> {
    let ts = tree_signature();
    vec![
        ("accept-all", build_characterization(&accept_all(ts.clone())).expect("bundle")),
        ("parity", build_characterization(&parity(ts)).expect("bundle")),
    ]
}

fn characterization() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, b) in bundles() {
        let rep = verify_characterization(&b, 7).expect("verifies");
        ok &= rep.is_clean() && rep.trees_checked > 0;
        parts.push(format!(
            "{name}: {} trees, {} annotated, {} counterexamples",
            rep.trees_checked,
            rep.annotated_checked,
            rep.counterexamples.len()
        ));
    }
    check(ok, parts.join("; "))
}

/// Walks from each node's center along `+i` and counts spine nodes.
fn measured_fishbones(b: &CharacterizationBundle, t: &gwa_core::trees::Tree) -> Vec<(usize, usize)> {
    let src = t.to_graph(&b.s_comp);
    let img = apply(&b.g, &src).expect("g image");
    let mut center = vec![0; src.num_nodes()];
    for (v, &(s, p)) in img.origin.iter().enumerate() {
        if p == 0 {
            center[s] = v;
        }
    }
    let ts = &b.s_comp;
    let mut out = Vec::new();
    for (v, &cv) in center.iter().enumerate() {
        let (_, q) = &b.comp_labels[src.label(v).index()];
        for (pos, &qi) in q.iter().enumerate() {
            let i = pos + 1;
            let child = src.neighbor(v, ts.plus(i)).expect("child");
            let (cbase, cq) = &b.comp_labels[src.label(child).index()];
            let predicted = b.n - qi + b.automaton.delta(*cbase, cq);
            let mut u = img.graph.neighbor(cv, ts.plus(i)).expect("edge");
            let mut len = 0;
            while img.graph.label(u) == b.spine_label(i) {
                len += 1;
                u = img.graph.neighbor(u, ts.plus(i)).expect("edge");
            }
            out.push((len, predicted));
        }
    }
    out
}

fn fishbones() -> Outcome {
    let (mut edges, mut bad, mut lib_bad) = (0, 0, 0);
    for (_, b) in bundles() {
        for t in enumerate_trees(&b.s_comp, 7) {
            let m = measured_fishbones(&b, &t);
            edges += m.len();
            bad += m.iter().filter(|(x, y)| x != y).count();
            lib_bad += usize::from(fishbone_lengths(&b, &t) != m);
        }
    }
    check(
        bad == 0 && lib_bad == 0 && edges > 0,
        format!("{edges} edges measured, {bad} off the formula, {lib_bad} trees where the library measure differs"),
    )
}

fn probes_and_step_bound() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let (n, k) = (4, 9);
    let g = Witnesses::gadget(k).expect("gadget");
    let hs = g.build_h(n, HVariant::Start).expect("H");
    let hf = g.build_h(n, HVariant::Fake).expect("H");
    let l = Witnesses::lemma(k).expect("lemma");
    let d = l.sig().dir("+a").expect("+a");
    let plain = l.build_f(n, d, None).expect("F");
    let fs: Vec<_> = (0..n).map(|i| l.build_f(n, d, Some(i)).expect("F")).collect();
    for states in [1, 2] {
        let a = exhaustive_probe(&hs, &hf, states).expect("probe");
        ok &= a == exhaustive_probe(&hs, &hf, states).expect("probe");
        parts.push(format!("H {states}q: {}/{}", a.distinguishing, a.automata));
        for f in &fs {
            let r = exhaustive_probe(f, &plain, states).expect("probe");
            ok &= r.automata > 0;
            if states == 1 {
                ok &= r == exhaustive_probe(f, &plain, states).expect("probe");
            }
        }
        parts.push(format!("F {states}q: {} pairs", fs.len()));
    }
    // Termination bound over every suite.
    let mut runs = 0;
    let mut over = 0;
    let mut bounded = |a: &WalkingAutomaton, g: &Graph| {
        runs += 1;
        let out = run(a, g).expect("runs");
        over += usize::from(out.steps() > a.num_states() * g.num_nodes() + 1);
    };
    for suite in [Suite::Small, Suite::Random] {
        let h = suite.hom();
        let graphs = suite.graphs(SEED);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for states in [1, 2, 4] {
            let a = random_automaton(h.target(), states, 0.02, 0.02, &mut rng);
            let inv = invert(&a, &h).expect("inverts");
            let src = random_automaton(h.source(), states, 0.02, 0.02, &mut rng);
            for g in &graphs {
                bounded(&inv.automaton, g);
                bounded(&src, g);
                bounded(&a, &apply(&h, g).expect("image").graph);
            }
        }
    }
    let sweep = Witnesses::theorem2(k).expect("k = 9").sweep(n).expect("sweep");
    ok &= sweep.within_step_bound && over == 0;
    parts.push(format!("step bound: {runs} suite runs, {over} over, counter sweep {}", if sweep.within_step_bound { "held" } else { "violated" }));
    check(ok, format!("observations only; {}", parts.join(", ")))
}

/// Name, check and time limit.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 inverse state count", state_counts, Duration::from_secs(1)),
        ("2 inverse image suites", inverse_suites, Duration::from_secs(120)),
        ("3 counter tables", counter_tables, Duration::from_secs(60)),
        ("4 escape exits", escape_exits, Duration::from_secs(60)),
        ("5 tree characterization", characterization, Duration::from_secs(300)),
        ("6 fishbone lengths", fishbones, Duration::from_secs(300)),
        ("7 probes and step bound", probes_and_step_bound, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let ok = out.ok && took <= limit;
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {} [{:.2?}, limit {:?}]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took,
            limit
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
