//! A literal contraction-based single-arc sweep, coded separately from the
//! merged-arc-set implementation, and a DFS cycle finder. Both serve as
//! oracles for the library.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{fixture, random_strong_graph};
use metachain::alg1::run_algorithm1;
use metachain::contraction::{ContractionRecord, WorkArc, WorkingGraph};
use metachain::stop::StopCriterion;
use metachain::tgraph::detect_cycle;
use metachain::{ChainGraph, Weight};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Reference {
    gamma: Vec<Weight>,
    /// Original endpoints of the arc moved at each step.
    moved: Vec<(usize, usize)>,
    cycle_steps: Vec<usize>,
    /// Reweighted arcs `(orig_tail, orig_head) -> weight` per cycle.
    updates: Vec<BTreeMap<(usize, usize), Weight>>,
    tie: bool,
}

fn min_arc(gr: &WorkingGraph, v: usize) -> Option<(WorkArc, bool)> {
    let mut arcs: Vec<&WorkArc> = gr.out_arcs(v).collect();
    arcs.sort_by_key(|a| a.weight);
    let first = (*arcs.first()?).clone();
    let tie = arcs.get(1).is_some_and(|b| b.weight == first.weight);
    Some((first, tie))
}

fn reference_sweep(g: &ChainGraph) -> Reference {
    let mut gr = WorkingGraph::from_graph(g);
    let mut next_id = g.n();
    // vertex -> its arc in T
    let mut tout: BTreeMap<usize, WorkArc> = BTreeMap::new();
    let mut records: Vec<ContractionRecord> = Vec::new();
    let mut out = Reference {
        gamma: vec![],
        moved: vec![],
        cycle_steps: vec![],
        updates: vec![],
        tie: false,
    };
    loop {
        let mut bucket: Vec<WorkArc> = Vec::new();
        for &v in gr.vertices.keys() {
            if tout.contains_key(&v) {
                continue;
            }
            if let Some((a, tie)) = min_arc(&gr, v) {
                out.tie |= tie;
                bucket.push(a);
            }
        }
        bucket.sort_by_key(|a| a.weight);
        let Some(a) = bucket.first().cloned() else { break };
        out.tie |= bucket.get(1).is_some_and(|b| b.weight == a.weight);
        out.gamma.push(a.weight);
        out.moved.push((a.orig_tail, a.orig_head));
        tout.insert(a.tail, a.clone());

        // walk forward from the head
        let mut cyc = vec![a.tail];
        let mut h = a.head;
        let closes = loop {
            if h == a.tail {
                break true;
            }
            match tout.get(&h) {
                Some(b) => {
                    cyc.push(h);
                    h = b.head;
                }
                None => break false,
            }
        };
        if !closes {
            continue;
        }
        out.cycle_steps.push(out.gamma.len());
        let has_exit = gr.arcs.iter().any(|b| cyc.contains(&b.tail) && !cyc.contains(&b.head));
        if !has_exit {
            // nothing left to do for this cycle
            continue;
        }
        let umin: BTreeMap<usize, Weight> = cyc.iter().map(|&v| (v, tout[&v].weight)).collect();
        let id = next_id;
        next_id += 1;
        let (mut c, rec) = gr.contract(&cyc, id).unwrap();
        let mut upd = BTreeMap::new();
        for b in c.arcs.iter_mut().filter(|b| b.tail == id) {
            let member = *cyc.iter().find(|&&v| gr.vertices[&v].contains(&b.orig_tail)).unwrap();
            b.weight = b.weight - umin[&member] + a.weight;
            upd.insert((b.orig_tail, b.orig_head), b.weight);
        }
        out.updates.push(upd);
        for v in &cyc {
            tout.remove(v);
        }
        for b in tout.values_mut() {
            if cyc.contains(&b.head) {
                b.head = id;
            }
        }
        records.push(rec);
        gr = c;
    }
    // unwinding every contraction restores the original arc set
    for rec in records.iter().rev() {
        gr = gr.expand(rec).unwrap();
    }
    let orig: BTreeSet<(usize, usize)> = g.arcs().iter().map(|a| (a.tail, a.head)).collect();
    let back: BTreeSet<(usize, usize)> = gr.arcs.iter().map(|a| (a.orig_tail, a.orig_head)).collect();
    assert_eq!(orig, back);
    out
}

fn check_against_library(g: &ChainGraph) {
    let reference = reference_sweep(g);
    let r = run_algorithm1(g, StopCriterion::BucketEmpty);
    if reference.tie || r.symmetry_detected() {
        // both must agree on whether ties occurred
        assert_eq!(reference.tie, r.symmetry_detected());
        return;
    }
    assert_eq!(r.gamma, reference.gamma);
    assert_eq!(r.cycle_steps(), reference.cycle_steps);
    for k in 0..=r.steps() {
        let want: BTreeSet<_> = reference.moved[..k].iter().copied().collect();
        assert_eq!(r.tgraph(k).arc_set(), want, "T_{k}");
    }
    for (c, upd) in r.cycles.iter().zip(&reference.updates) {
        let got: BTreeMap<(usize, usize), Weight> = c.exits.iter().map(|e| ((e.tail, e.head), e.after)).collect();
        assert_eq!(&got, upd, "cycle at step {}", c.step);
    }
}

#[test]
fn seven_state_matches_reference() {
    check_against_library(&fixture("seven_state.tsv"));
}

#[test]
fn random_graphs_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..300 {
        let n = 3 + i % 6;
        let g = random_strong_graph(&mut rng, n, 0.35, 60, None);
        check_against_library(&g);
    }
}

#[test]
fn integer_weights_agree_on_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..200 {
        let g = random_strong_graph(&mut rng, 3 + i % 4, 0.5, 60, None);
        // round to integers to force ties
        let rounded = ChainGraph::new(
            g.states().to_vec(),
            g.arcs()
                .iter()
                .map(|a| {
                    metachain::ArcSpec::new(
                        g.state_name(a.tail),
                        g.state_name(a.head),
                        Weight::integer(a.weight.numer() / a.weight.denom() / 3 + 1),
                    )
                })
                .collect(),
        )
        .unwrap();
        check_against_library(&rounded);
    }
}

/// Cycle through `tail -> head` found by DFS over the successor map plus the new arc.
fn dfs_cycle(succ: &[Option<usize>], tail: usize, head: usize) -> Option<BTreeSet<usize>> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![(head, vec![head])];
    while let Some((v, path)) = stack.pop() {
        if v == tail {
            return Some(path.into_iter().collect());
        }
        if !seen.insert(v) {
            continue;
        }
        if let Some(w) = succ[v] {
            let mut p = path.clone();
            p.push(w);
            stack.push((w, p));
        }
    }
    None
}

proptest! {
    #[test]
    fn detect_cycle_matches_dfs(seed in any::<u64>(), n in 2usize..12) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // random acyclic successor map: point only to larger indices in a random order
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut succ = vec![None; n];
        for i in 0..n - 1 {
            if rng.random_bool(0.7) {
                succ[order[i]] = Some(order[rng.random_range(i + 1..n)]);
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&v| succ[v].is_none()).collect();
        let tail = roots[rng.random_range(0..roots.len())];
        let head = (tail + 1 + rng.random_range(0..n - 1)) % n;
        let got = detect_cycle(tail, head, n, |x| succ[x]);
        let want = dfs_cycle(&succ, tail, head);
        prop_assert_eq!(got.as_ref().map(|c| c.iter().copied().collect::<BTreeSet<_>>()), want);
        if let Some(c) = got {
            // forward order: each member's successor is the next member
            prop_assert_eq!(c[0], tail);
            prop_assert_eq!(c[1 % c.len()], head);
            for w in c.windows(2).skip(1) {
                prop_assert_eq!(succ[w[0]], Some(w[1]));
            }
        }
    }
}
