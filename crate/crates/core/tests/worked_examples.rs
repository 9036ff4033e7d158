mod common;

use std::collections::BTreeSet;

use common::fixture;
use metachain::alg1::{run_algorithm1, run_algorithm1_with, Alg1Options, TieBreak};
use metachain::alg2::run_algorithm2;
use metachain::compare::compare_alg1_alg2;
use metachain::stop::StopCriterion;
use metachain::weight::w;
use metachain::wgraph::{enumerate_optimal, extract_wgraph, weak_nested_check, WGraphError};
use metachain::ChainGraph;

fn names(g: &ChainGraph, ids: &[usize]) -> Vec<String> {
    let mut v = common::names(g, ids);
    v.sort();
    v
}

#[test]
fn seven_state_exponents_and_cycles() {
    let g = fixture("seven_state.tsv");
    let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
    assert_eq!(
        r.gamma,
        ["1", "1.1", "2.7", "3", "3.1", "3.2", "3.5", "3.8", "4.1"].map(w)
    );
    assert_eq!(r.cycle_steps(), vec![4, 7, 9]);
    assert!(!r.symmetry_detected());

    let c1 = &r.cycles[0];
    assert_eq!(names(&g, &r.nodes[c1.node].members), ["1", "2", "3"]);
    let upd: Vec<(String, String, String)> = c1
        .exits
        .iter()
        .map(|e| {
            (
                g.state_name(e.tail).into(),
                g.state_name(e.head).into(),
                e.after.to_string(),
            )
        })
        .collect();
    for want in [("3", "4", "15.9"), ("1", "5", "4"), ("1", "6", "3.5")] {
        assert!(
            upd.contains(&(want.0.into(), want.1.into(), want.2.into())),
            "{want:?} in {upd:?}"
        );
    }

    let c2 = &r.cycles[1];
    assert_eq!(names(&g, &r.nodes[c2.node].members), ["1", "2", "3", "4", "5", "6"]);
    let e67 = c2
        .exits
        .iter()
        .find(|e| g.state_name(e.tail) == "6" && g.state_name(e.head) == "7")
        .unwrap();
    assert_eq!(e67.after, w("3.8"));
    // the last cycle has nothing leaving it
    assert!(r.cycles[2].exits.is_empty());
}

#[test]
fn seven_state_deltas_and_steps() {
    let g = fixture("seven_state.json");
    let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
    let got: Vec<(usize, String, usize)> = r.eigen.iter().map(|e| (e.m, e.delta.to_string(), e.step)).collect();
    let want = [
        (6, "1", 1),
        (5, "1.1", 2),
        (4, "2.7", 3),
        (3, "3.1", 5),
        (2, "3.2", 6),
        (1, "3.8", 8),
    ];
    assert_eq!(got, want.map(|(m, d, k)| (m, d.to_string(), k)));
    // the first three optimal W-graphs are the T-graphs themselves
    for (m, k) in [(6, 1), (5, 2), (4, 3)] {
        let wg = extract_wgraph(&g, &r, m).unwrap();
        assert_eq!(wg.arcs().into_iter().collect::<BTreeSet<_>>(), r.tgraph(k).arc_set());
    }
}

#[test]
fn seven_state_extraction_matches_enumeration() {
    let g = fixture("seven_state.tsv");
    let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
    let opt: Vec<_> = (1..=7).map(|m| enumerate_optimal(&g, m, 9).unwrap()).collect();
    for m in 1..7 {
        let wg = extract_wgraph(&g, &r, m).unwrap();
        assert!(opt[m - 1].is_unique(), "m = {m}");
        assert_eq!(wg, opt[m - 1].graphs[0], "m = {m}");
        assert_eq!(r.delta(m), Some(opt[m - 1].weight - opt[m].weight));
        assert_eq!(wg.sinks().len(), m);
        // components of g*_m are those of T_k(m)
        let k = r.eigen_record(m).unwrap().step;
        let mut comps: Vec<Vec<usize>> = (0..7)
            .fold(std::collections::BTreeMap::<usize, Vec<usize>>::new(), |mut acc, v| {
                acc.entry(wg.sink_of()[v].unwrap()).or_default().push(v);
                acc
            })
            .into_values()
            .collect();
        comps.sort();
        let mut tc = r.tgraph(k).components();
        tc.sort();
        assert_eq!(comps, tc, "m = {m}");
    }
    for m in 1..6 {
        let coarse = extract_wgraph(&g, &r, m + 1).unwrap();
        let fine = extract_wgraph(&g, &r, m).unwrap();
        assert!(weak_nested_check(&coarse, &fine).holds(), "m = {m}");
    }
}

#[test]
fn rounded_chain_min_set_sweep() {
    let g = fixture("seven_state_rounded.tsv");
    let r = run_algorithm2(&g, StopCriterion::BucketEmpty);
    assert_eq!(r.theta, ["1", "3", "4"].map(w));
    assert_eq!(r.multiplicities, vec![2, 4, 2]);
    // {1,2,3} at step 2, then everything at step 3
    assert_eq!(r.classes.iter().map(|c| c.step).collect::<Vec<_>>(), vec![2, 3]);
    assert_eq!(r.nodes[r.classes[1].node].members.len(), 7);
    let c = &r.classes[0];
    assert_eq!(c.step, 2);
    assert_eq!(names(&g, &r.nodes[c.node].members), ["1", "2", "3"]);
    let min_after = c.updates.iter().map(|u| u.after).min().unwrap();
    assert_eq!(min_after, w("4"));
    assert_eq!(c.updates.iter().filter(|u| u.after == min_after).count(), 3);

    // T_2: {1,2,3} closed, {5,6} an open class, 7 absorbing
    let t2 = r.tgraph(2);
    let cc2 = t2.closed_classes();
    assert_eq!(cc2.nontrivial, vec![vec![0, 1, 2]]);
    assert_eq!(names(&g, &cc2.absorbing), ["7"]);

    let t3 = r.final_tgraph();
    let cc = t3.closed_classes();
    assert_eq!(cc.nontrivial, vec![(0..7).collect::<Vec<_>>()]);
    assert!(cc.absorbing.is_empty());
    assert!(r.transient_states().is_empty());
}

#[test]
fn rounded_chain_sweeps_agree() {
    let g = fixture("seven_state_rounded.tsv");
    for tb in [TieBreak::Lexicographic, TieBreak::ReverseLexicographic] {
        let c = compare_alg1_alg2(&g, tb);
        assert!(c.all_hold(), "{tb:?}: {:?}", c.violations);
        assert!(c.symmetry_detected);
    }
}

#[test]
fn tie_at_one_vertex_gives_two_exponent_lists() {
    // state 2 has two min-arcs of weight 2
    let g = fixture("tie_three_state.tsv");
    let run = |tb| {
        run_algorithm1_with(
            &g,
            &Alg1Options {
                stop: StopCriterion::BucketEmpty,
                tie_break: tb,
            },
        )
    };
    let lex = run(TieBreak::Lexicographic);
    let rev = run(TieBreak::ReverseLexicographic);
    // lexicographic picks 2 -> 1, reverse picks 2 -> 3
    assert_eq!(lex.gamma, ["1", "2", "2"].map(w));
    assert_eq!(rev.gamma, ["1", "2"].map(w));
    assert!(lex.symmetry_detected() && rev.symmetry_detected());
    // the optimal W-graphs are nonetheless unique
    for m in 1..=3 {
        assert!(enumerate_optimal(&g, m, 9).unwrap().is_unique(), "m = {m}");
    }
    assert_eq!(extract_wgraph(&g, &lex, 1), Err(WGraphError::Symmetry(0)));
    // the distinct exponents agree with the min-set sweep either way
    for tb in [TieBreak::Lexicographic, TieBreak::ReverseLexicographic] {
        assert!(compare_alg1_alg2(&g, tb).distinct_exponents_match);
    }
}

#[test]
fn distinct_deltas_with_two_optimal_forests() {
    let g = fixture("two_optimal_forests.tsv");
    let opt: Vec<_> = (1..=3).map(|m| enumerate_optimal(&g, m, 9).unwrap()).collect();
    assert_eq!(opt[1].graphs.len(), 2);
    assert_eq!(opt[0].weight - opt[1].weight, w("2"));
    assert_eq!(opt[1].weight - opt[2].weight, w("1"));
    let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
    assert!(r.symmetry_detected());
}
