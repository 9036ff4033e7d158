mod common;

use std::collections::BTreeSet;

use common::{detailed_balance_graph, random_integer_graph, random_strong_graph};
use metachain::alg1::{run_algorithm1, updated_exponent, updated_prefactor, TieBreak};
use metachain::alg2::{class_exit_exponent, run_algorithm2};
use metachain::compare::compare_alg1_alg2;
use metachain::dot::graph_to_dot;
use metachain::io::{parse_json, parse_tsv, to_json, to_tsv};
use metachain::stop::StopCriterion;
use metachain::wgraph::{all_wgraphs, enumerate_optimal, extract_wgraph, weak_nested_check};
use metachain::Weight;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight() -> impl Strategy<Value = Weight> {
    (1i128..10_000, 1i128..50).prop_map(|(p, q)| Weight::new(p, q))
}

proptest! {
    #[test]
    fn update_rule_keeps_order(u in weight(), umin in weight(), gamma in weight()) {
        prop_assume!(u >= umin);
        let after = updated_exponent(u, umin, gamma);
        prop_assert_eq!(after - gamma, u - umin);
        prop_assert!(after >= gamma);
        prop_assert_eq!(class_exit_exponent(u, umin, gamma), after);
    }

    #[test]
    fn prefactor_update_is_a_ratio(k in 0.01f64..100.0, kl in 0.01f64..100.0, km in 0.01f64..100.0) {
        let p = updated_prefactor(k, kl, km);
        prop_assert!((p - k * kl / km).abs() <= 1e-12 * p.abs());
    }

    #[test]
    fn counting_identity_on_irreducible_graphs(seed in any::<u64>(), n in 2usize..9) {
        let g = random_strong_graph(&mut rng(seed), n, 0.3, 80, None);
        let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
        prop_assert_eq!(r.steps() - r.n_cycles(), n - 1);
        prop_assert_eq!(r.eigen.len(), n - 1);
    }

    #[test]
    fn reversible_chains_close_n_minus_one_cycles(seed in any::<u64>(), n in 2usize..9) {
        let g = detailed_balance_graph(&mut rng(seed), n, 0.4);
        let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
        prop_assume!(!r.symmetry_detected());
        prop_assert_eq!(r.n_cycles(), n - 1);
        prop_assert_eq!(r.steps(), 2 * n - 2);
    }

    #[test]
    fn extraction_matches_enumeration(seed in any::<u64>(), n in 2usize..7) {
        let g = random_strong_graph(&mut rng(seed), n, 0.4, 60, None);
        let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
        prop_assume!(!r.symmetry_detected());
        let opt: Vec<_> = (1..=n).map(|m| enumerate_optimal(&g, m, 9).unwrap()).collect();
        for m in 1..n {
            prop_assert!(opt[m - 1].is_unique());
            let w = extract_wgraph(&g, &r, m).unwrap();
            prop_assert_eq!(&w, &opt[m - 1].graphs[0]);
            prop_assert_eq!(r.delta(m).unwrap(), opt[m - 1].weight - opt[m].weight);
            prop_assert_eq!(w.sinks().len(), m);
            prop_assert_eq!(w.arcs().len(), n - m);
            if m + 1 < n {
                let coarse = extract_wgraph(&g, &r, m + 1).unwrap();
                prop_assert!(weak_nested_check(&coarse, &w).holds());
            }
        }
        // exponents are nondecreasing in the sink count
        let d: Vec<Weight> = (1..n).map(|m| r.delta(m).unwrap()).collect();
        prop_assert!(d.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn every_enumerated_forest_is_valid(seed in any::<u64>(), n in 2usize..6, m in 1usize..6) {
        prop_assume!(m <= n);
        let g = random_strong_graph(&mut rng(seed), n, 0.5, 40, None);
        for w in all_wgraphs(&g, m, 9).unwrap() {
            prop_assert!(w.is_valid_in(&g));
            prop_assert_eq!(w.sinks().len(), m);
        }
    }

    #[test]
    fn sweeps_agree_on_integer_graphs(seed in any::<u64>(), n in 2usize..9, reverse in any::<bool>()) {
        let g = random_integer_graph(&mut rng(seed), n, 0.4, 4);
        let tb = if reverse { TieBreak::ReverseLexicographic } else { TieBreak::Lexicographic };
        let c = compare_alg1_alg2(&g, tb);
        prop_assert!(c.all_hold(), "{:?}", c.violations);
    }

    #[test]
    fn min_set_sweep_shape(seed in any::<u64>(), n in 2usize..9) {
        let g = random_integer_graph(&mut rng(seed), n, 0.4, 4);
        let r = run_algorithm2(&g, StopCriterion::BucketEmpty);
        prop_assert!(r.theta.windows(2).all(|p| p[0] < p[1]));
        // a released vertex may hand over several tied min-arcs
        prop_assert!(r.multiplicities.iter().sum::<usize>() <= r.transfers.len());
        prop_assert_eq!(r.multiplicities.len(), r.theta.len());
        // class state sets form a laminar family
        let sets: Vec<BTreeSet<usize>> =
            r.classes.iter().map(|c| r.nodes[c.node].members.iter().copied().collect()).collect();
        for a in &sets {
            for b in &sets {
                prop_assert!(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a));
            }
        }
    }

    #[test]
    fn cycle_hierarchy_is_laminar(seed in any::<u64>(), n in 2usize..9) {
        let g = random_strong_graph(&mut rng(seed), n, 0.3, 80, None);
        let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
        for (_, node) in r.cycle_nodes() {
            let mut union: Vec<usize> = node.children.iter().flat_map(|&c| r.nodes[c].members.clone()).collect();
            union.sort_unstable();
            prop_assert_eq!(&union, &node.members);
        }
    }

    #[test]
    fn text_formats_round_trip(seed in any::<u64>(), n in 2usize..8) {
        let g = random_strong_graph(&mut rng(seed), n, 0.3, 80, Some((0.5, 2.0)));
        let j = parse_json(&to_json(&g).to_string()).unwrap();
        prop_assert_eq!(&j, &g);
        let t = parse_tsv(&to_tsv(&g)).unwrap();
        prop_assert_eq!(&t, &g);
    }

    #[test]
    fn dot_labels_reparse_exactly(seed in any::<u64>(), n in 2usize..8) {
        let g = random_strong_graph(&mut rng(seed), n, 0.3, 80, None);
        let text = graph_to_dot(&g);
        let labels: BTreeSet<Weight> = text
            .lines()
            .filter(|l| l.contains(" -> "))
            .map(|l| l.split("label=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap())
            .collect();
        let weights: BTreeSet<Weight> = g.arcs().iter().map(|a| a.weight).collect();
        prop_assert_eq!(labels, weights);
    }
}
