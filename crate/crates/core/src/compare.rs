//! Consistency contract between the two sweeps on chains with symmetry.
//!
//! With `K_p` the last step of the single-arc sweep whose exponent equals
//! `theta_p`:
//! 1. the distinct single-arc exponents are exactly the `theta_p`;
//! 2. the graphs `Gamma_k`, `K_{p-1} < k <= K_p`, are subgraphs of `T_p`;
//! 3. `T_p` and `Gamma_{K_p}` have the same closed communicating classes;
//! 4. and the same absorbing states.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::alg1::{run_algorithm1_with, Alg1Options, Alg1Report, TieBreak};
use crate::alg2::{run_algorithm2, Alg2Report};
use crate::graph::ChainGraph;
use crate::stop::StopCriterion;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub distinct_exponents_match: bool,
    pub graphs_nested: bool,
    pub closed_classes_match: bool,
    pub absorbing_states_match: bool,
    /// Human-readable description of every violation.
    pub violations: Vec<String>,
    pub symmetry_detected: bool,
}

impl ComparisonReport {
    pub fn all_hold(&self) -> bool {
        self.distinct_exponents_match && self.graphs_nested && self.closed_classes_match && self.absorbing_states_match
    }
}

pub fn compare_alg1_alg2(g: &ChainGraph, tie_break: TieBreak) -> ComparisonReport {
    let a1 = run_algorithm1_with(
        g,
        &Alg1Options {
            stop: StopCriterion::BucketEmpty,
            tie_break,
        },
    );
    let a2 = run_algorithm2(g, StopCriterion::BucketEmpty);
    compare_reports(g, &a1, &a2)
}

pub fn compare_reports(g: &ChainGraph, a1: &Alg1Report, a2: &Alg2Report) -> ComparisonReport {
    let name = |i: usize| g.state_name(i).to_string();
    let mut violations = Vec::new();

    let gammas: BTreeSet<_> = a1.gamma.iter().copied().collect();
    let thetas: BTreeSet<_> = a2.theta.iter().copied().collect();
    let distinct_exponents_match = gammas == thetas;
    if !distinct_exponents_match {
        violations.push(format!(
            "distinct exponents differ: single-arc {:?} vs min-set {:?}",
            gammas.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            thetas.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        ));
    }

    let mut graphs_nested = true;
    let mut closed_classes_match = true;
    let mut absorbing_states_match = true;
    let mut prev_k = 0;
    for (p, th) in a2.theta.iter().enumerate() {
        let p = p + 1;
        let Some(kp) = a1.gamma.iter().rposition(|x| x == th).map(|i| i + 1) else {
            graphs_nested = false;
            violations.push(format!("exponent {th} never occurs in the single-arc sweep"));
            continue;
        };
        let tp = a2.tgraph(p);
        let tp_arcs = tp.arc_set();
        for k in (prev_k + 1)..=kp {
            let extra: Vec<_> = a1.tgraph(k).arc_set().difference(&tp_arcs).copied().collect();
            if !extra.is_empty() {
                graphs_nested = false;
                violations.push(format!(
                    "Gamma_{k} has arcs outside T_{p}: {}",
                    extra
                        .iter()
                        .map(|&(a, b)| format!("{}->{}", name(a), name(b)))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
        }
        prev_k = prev_k.max(kp);
        let gk = a1.tgraph(kp);
        let (ct, cg) = (tp.closed_classes(), gk.closed_classes());
        if ct.nontrivial != cg.nontrivial {
            closed_classes_match = false;
            violations.push(format!(
                "closed classes of T_{p} {:?} differ from Gamma_{kp} {:?}",
                ct.nontrivial, cg.nontrivial
            ));
        }
        if ct.absorbing != cg.absorbing {
            absorbing_states_match = false;
            violations.push(format!(
                "absorbing states of T_{p} {:?} differ from Gamma_{kp} {:?}",
                ct.absorbing, cg.absorbing
            ));
        }
    }

    ComparisonReport {
        distinct_exponents_match,
        graphs_nested,
        closed_classes_match,
        absorbing_states_match,
        violations,
        symmetry_detected: a1.symmetry_detected(),
    }
}
