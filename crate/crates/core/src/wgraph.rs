//! W-graphs: forests of in-trees with a prescribed number of sinks.
//!
//! Brute-force enumeration serves as the reference for the sweep; extraction
//! recovers optimal W-graphs from an Algorithm 1 run.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::alg1::Alg1Report;
use crate::graph::ChainGraph;
use crate::weight::Weight;

pub const DEFAULT_ORACLE_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WGraphError {
    #[error("enumeration over {n} states exceeds the oracle cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("sink count {m} outside 1..={max}")]
    SinkCount { m: usize, max: usize },
    #[error("the run detected symmetry at step {0}; optimal W-graphs cannot be extracted")]
    Symmetry(usize),
    #[error("the run stopped before eigenvalue index {0} was reached")]
    Incomplete(usize),
}

/// A W-graph: every non-sink has exactly one outgoing arc, no cycles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WGraph {
    /// `succ[i]` is the head of the arc leaving `i`, `None` for sinks.
    pub succ: Vec<Option<usize>>,
    pub total_weight: Weight,
}

impl WGraph {
    /// Builds a W-graph from successor choices, pricing arcs with the input
    /// exponents. Panics if an arc is missing from `g`.
    pub fn from_succ(g: &ChainGraph, succ: Vec<Option<usize>>) -> WGraph {
        let total_weight = succ
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|j| g.arc_between(i, j).expect("arc exists").weight))
            .sum();
        WGraph { succ, total_weight }
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.succ[i].is_none()).collect()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.succ
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|j| (i, j)))
            .collect()
    }

    /// Sink reached from each vertex; `None` if a cycle is hit.
    pub fn sink_of(&self) -> Vec<Option<usize>> {
        (0..self.n())
            .map(|i| {
                let mut x = i;
                for _ in 0..=self.n() {
                    match self.succ[x] {
                        None => return Some(x),
                        Some(y) => x = y,
                    }
                }
                None
            })
            .collect()
    }

    /// Checks the defining properties against `g`: arcs exist, no cycles,
    /// the stored weight is the arc sum.
    pub fn is_valid_in(&self, g: &ChainGraph) -> bool {
        if self.n() != g.n() || self.sink_of().iter().any(Option::is_none) {
            return false;
        }
        let mut total = Weight::ZERO;
        for (i, j) in self.arcs() {
            match g.arc_between(i, j) {
                Some(a) => total += a.weight,
                None => return false,
            }
        }
        total == self.total_weight
    }
}

/// Calls `visit` once for every W-graph of `g` with `m` sinks.
pub fn enumerate_wgraphs(
    g: &ChainGraph,
    m: usize,
    cap: usize,
    mut visit: impl FnMut(&WGraph),
) -> Result<(), WGraphError> {
    let n = g.n();
    if n > cap {
        return Err(WGraphError::CapExceeded { n, cap });
    }
    if m == 0 || m > n {
        return Err(WGraphError::SinkCount { m, max: n });
    }
    let choices: Vec<Vec<(usize, Weight)>> = (0..n)
        .map(|i| {
            g.out_arcs(i)
                .iter()
                .map(|&k| (g.arcs()[k].head, g.arcs()[k].weight))
                .collect()
        })
        .collect();
    let mut succ = vec![None; n];
    let mut assigned = vec![false; n];
    recurse(0, 0, Weight::ZERO, m, &choices, &mut succ, &mut assigned, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    i: usize,
    sinks: usize,
    total: Weight,
    m: usize,
    choices: &[Vec<(usize, Weight)>],
    succ: &mut Vec<Option<usize>>,
    assigned: &mut Vec<bool>,
    visit: &mut impl FnMut(&WGraph),
) {
    let n = choices.len();
    if i == n {
        if sinks == m {
            visit(&WGraph {
                succ: succ.clone(),
                total_weight: total,
            });
        }
        return;
    }
    let remaining = n - i;
    if sinks < m {
        assigned[i] = true;
        succ[i] = None;
        recurse(i + 1, sinks + 1, total, m, choices, succ, assigned, visit);
        assigned[i] = false;
    }
    if sinks + remaining > m {
        for &(j, u) in &choices[i] {
            // walk the assigned successors from j; reaching i closes a cycle
            let mut x = j;
            let mut cyclic = false;
            while assigned[x] {
                if x == i {
                    cyclic = true;
                    break;
                }
                match succ[x] {
                    Some(y) => x = y,
                    None => break,
                }
            }
            if cyclic || x == i {
                continue;
            }
            assigned[i] = true;
            succ[i] = Some(j);
            recurse(i + 1, sinks, total + u, m, choices, succ, assigned, visit);
            succ[i] = None;
            assigned[i] = false;
        }
    }
}

/// Every W-graph with `m` sinks.
pub fn all_wgraphs(g: &ChainGraph, m: usize, cap: usize) -> Result<Vec<WGraph>, WGraphError> {
    let mut out = Vec::new();
    enumerate_wgraphs(g, m, cap, |w| out.push(w.clone()))?;
    Ok(out)
}

/// All minimizers of `V` over W-graphs with `m` sinks, and whether the
/// minimizer is unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalSet {
    pub weight: Weight,
    pub graphs: Vec<WGraph>,
}

impl OptimalSet {
    pub fn is_unique(&self) -> bool {
        self.graphs.len() == 1
    }
}

pub fn enumerate_optimal(g: &ChainGraph, m: usize, cap: usize) -> Result<OptimalSet, WGraphError> {
    let mut best: Option<OptimalSet> = None;
    enumerate_wgraphs(g, m, cap, |w| match &mut best {
        Some(b) if w.total_weight > b.weight => {}
        Some(b) if w.total_weight == b.weight => b.graphs.push(w.clone()),
        _ => {
            best = Some(OptimalSet {
                weight: w.total_weight,
                graphs: vec![w.clone()],
            })
        }
    })?;
    // Every vertex with an out-arc can reach something, but a graph whose
    // states all lack arcs still has the single all-sink forest when m = n.
    Ok(best.expect("at least one W-graph exists when sinks are allowed"))
}

fn check_extractable(report: &Alg1Report, m: usize) -> Result<usize, WGraphError> {
    if m == 0 || m >= report.n {
        return Err(WGraphError::SinkCount {
            m,
            max: report.n.saturating_sub(1),
        });
    }
    if let Some(ev) = report.symmetry {
        return Err(WGraphError::Symmetry(ev.step));
    }
    if report.final_sink().is_none() {
        return Err(WGraphError::Incomplete(1));
    }
    report.eigen_record(m).map(|e| e.step).ok_or(WGraphError::Incomplete(m))
}

/// Optimal W-graph `g*_m` recovered from the T-graph `T_{k(m)}`.
///
/// Walks the cycle hierarchy top-down: inside every cycle each member keeps
/// its min-arc except the member holding the designated root, which is the
/// tail of the arc that leaves the enclosing node (or the node's main state
/// when nothing leaves it yet).
pub fn extract_wgraph(g: &ChainGraph, report: &Alg1Report, m: usize) -> Result<WGraph, WGraphError> {
    let k = check_extractable(report, m)?;
    let mut succ = vec![None; report.n];
    let contains = |node: usize, v: usize| report.nodes[node].members.binary_search(&v).is_ok();
    let mut stack = Vec::new();
    for x in report.top_nodes_at(k) {
        let node = &report.nodes[x];
        match node.exit.filter(|&t| report.transfers[t].step <= k) {
            Some(t) => {
                let arc = &report.transfers[t];
                succ[arc.tail] = Some(arc.head);
                stack.push((x, arc.tail));
            }
            None => stack.push((x, node.main)),
        }
    }
    while let Some((x, root)) = stack.pop() {
        for &ch in &report.nodes[x].children {
            if contains(ch, root) {
                stack.push((ch, root));
            } else {
                let t = report.nodes[ch].exit.expect("cycle members have min-arcs");
                let arc = &report.transfers[t];
                succ[arc.tail] = Some(arc.head);
                stack.push((ch, arc.tail));
            }
        }
    }
    Ok(WGraph::from_succ(g, succ))
}

/// Outcome of checking the three clauses of the weak nested property between
/// `g*_{m+1}` (`coarse`) and `g*_m` (`fine`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NestedCheck {
    /// Exactly one component of `g*_{m+1}` loses its sink.
    pub single_absorbed_component: bool,
    /// Arcs with tails outside that component are unchanged.
    pub arcs_outside_coincide: bool,
    /// Exactly one arc of `g*_m` leaves the component, into another component.
    pub single_exit_arc: bool,
    /// Sink of the absorbed component and of the absorbing one, when defined.
    pub absorbed_sink: Option<usize>,
    pub absorbing_sink: Option<usize>,
}

impl NestedCheck {
    pub fn holds(&self) -> bool {
        self.single_absorbed_component && self.arcs_outside_coincide && self.single_exit_arc
    }
}

pub fn weak_nested_check(coarse: &WGraph, fine: &WGraph) -> NestedCheck {
    let n = coarse.n();
    let coarse_sinks: BTreeSet<usize> = coarse.sinks().into_iter().collect();
    let fine_sinks: BTreeSet<usize> = fine.sinks().into_iter().collect();
    let lost: Vec<usize> = coarse_sinks.difference(&fine_sinks).copied().collect();
    let single = lost.len() == 1 && fine_sinks.is_subset(&coarse_sinks);
    let mut out = NestedCheck {
        single_absorbed_component: single,
        arcs_outside_coincide: false,
        single_exit_arc: false,
        absorbed_sink: lost.first().copied().filter(|_| single),
        absorbing_sink: None,
    };
    let Some(s) = out.absorbed_sink else {
        return out;
    };
    let comp = coarse.sink_of();
    let in_s = |v: usize| comp[v] == Some(s);
    out.arcs_outside_coincide = (0..n).filter(|&v| !in_s(v)).all(|v| coarse.succ[v] == fine.succ[v]);
    let exits: Vec<(usize, usize)> = fine.arcs().into_iter().filter(|&(t, h)| in_s(t) && !in_s(h)).collect();
    if exits.len() == 1 {
        out.single_exit_arc = true;
        out.absorbing_sink = comp[exits[0].1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::w;

    fn complete(n: usize) -> ChainGraph {
        let mut t = Vec::new();
        let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    t.push((names[i].clone(), names[j].clone()));
                }
            }
        }
        let triples: Vec<(&str, &str, &str)> = t.iter().map(|(a, b)| (a.as_str(), b.as_str(), "1")).collect();
        ChainGraph::from_triples(&triples).unwrap()
    }

    /// Rooted forests on labeled vertices, counted by brute force over all
    /// successor maps (independent of the pruned backtracking).
    fn count_by_functions(n: usize, m: usize) -> usize {
        let mut count = 0;
        let total = (n + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let succ: Vec<Option<usize>> = (0..n)
                .map(|_| {
                    let d = c % (n + 1);
                    c /= n + 1;
                    if d == n {
                        None
                    } else {
                        Some(d)
                    }
                })
                .collect();
            if succ.iter().enumerate().any(|(i, s)| *s == Some(i)) {
                continue;
            }
            if succ.iter().filter(|s| s.is_none()).count() != m {
                continue;
            }
            let acyclic = (0..n).all(|i| {
                let mut x = i;
                for _ in 0..=n {
                    match succ[x] {
                        None => return true,
                        Some(y) => x = y,
                    }
                }
                false
            });
            if acyclic {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn counts_on_small_complete_graphs() {
        let g2 = complete(2);
        assert_eq!(all_wgraphs(&g2, 1, 9).unwrap().len(), 2);
        let g3 = complete(3);
        assert_eq!(all_wgraphs(&g3, 1, 9).unwrap().len(), 9);
        for n in 2..=5 {
            let g = complete(n);
            for m in 1..=n {
                assert_eq!(
                    all_wgraphs(&g, m, 9).unwrap().len(),
                    count_by_functions(n, m),
                    "n={n} m={m}"
                );
            }
            assert_eq!(
                all_wgraphs(&g, n, 9).unwrap(),
                vec![WGraph {
                    succ: vec![None; n],
                    total_weight: Weight::ZERO
                }]
            );
        }
    }

    #[test]
    fn cap_and_sink_count_errors() {
        let g = complete(4);
        assert_eq!(
            all_wgraphs(&g, 1, 3).unwrap_err(),
            WGraphError::CapExceeded { n: 4, cap: 3 }
        );
        assert!(matches!(all_wgraphs(&g, 0, 9), Err(WGraphError::SinkCount { .. })));
    }

    #[test]
    fn two_state_optimum() {
        let g = ChainGraph::from_triples(&[("1", "2", "1"), ("2", "1", "2")]).unwrap();
        let o = enumerate_optimal(&g, 1, 9).unwrap();
        assert!(o.is_unique());
        assert_eq!(o.weight, w("1"));
        assert_eq!(o.graphs[0].succ, vec![Some(1), None]);
    }

    #[test]
    fn nested_check_clauses() {
        let g = complete(3);
        let coarse = WGraph::from_succ(&g, vec![Some(1), None, None]);
        let fine = WGraph::from_succ(&g, vec![Some(1), Some(2), None]);
        let c = weak_nested_check(&coarse, &fine);
        assert!(c.holds());
        assert_eq!((c.absorbed_sink, c.absorbing_sink), (Some(1), Some(2)));
        // two sinks lost at once
        let fine = WGraph::from_succ(&g, vec![Some(2), Some(2), None]);
        let c = weak_nested_check(&WGraph::from_succ(&g, vec![None; 3]), &fine);
        assert!(!c.single_absorbed_component);
    }
}
