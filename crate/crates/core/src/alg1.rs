//! Single-min-arc sweep: critical exponents, T-graphs, eigenvalue exponents and
//! prefactors, sink records and the cycle hierarchy for chains without
//! symmetry.
//!
//! Cycles are not contracted physically. Every active (super-)vertex owns the
//! merged set of outgoing arcs of its members, arcs keep their original tail
//! and head, and the T-graph is the list of transferred arcs, so the expanded
//! T-graph `T_k` is simply the first `k` transfers.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::graph::ChainGraph;
use crate::stop::StopCriterion;
use crate::tgraph::{detect_cycle, TArc, TGraph};
use crate::weight::Weight;

/// Exit exponent of a contracted cycle through an arc `i -> j`:
/// `U_ij + gamma_last - U_min(i)`.
pub fn updated_exponent(u_ij: Weight, u_min_i: Weight, gamma_last: Weight) -> Weight {
    u_ij + gamma_last - u_min_i
}

/// Prefactor companion of [`updated_exponent`]: `kappa_ij * kappa_last / kappa_min(i)`.
pub fn updated_prefactor(kappa_ij: f64, kappa_last: f64, kappa_min_i: f64) -> f64 {
    kappa_ij * kappa_last / kappa_min_i
}

/// How to pick among arcs of equal weight once a tie has been detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest `(tail, head)` in state input order.
    #[default]
    Lexicographic,
    /// Largest `(tail, head)` in state input order.
    ReverseLexicographic,
}

impl TieBreak {
    fn rank(self, tail: usize, head: usize) -> (usize, usize) {
        match self {
            TieBreak::Lexicographic => (tail, head),
            TieBreak::ReverseLexicographic => (usize::MAX - tail, usize::MAX - head),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    /// The bucket minimum was attained by more than one arc.
    BucketTie,
    /// A (super-)vertex had more than one min-arc.
    MinArcTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetryEvent {
    /// Step during which the tie was seen; 0 for ties present before the first step.
    pub step: usize,
    pub kind: SymmetryKind,
}

/// Data of a step that did not close a cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenRecord {
    /// Eigenvalue index set by this step.
    pub m: usize,
    pub delta: Weight,
    /// Modified prefactor of the transferred arc.
    pub alpha: f64,
    /// `k(m)`.
    pub step: usize,
    /// `s*_m`: sink of the component whose root gained an arc.
    pub sink: usize,
    /// `z*_m`: sink of the component it joined.
    pub absorbed_by: usize,
    /// Index into the transfer list.
    pub transfer: usize,
}

/// Reweighting of one arc leaving a freshly closed cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitUpdate {
    pub tail: usize,
    pub head: usize,
    /// Hierarchy node of the cycle member that owns the arc.
    pub member: usize,
    pub before: Weight,
    pub after: Weight,
    pub kappa_before: f64,
    pub kappa_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleRecord {
    /// Hierarchy node created for the cycle.
    pub node: usize,
    pub step: usize,
    pub gamma_last: Weight,
    pub kappa_last: f64,
    /// Member nodes in cycle order, starting with the tail of the closing arc.
    pub members: Vec<usize>,
    /// Transfer index of each member's min-arc, aligned with `members`.
    pub member_arcs: Vec<usize>,
    pub exits: Vec<ExitUpdate>,
    /// Number of arcs inside the cycle that were discarded.
    pub dropped: usize,
}

/// Node of the contraction forest. Nodes `0..n` are the states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyNode {
    pub members: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Step that closed the cycle; `None` for states.
    pub birth_step: Option<usize>,
    pub birth_exponent: Option<Weight>,
    /// Transfer index of the node's min-arc once moved to the T-graph.
    pub exit: Option<usize>,
    pub exit_exponent: Option<Weight>,
    /// State acting as the sink of this node in optimal W-graphs.
    pub main: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    BucketEmpty,
    Criterion(String),
}

#[derive(Debug, Clone, Default)]
pub struct Alg1Options {
    pub stop: StopCriterion,
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone)]
pub struct Alg1Report {
    pub n: usize,
    pub gamma: Vec<Weight>,
    pub transfers: Vec<TArc>,
    /// Non-cycle steps in order, i.e. `m = n-1, n-2, ...`.
    pub eigen: Vec<EigenRecord>,
    pub cycles: Vec<CycleRecord>,
    pub nodes: Vec<HierarchyNode>,
    pub symmetry: Option<SymmetryEvent>,
    pub symmetry_events: Vec<SymmetryEvent>,
    pub order_only: bool,
    pub tie_break: TieBreak,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone)]
struct WorkArc {
    tail: usize,
    head: usize,
    weight: Weight,
    original: Weight,
    kappa: f64,
}

struct Sweep {
    tie: TieBreak,
    active: Vec<usize>,
    out: Vec<Vec<WorkArc>>,
    chosen: Vec<Option<WorkArc>>,
    tout: Vec<Option<usize>>,
    bucket: BTreeSet<(Weight, (usize, usize), usize)>,
    nodes: Vec<HierarchyNode>,
    symmetry_events: Vec<SymmetryEvent>,
}

impl Sweep {
    /// Puts the min-arc of `node` into the bucket.
    fn select(&mut self, node: usize, step: usize) {
        let arcs = &self.out[node];
        let Some(min) = arcs.iter().map(|a| a.weight).min() else {
            return;
        };
        let mut ties = arcs.iter().filter(|a| a.weight == min);
        let mut best = ties.next().expect("minimum exists");
        let mut count = 1;
        for a in ties {
            count += 1;
            if self.tie.rank(a.tail, a.head) < self.tie.rank(best.tail, best.head) {
                best = a;
            }
        }
        if count > 1 {
            self.symmetry_events.push(SymmetryEvent {
                step,
                kind: SymmetryKind::MinArcTie,
            });
        }
        let best = best.clone();
        self.bucket
            .insert((best.weight, self.tie.rank(best.tail, best.head), node));
        self.chosen[node] = Some(best);
    }
}

pub fn run_algorithm1(g: &ChainGraph, stop: StopCriterion) -> Alg1Report {
    run_algorithm1_with(
        g,
        &Alg1Options {
            stop,
            tie_break: TieBreak::default(),
        },
    )
}

pub fn run_algorithm1_with(g: &ChainGraph, opts: &Alg1Options) -> Alg1Report {
    let n = g.n();
    let mut sw = Sweep {
        tie: opts.tie_break,
        active: (0..n).collect(),
        out: vec![Vec::new(); n],
        chosen: vec![None; n],
        tout: vec![None; n],
        bucket: BTreeSet::new(),
        nodes: (0..n)
            .map(|i| HierarchyNode {
                members: vec![i],
                children: Vec::new(),
                parent: None,
                birth_step: None,
                birth_exponent: None,
                exit: None,
                exit_exponent: None,
                main: i,
            })
            .collect(),
        symmetry_events: Vec::new(),
    };
    for a in g.arcs() {
        sw.out[a.tail].push(WorkArc {
            tail: a.tail,
            head: a.head,
            weight: a.weight,
            original: a.weight,
            kappa: g.kappa(a),
        });
    }
    for i in 0..n {
        sw.select(i, 0);
    }

    let mut gamma = Vec::new();
    let mut transfers: Vec<TArc> = Vec::new();
    let mut eigen = Vec::new();
    let mut cycles = Vec::new();
    let mut m = n;
    let mut k = 0;
    let mut stop_reason = StopReason::BucketEmpty;

    while let Some(entry) = sw.bucket.pop_first() {
        k += 1;
        if sw.bucket.first().is_some_and(|e| e.0 == entry.0) {
            sw.symmetry_events.push(SymmetryEvent {
                step: k,
                kind: SymmetryKind::BucketTie,
            });
        }
        let v = entry.2;
        let a = sw.chosen[v].take().expect("bucket entry has an arc");
        let t_idx = transfers.len();
        transfers.push(TArc {
            tail: a.tail,
            head: a.head,
            weight: a.weight,
            original: a.original,
            kappa: a.kappa,
            step: k,
        });
        gamma.push(a.weight);
        sw.tout[v] = Some(t_idx);

        // follow unique out-arcs from the head; a cycle must pass through v
        let cycle = detect_cycle(v, sw.active[a.head], sw.nodes.len(), |x| {
            sw.tout[x].map(|t| sw.active[transfers[t].head])
        });

        match cycle {
            None => {
                let mut h = sw.active[a.head];
                while let Some(t) = sw.tout[h] {
                    h = sw.active[transfers[t].head];
                }
                m -= 1;
                eigen.push(EigenRecord {
                    m,
                    delta: a.weight,
                    alpha: a.kappa,
                    step: k,
                    sink: sw.nodes[v].main,
                    absorbed_by: sw.nodes[h].main,
                    transfer: t_idx,
                });
            }
            Some(members) => {
                let c = sw.nodes.len();
                let in_cycle = |x: usize, active: &[usize]| members.contains(&active[x]);
                let mut new_out = Vec::new();
                let mut exits = Vec::new();
                let mut dropped = 0;
                for &x in &members {
                    let mu = &transfers[sw.tout[x].expect("cycle member has a min-arc")];
                    let (u_mu, k_mu) = (mu.weight, mu.kappa);
                    for arc in std::mem::take(&mut sw.out[x]) {
                        if in_cycle(arc.head, &sw.active) {
                            dropped += 1;
                            continue;
                        }
                        let after = updated_exponent(arc.weight, u_mu, a.weight);
                        let kappa_after = updated_prefactor(arc.kappa, a.kappa, k_mu);
                        exits.push(ExitUpdate {
                            tail: arc.tail,
                            head: arc.head,
                            member: x,
                            before: arc.weight,
                            after,
                            kappa_before: arc.kappa,
                            kappa_after,
                        });
                        new_out.push(WorkArc {
                            weight: after,
                            kappa: kappa_after,
                            ..arc
                        });
                    }
                }
                let mut vertices = Vec::new();
                for &x in &members {
                    vertices.extend_from_slice(&sw.nodes[x].members);
                    sw.nodes[x].parent = Some(c);
                }
                vertices.sort_unstable();
                for &s in &vertices {
                    sw.active[s] = c;
                }
                sw.nodes.push(HierarchyNode {
                    members: vertices,
                    children: members.clone(),
                    parent: None,
                    birth_step: Some(k),
                    birth_exponent: Some(a.weight),
                    exit: None,
                    exit_exponent: None,
                    main: sw.nodes[v].main,
                });
                sw.out.push(new_out);
                sw.chosen.push(None);
                sw.tout.push(None);
                cycles.push(CycleRecord {
                    node: c,
                    step: k,
                    gamma_last: a.weight,
                    kappa_last: a.kappa,
                    member_arcs: members.iter().map(|&x| sw.tout[x].unwrap()).collect(),
                    members,
                    exits,
                    dropped,
                });
                sw.select(c, k);
            }
        }

        if !matches!(opts.stop, StopCriterion::BucketEmpty) {
            let t = TGraph {
                n,
                arcs: transfers.clone(),
                threshold: Some(a.weight),
            };
            if opts.stop.fires(&t, a.weight, sw.bucket.len()) {
                stop_reason = StopReason::Criterion(opts.stop.label());
                break;
            }
        }
    }

    for (i, node) in sw.nodes.iter_mut().enumerate() {
        if let Some(t) = sw.tout[i] {
            node.exit = Some(t);
            node.exit_exponent = Some(transfers[t].weight);
        }
    }
    Alg1Report {
        n,
        gamma,
        transfers,
        eigen,
        cycles,
        nodes: sw.nodes,
        symmetry: sw.symmetry_events.first().copied(),
        symmetry_events: sw.symmetry_events,
        order_only: g.order_only(),
        tie_break: opts.tie_break,
        stop_reason,
    }
}

impl Alg1Report {
    /// Number of steps `K`.
    pub fn steps(&self) -> usize {
        self.gamma.len()
    }

    /// Number of cycles `N_c`.
    pub fn n_cycles(&self) -> usize {
        self.cycles.len()
    }

    pub fn symmetry_detected(&self) -> bool {
        self.symmetry.is_some()
    }

    pub fn cycle_steps(&self) -> Vec<usize> {
        self.cycles.iter().map(|c| c.step).collect()
    }

    /// Expanded T-graph `T_k`, `0 <= k <= K`.
    pub fn tgraph(&self, k: usize) -> TGraph {
        TGraph {
            n: self.n,
            arcs: self.transfers[..k].to_vec(),
            threshold: if k == 0 { None } else { Some(self.gamma[k - 1]) },
        }
    }

    pub fn eigen_record(&self, m: usize) -> Option<&EigenRecord> {
        self.eigen.iter().find(|e| e.m == m)
    }

    pub fn delta(&self, m: usize) -> Option<Weight> {
        self.eigen_record(m).map(|e| e.delta)
    }

    /// `Delta_1, ..., Delta_{n-1}` for the indices reached.
    pub fn deltas(&self) -> Vec<(usize, Weight)> {
        let mut v: Vec<_> = self.eigen.iter().map(|e| (e.m, e.delta)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    /// `s*_0 = z*_1`, the sink left when the last eigenvalue index is reached.
    pub fn final_sink(&self) -> Option<usize> {
        self.eigen_record(1).map(|e| e.absorbed_by)
    }

    /// Sinks `{s*_j : 0 <= j < m}` of `g*_m`, ordered by `j`.
    pub fn sinks(&self, m: usize) -> Option<Vec<usize>> {
        let mut out = vec![self.final_sink()?];
        for j in 1..m {
            out.push(self.eigen_record(j)?.sink);
        }
        Some(out)
    }

    /// Top-level hierarchy nodes right after step `k`.
    pub fn top_nodes_at(&self, k: usize) -> Vec<usize> {
        let born = |x: usize| self.nodes[x].birth_step.unwrap_or(0) <= k;
        (0..self.nodes.len())
            .filter(|&x| born(x))
            .filter(|&x| match self.nodes[x].parent {
                None => true,
                Some(p) => !born(p),
            })
            .collect()
    }

    /// Roots of the contraction forest.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&x| self.nodes[x].parent.is_none())
            .collect()
    }

    /// Internal nodes, i.e. the cycles.
    pub fn cycle_nodes(&self) -> impl Iterator<Item = (usize, &HierarchyNode)> {
        self.nodes.iter().enumerate().skip(self.n)
    }
}
