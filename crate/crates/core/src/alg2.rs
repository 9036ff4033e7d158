//! Min-arc-set sweep for chains with symmetry: every arc of the current
//! minimum weight is released at once and closed communicating classes play
//! the role of cycles.

use serde::Serialize;

use crate::alg1::StopReason;
use crate::analysis::closed_communicating_classes;
use crate::graph::ChainGraph;
use crate::stop::StopCriterion;
use crate::tgraph::{TArc, TGraph};
use crate::weight::Weight;

/// Exit exponent of a closed class through `i -> j`: `U_ij - U_min(i) + theta`.
pub fn class_exit_exponent(u_ij: Weight, u_min_i: Weight, theta: Weight) -> Weight {
    u_ij - u_min_i + theta
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassUpdate {
    pub tail: usize,
    pub head: usize,
    pub member: usize,
    pub before: Weight,
    pub after: Weight,
    /// `U_min` of the member when the class closed.
    pub member_min: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRecord {
    pub node: usize,
    pub step: usize,
    pub theta: Weight,
    /// Member nodes, ascending.
    pub members: Vec<usize>,
    pub updates: Vec<ClassUpdate>,
    pub dropped: usize,
}

/// Node of the class forest. Nodes `0..n` are the states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassNode {
    pub members: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub birth_step: Option<usize>,
    pub birth_exponent: Option<Weight>,
}

#[derive(Debug, Clone)]
pub struct Alg2Report {
    pub n: usize,
    pub theta: Vec<Weight>,
    /// `m(p)`: number of (super-)vertices whose min-arcs were released at step `p`.
    pub multiplicities: Vec<usize>,
    pub transfers: Vec<TArc>,
    pub classes: Vec<ClassRecord>,
    pub nodes: Vec<ClassNode>,
    /// Prefactors were given on input; they are carried but never updated.
    pub prefactors_ignored: bool,
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

pub fn run_algorithm2(g: &ChainGraph, stop: StopCriterion) -> Alg2Report {
    run_with_order(g, &stop, false)
}

fn run_with_order(g: &ChainGraph, stop: &StopCriterion, reverse_classes: bool) -> Alg2Report {
    let n = g.n();
    let mut active: Vec<usize> = (0..n).collect();
    let mut out: Vec<Vec<WorkArc>> = vec![Vec::new(); n];
    for a in g.arcs() {
        out[a.tail].push(WorkArc {
            tail: a.tail,
            head: a.head,
            weight: a.weight,
            original: a.weight,
            kappa: g.kappa(a),
        });
    }
    let mut nodes: Vec<ClassNode> = (0..n)
        .map(|i| ClassNode {
            members: vec![i],
            children: Vec::new(),
            parent: None,
            birth_step: None,
            birth_exponent: None,
        })
        .collect();
    // bucket entries: (owning node, arc)
    let mut bucket: Vec<(usize, WorkArc)> = Vec::new();
    let push_min_set = |node: usize, arcs: &[WorkArc], bucket: &mut Vec<(usize, WorkArc)>| {
        if let Some(min) = arcs.iter().map(|a| a.weight).min() {
            bucket.extend(arcs.iter().filter(|a| a.weight == min).map(|a| (node, a.clone())));
        }
    };
    for (i, arcs) in out.iter().enumerate() {
        push_min_set(i, arcs, &mut bucket);
    }

    let mut theta = Vec::new();
    let mut multiplicities = Vec::new();
    let mut transfers: Vec<TArc> = Vec::new();
    let mut classes = Vec::new();
    let mut stop_reason = StopReason::BucketEmpty;
    let mut p = 0;

    while let Some(th) = bucket.iter().map(|(_, a)| a.weight).min() {
        p += 1;
        let (released, rest): (Vec<_>, Vec<_>) = bucket.into_iter().partition(|(_, a)| a.weight == th);
        bucket = rest;
        let mut owners: Vec<usize> = released.iter().map(|(v, _)| *v).collect();
        owners.sort_unstable();
        owners.dedup();
        theta.push(th);
        multiplicities.push(owners.len());
        let mut fresh: Vec<TArc> = released
            .into_iter()
            .map(|(_, a)| TArc {
                tail: a.tail,
                head: a.head,
                weight: a.weight,
                original: a.original,
                kappa: a.kappa,
                step: p,
            })
            .collect();
        fresh.sort_by_key(|a| (a.tail, a.head));
        transfers.extend(fresh);

        // closed classes of the current contracted T-graph
        let mut index = vec![usize::MAX; nodes.len()];
        let mut level: Vec<usize> = (0..nodes.len()).filter(|&x| nodes[x].parent.is_none()).collect();
        level.sort_unstable();
        for (i, &x) in level.iter().enumerate() {
            index[x] = i;
        }
        let edges: Vec<(usize, usize)> = transfers
            .iter()
            .map(|a| (index[active[a.tail]], index[active[a.head]]))
            .filter(|(a, b)| a != b)
            .collect();
        let mut found = closed_communicating_classes(level.len(), &edges).nontrivial;
        if reverse_classes {
            found.reverse();
        }
        for class in found {
            let members: Vec<usize> = class.iter().map(|&i| level[i]).collect();
            let c = nodes.len();
            let mut new_out = Vec::new();
            let mut updates = Vec::new();
            let mut dropped = 0;
            for &x in &members {
                let arcs = std::mem::take(&mut out[x]);
                let u_min = arcs.iter().map(|a| a.weight).min().expect("class members have arcs");
                for arc in arcs {
                    if members.contains(&active[arc.head]) {
                        dropped += 1;
                        continue;
                    }
                    let after = class_exit_exponent(arc.weight, u_min, th);
                    updates.push(ClassUpdate {
                        tail: arc.tail,
                        head: arc.head,
                        member: x,
                        before: arc.weight,
                        after,
                        member_min: u_min,
                    });
                    new_out.push(WorkArc { weight: after, ..arc });
                }
            }
            debug_assert!(bucket.iter().all(|(v, _)| !members.contains(v)));
            let mut vertices = Vec::new();
            for &x in &members {
                vertices.extend_from_slice(&nodes[x].members);
                nodes[x].parent = Some(c);
            }
            vertices.sort_unstable();
            for &s in &vertices {
                active[s] = c;
            }
            nodes.push(ClassNode {
                members: vertices,
                children: members.clone(),
                parent: None,
                birth_step: Some(p),
                birth_exponent: Some(th),
            });
            push_min_set(c, &new_out, &mut bucket);
            out.push(new_out);
            classes.push(ClassRecord {
                node: c,
                step: p,
                theta: th,
                members,
                updates,
                dropped,
            });
        }

        if !matches!(stop, StopCriterion::BucketEmpty) {
            let t = TGraph {
                n,
                arcs: transfers.clone(),
                threshold: Some(th),
            };
            if stop.fires(&t, th, bucket.len()) {
                stop_reason = StopReason::Criterion(stop.label());
                break;
            }
        }
    }

    Alg2Report {
        n,
        theta,
        multiplicities,
        transfers,
        classes,
        nodes,
        prefactors_ignored: g.has_prefactors(),
        stop_reason,
    }
}

impl Alg2Report {
    pub fn steps(&self) -> usize {
        self.theta.len()
    }

    /// Expanded T-graph `T_p`, `0 <= p <= P`.
    pub fn tgraph(&self, p: usize) -> TGraph {
        TGraph {
            n: self.n,
            arcs: self.transfers.iter().filter(|a| a.step <= p).cloned().collect(),
            threshold: if p == 0 { None } else { Some(self.theta[p - 1]) },
        }
    }

    pub fn final_tgraph(&self) -> TGraph {
        self.tgraph(self.steps())
    }

    /// Transient states of the final T-graph.
    pub fn transient_states(&self) -> Vec<usize> {
        self.final_tgraph().transient()
    }

    /// Critical exponents with multiplicity, `theta_p` repeated `m(p)` times.
    pub fn gamma_multiset(&self) -> Vec<Weight> {
        self.theta
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(t, &m)| std::iter::repeat_n(*t, m))
            .collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&x| self.nodes[x].parent.is_none())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::w;

    #[test]
    fn exit_rule_examples() {
        assert_eq!(class_exit_exponent(w("5"), w("2"), w("3")), w("6"));
    }

    #[test]
    fn tie_example_releases_both_arcs() {
        let g = ChainGraph::from_triples(&[("1", "2", "1"), ("2", "1", "2"), ("2", "3", "2")]).unwrap();
        let r = run_algorithm2(&g, StopCriterion::BucketEmpty);
        assert_eq!(r.theta, vec![w("1"), w("2")]);
        assert_eq!(r.multiplicities, vec![1, 1]);
        assert!(r.classes.is_empty());
        assert_eq!(r.final_tgraph().absorbing(), vec![2]);
    }

    #[test]
    fn class_order_does_not_matter() {
        // two disjoint 2-cycles close at the same step
        let g = ChainGraph::from_triples(&[
            ("a", "b", "1"),
            ("b", "a", "2"),
            ("c", "d", "1"),
            ("d", "c", "2"),
            ("a", "c", "5"),
            ("d", "b", "4"),
        ])
        .unwrap();
        let x = run_with_order(&g, &StopCriterion::BucketEmpty, false);
        let y = run_with_order(&g, &StopCriterion::BucketEmpty, true);
        assert_eq!(x.theta, y.theta);
        assert_eq!(x.transfers, y.transfers);
        assert_eq!(x.classes.len(), 3);
        assert_eq!(x.classes[0].step, x.classes[1].step);
    }
}
