//! Typical transition graphs on the original state set.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::analysis::{closed_communicating_classes, ClosedClasses};
use crate::weight::Weight;

/// An arc moved into a T-graph. `tail`/`head` are original states even when
/// the arc left a super-vertex; `weight` is the (possibly modified) exponent it
/// carried when transferred, `original` its exponent in the input graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TArc {
    pub tail: usize,
    pub head: usize,
    pub weight: Weight,
    pub original: Weight,
    /// Modified prefactor, one when the input has none.
    pub kappa: f64,
    /// Step at which the arc was transferred (1-based).
    pub step: usize,
}

/// A fully expanded T-graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TGraph {
    pub n: usize,
    pub arcs: Vec<TArc>,
    /// Exponent at which this graph comes into force; `None` for `T_0`.
    pub threshold: Option<Weight>,
}

impl TGraph {
    pub fn empty(n: usize) -> TGraph {
        TGraph {
            n,
            arcs: Vec::new(),
            threshold: None,
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.arcs.iter().map(|a| (a.tail, a.head)).collect()
    }

    /// Arc set as `(tail, head)` pairs, ignoring weights.
    pub fn arc_set(&self) -> BTreeSet<(usize, usize)> {
        self.arcs.iter().map(|a| (a.tail, a.head)).collect()
    }

    pub fn closed_classes(&self) -> ClosedClasses {
        closed_communicating_classes(self.n, &self.edges())
    }

    /// States with no outgoing arc.
    pub fn absorbing(&self) -> Vec<usize> {
        let mut has_out = vec![false; self.n];
        for a in &self.arcs {
            has_out[a.tail] = true;
        }
        (0..self.n).filter(|&i| !has_out[i]).collect()
    }

    /// States outside every closed class (nontrivial or absorbing).
    pub fn transient(&self) -> Vec<usize> {
        let closed = self.closed_classes();
        let mut recurrent = vec![false; self.n];
        for c in closed.nontrivial.iter() {
            for &v in c {
                recurrent[v] = true;
            }
        }
        for &v in &closed.absorbing {
            recurrent[v] = true;
        }
        (0..self.n).filter(|&i| !recurrent[i]).collect()
    }

    /// Weakly connected components, members sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in &self.arcs {
            let (x, y) = (find(&mut parent, a.tail), find(&mut parent, a.head));
            if x != y {
                parent[x.max(y)] = x.min(y);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    pub fn has_arc(&self, tail: usize, head: usize) -> bool {
        self.arcs.iter().any(|a| a.tail == tail && a.head == head)
    }
}

/// The cycle closed by adding `tail -> head` to a graph in which every
/// vertex has at most one out-arc, given by `next`, and which had no cycle.
/// Members come in forward order starting with `tail`. `limit` bounds the
/// walk so a malformed `next` cannot loop forever.
pub fn detect_cycle(
    tail: usize,
    head: usize,
    limit: usize,
    next: impl Fn(usize) -> Option<usize>,
) -> Option<Vec<usize>> {
    let mut members = vec![tail];
    let mut h = head;
    while h != tail {
        if members.len() > limit {
            return None;
        }
        members.push(h);
        h = next(h)?;
    }
    Some(members)
}
