//! Explicit contraction of vertex sets into super-vertices and its inverse.
//!
//! The sweeps never build these graphs (they merge outgoing-arc sets
//! instead); this is the literal view used for reports and to cross-check
//! the merged representation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::ChainGraph;
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractionError {
    #[error("vertex {0} is not in the graph")]
    MissingVertex(usize),
    #[error("super-vertex {0} is not in the graph")]
    MissingSuperVertex(usize),
    #[error("vertex id {0} is already in use")]
    IdInUse(usize),
    #[error("cannot contract an empty vertex set")]
    EmptySet,
    #[error("contraction record of {0} holds no inner arcs or members")]
    EmptyRecord(usize),
    #[error("arc {0} -> {1} touches the super-vertex but is not in its record")]
    UnrecordedArc(usize, usize),
}

/// An arc of a working graph. `tail`/`head` are current vertex ids; the
/// original endpoints are kept so expansion is exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkArc {
    pub tail: usize,
    pub head: usize,
    pub weight: Weight,
    pub kappa: f64,
    pub orig_tail: usize,
    pub orig_head: usize,
}

/// A graph over states and super-vertices. Ids `0..n` are states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkingGraph {
    /// Vertex id -> original states it contains, ascending.
    pub vertices: BTreeMap<usize, Vec<usize>>,
    /// Sorted by `(tail, head, orig_tail, orig_head)`.
    pub arcs: Vec<WorkArc>,
}

/// What `contract` removed or re-rooted, enough to undo it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRecord {
    pub super_vertex: usize,
    pub members: Vec<usize>,
    /// State list of each member, aligned with `members`.
    pub member_states: Vec<Vec<usize>>,
    /// Arcs with both ends inside the set.
    pub inner: Vec<WorkArc>,
    /// For every arc touching the set: `(orig_tail, orig_head, tail, head)`
    /// as they were before contraction.
    pub endpoints: Vec<(usize, usize, usize, usize)>,
}

fn arc_key(a: &WorkArc) -> (usize, usize, usize, usize) {
    (a.tail, a.head, a.orig_tail, a.orig_head)
}

impl WorkingGraph {
    pub fn from_graph(g: &ChainGraph) -> WorkingGraph {
        WorkingGraph::from_arcs(
            g.n(),
            g.arcs().iter().map(|a| WorkArc {
                tail: a.tail,
                head: a.head,
                weight: a.weight,
                kappa: g.kappa(a),
                orig_tail: a.tail,
                orig_head: a.head,
            }),
        )
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = WorkArc>) -> WorkingGraph {
        let mut w = WorkingGraph {
            vertices: (0..n).map(|i| (i, vec![i])).collect(),
            arcs: arcs.into_iter().collect(),
        };
        w.canonicalize();
        w
    }

    fn canonicalize(&mut self) {
        self.arcs.sort_by_key(arc_key);
    }

    /// Display name: the state name, or the sorted member set in braces.
    pub fn name(&self, g: &ChainGraph, v: usize) -> Option<String> {
        let m = self.vertices.get(&v)?;
        Some(if v < g.n() {
            g.state_name(v).to_string()
        } else {
            g.set_name(m)
        })
    }

    pub fn out_arcs(&self, v: usize) -> impl Iterator<Item = &WorkArc> {
        self.arcs.iter().filter(move |a| a.tail == v)
    }

    /// Maps `members` onto the new vertex `id`. Arcs inside the set are
    /// dropped into the record, other arcs touching it are re-rooted with
    /// their weights unchanged. Parallel arcs stay distinct.
    pub fn contract(
        &self,
        members: &[usize],
        id: usize,
    ) -> Result<(WorkingGraph, ContractionRecord), ContractionError> {
        if members.is_empty() {
            return Err(ContractionError::EmptySet);
        }
        if let Some(&m) = members.iter().find(|m| !self.vertices.contains_key(m)) {
            return Err(ContractionError::MissingVertex(m));
        }
        if self.vertices.contains_key(&id) {
            return Err(ContractionError::IdInUse(id));
        }
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let inside = |v: usize| members.binary_search(&v).is_ok();
        let mut out = self.clone();
        let mut states = Vec::new();
        let mut member_states = Vec::with_capacity(members.len());
        for m in &members {
            let s = out.vertices.remove(m).expect("checked");
            states.extend_from_slice(&s);
            member_states.push(s);
        }
        states.sort_unstable();
        out.vertices.insert(id, states);
        let mut inner = Vec::new();
        let mut endpoints = Vec::new();
        out.arcs.clear();
        for a in &self.arcs {
            match (inside(a.tail), inside(a.head)) {
                (true, true) => inner.push(a.clone()),
                (false, false) => out.arcs.push(a.clone()),
                (ti, hi) => {
                    endpoints.push((a.orig_tail, a.orig_head, a.tail, a.head));
                    out.arcs.push(WorkArc {
                        tail: if ti { id } else { a.tail },
                        head: if hi { id } else { a.head },
                        ..a.clone()
                    });
                }
            }
        }
        out.canonicalize();
        Ok((
            out,
            ContractionRecord {
                super_vertex: id,
                members,
                member_states,
                inner,
                endpoints,
            },
        ))
    }

    /// Exact inverse of [`contract`](Self::contract). Weights of arcs that
    /// were re-rooted are taken from the current graph, so reweighting done
    /// between the two calls survives.
    pub fn expand(&self, record: &ContractionRecord) -> Result<WorkingGraph, ContractionError> {
        let id = record.super_vertex;
        if !self.vertices.contains_key(&id) {
            return Err(ContractionError::MissingSuperVertex(id));
        }
        if record.members.is_empty()
            || record.member_states.len() != record.members.len()
            || (record.inner.is_empty() && record.members.len() > 1)
        {
            return Err(ContractionError::EmptyRecord(id));
        }
        let lookup: BTreeMap<(usize, usize), (usize, usize)> = record
            .endpoints
            .iter()
            .map(|&(ot, oh, t, h)| ((ot, oh), (t, h)))
            .collect();
        let mut out = self.clone();
        out.vertices.remove(&id);
        for (m, states) in record.members.iter().zip(&record.member_states) {
            out.vertices.insert(*m, states.clone());
        }
        out.arcs.clear();
        for a in &self.arcs {
            if a.tail != id && a.head != id {
                out.arcs.push(a.clone());
                continue;
            }
            let &(t, h) = lookup
                .get(&(a.orig_tail, a.orig_head))
                .ok_or(ContractionError::UnrecordedArc(a.orig_tail, a.orig_head))?;
            out.arcs.push(WorkArc {
                tail: t,
                head: h,
                ..a.clone()
            });
        }
        out.arcs.extend(record.inner.iter().cloned());
        out.canonicalize();
        Ok(out)
    }
}
