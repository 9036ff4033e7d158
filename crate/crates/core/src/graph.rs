//! The weighted directed graph of a Markov chain with rates
//! `L_ij = kappa_ij * exp(-U_ij / eps)`.
//!
//! A missing arc stands for `U_ij = +inf`; there is no numeric sentinel.

use std::collections::HashMap;
use std::fmt;

use crate::weight::{common_denominator, Weight};

/// Largest admissible least common denominator across all arc weights.
pub const MAX_COMMON_DENOMINATOR: i128 = 1_000_000_000_000;
/// Largest admissible `|U| * common_denominator`.
pub const MAX_SCALED_WEIGHT: i128 = 1_000_000_000_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop on state `{0}`")]
    SelfLoop(String),
    #[error("duplicate arc {tail} -> {head}")]
    DuplicateArc { tail: String, head: String },
    #[error("arc {tail} -> {head} has nonpositive exponent {weight}")]
    NonPositiveWeight { tail: String, head: String, weight: Weight },
    #[error("arc {tail} -> {head} has invalid prefactor {kappa} (must be finite and > 0)")]
    InvalidPrefactor { tail: String, head: String, kappa: f64 },
    #[error("arc {tail} -> {head}: prefactors must be given on every arc or on none")]
    MixedPrefactors { tail: String, head: String },
    #[error("arc refers to unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` is listed twice")]
    DuplicateState(String),
    #[error("empty state name")]
    EmptyStateName,
    #[error("arc weights exceed the supported exact range (common denominator or magnitude too large)")]
    WeightRange,
    #[error("state `{0}` has no outgoing arcs")]
    NoOutgoingArcs(String),
}

/// One arc `tail -> head` with exponent `U` and optional prefactor `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub weight: Weight,
    pub kappa: Option<f64>,
}

/// Arc description by state names, the unit accepted by [`ChainGraph::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSpec {
    pub from: String,
    pub to: String,
    pub weight: Weight,
    pub kappa: Option<f64>,
}

impl ArcSpec {
    pub fn new(from: impl Into<String>, to: impl Into<String>, weight: Weight) -> Self {
        ArcSpec {
            from: from.into(),
            to: to.into(),
            weight,
            kappa: None,
        }
    }

    pub fn with_prefactor(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }
}

/// Immutable, validated chain graph.
#[derive(Clone, PartialEq)]
pub struct ChainGraph {
    states: Vec<String>,
    index: HashMap<String, usize>,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    has_prefactors: bool,
}

impl fmt::Debug for ChainGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainGraph")
            .field("states", &self.states)
            .field("arcs", &self.arcs.len())
            .field("has_prefactors", &self.has_prefactors)
            .finish()
    }
}

impl ChainGraph {
    /// Builds a graph, checking the structural invariants: no self-loops, at
    /// most one arc per ordered pair, positive finite exponents, positive
    /// prefactors given either on all arcs or on none.
    ///
    /// States mentioned only by arcs are appended after `states` in order of
    /// first appearance.
    pub fn new(states: Vec<String>, arcs: Vec<ArcSpec>) -> Result<ChainGraph, GraphError> {
        let mut names = Vec::with_capacity(states.len());
        let mut index = HashMap::new();
        for s in states {
            if s.is_empty() {
                return Err(GraphError::EmptyStateName);
            }
            if index.insert(s.clone(), names.len()).is_some() {
                return Err(GraphError::DuplicateState(s));
            }
            names.push(s);
        }
        Self::assemble(names, index, arcs, true)
    }

    /// Like [`ChainGraph::new`] but an arc naming an unlisted state is an error.
    pub fn with_declared_states(states: Vec<String>, arcs: Vec<ArcSpec>) -> Result<ChainGraph, GraphError> {
        let mut names = Vec::with_capacity(states.len());
        let mut index = HashMap::new();
        for s in states {
            if s.is_empty() {
                return Err(GraphError::EmptyStateName);
            }
            if index.insert(s.clone(), names.len()).is_some() {
                return Err(GraphError::DuplicateState(s));
            }
            names.push(s);
        }
        Self::assemble(names, index, arcs, false)
    }

    fn assemble(
        mut names: Vec<String>,
        mut index: HashMap<String, usize>,
        specs: Vec<ArcSpec>,
        auto_states: bool,
    ) -> Result<ChainGraph, GraphError> {
        let mut lookup = |name: &str, names: &mut Vec<String>| -> Result<usize, GraphError> {
            if name.is_empty() {
                return Err(GraphError::EmptyStateName);
            }
            if let Some(&i) = index.get(name) {
                return Ok(i);
            }
            if !auto_states {
                return Err(GraphError::UnknownState(name.to_string()));
            }
            let i = names.len();
            index.insert(name.to_string(), i);
            names.push(name.to_string());
            Ok(i)
        };
        let mut arcs = Vec::with_capacity(specs.len());
        let mut seen = std::collections::HashSet::new();
        let mut mode: Option<bool> = None;
        for spec in specs {
            let tail = lookup(&spec.from, &mut names)?;
            let head = lookup(&spec.to, &mut names)?;
            if tail == head {
                return Err(GraphError::SelfLoop(spec.from));
            }
            if !seen.insert((tail, head)) {
                return Err(GraphError::DuplicateArc {
                    tail: spec.from,
                    head: spec.to,
                });
            }
            if !spec.weight.is_positive() {
                return Err(GraphError::NonPositiveWeight {
                    tail: spec.from,
                    head: spec.to,
                    weight: spec.weight,
                });
            }
            if let Some(k) = spec.kappa {
                if !(k.is_finite() && k > 0.0) {
                    return Err(GraphError::InvalidPrefactor {
                        tail: spec.from,
                        head: spec.to,
                        kappa: k,
                    });
                }
            }
            match mode {
                None => mode = Some(spec.kappa.is_some()),
                Some(m) if m != spec.kappa.is_some() => {
                    return Err(GraphError::MixedPrefactors {
                        tail: spec.from,
                        head: spec.to,
                    })
                }
                _ => {}
            }
            arcs.push(Arc {
                tail,
                head,
                weight: spec.weight,
                kappa: spec.kappa,
            });
        }
        let denom = common_denominator(arcs.iter().map(|a| &a.weight)).ok_or(GraphError::WeightRange)?;
        if denom > MAX_COMMON_DENOMINATOR {
            return Err(GraphError::WeightRange);
        }
        for a in &arcs {
            let scaled = a.weight.numer().checked_mul(denom / a.weight.denom());
            match scaled {
                Some(v) if v <= MAX_SCALED_WEIGHT => {}
                _ => return Err(GraphError::WeightRange),
            }
        }
        let mut out = vec![Vec::new(); names.len()];
        for (i, a) in arcs.iter().enumerate() {
            out[a.tail].push(i);
        }
        Ok(ChainGraph {
            states: names,
            index,
            arcs,
            out,
            has_prefactors: mode.unwrap_or(false),
        })
    }

    /// Convenience constructor from `(from, to, U)` triples with exponents
    /// given as rational literals. Panics on malformed literals.
    pub fn from_triples(triples: &[(&str, &str, &str)]) -> Result<ChainGraph, GraphError> {
        let specs = triples
            .iter()
            .map(|(a, b, u)| ArcSpec::new(*a, *b, crate::weight::w(u)))
            .collect();
        ChainGraph::new(Vec::new(), specs)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Indices (into [`ChainGraph::arcs`]) of the arcs leaving `i`.
    pub fn out_arcs(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn arc_between(&self, tail: usize, head: usize) -> Option<&Arc> {
        self.out[tail].iter().map(|&k| &self.arcs[k]).find(|a| a.head == head)
    }

    pub fn has_prefactors(&self) -> bool {
        self.has_prefactors
    }

    /// True when only exponential orders are known: prefactors default to one
    /// and every derived prefactor is of order one only, not sharp.
    pub fn order_only(&self) -> bool {
        !self.has_prefactors
    }

    /// Prefactor of an arc, `1` when the graph carries none.
    pub fn kappa(&self, arc: &Arc) -> f64 {
        arc.kappa.unwrap_or(1.0)
    }

    /// Plain edge list, for the graph-theoretic helpers.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.arcs.iter().map(|a| (a.tail, a.head)).collect()
    }

    /// Same graph with states renamed by `f`; arc order is preserved.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Result<ChainGraph, GraphError> {
        let states = self.states.iter().map(|s| f(s)).collect();
        let specs = self
            .arcs
            .iter()
            .map(|a| ArcSpec {
                from: f(&self.states[a.tail]),
                to: f(&self.states[a.head]),
                weight: a.weight,
                kappa: a.kappa,
            })
            .collect();
        ChainGraph::new(states, specs)
    }

    /// Name for a set of states: the member names joined in state order,
    /// e.g. `{1,2,3}`. Single states keep their own name.
    pub fn set_name(&self, members: &[usize]) -> String {
        if members.len() == 1 {
            return self.states[members[0]].clone();
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        let parts: Vec<&str> = sorted.iter().map(|&i| self.states[i].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }
}
