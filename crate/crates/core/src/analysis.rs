//! Communicating-class analysis: strongly connected components, closed
//! classes, absorbing states and min-arcs.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::graph::{ChainGraph, GraphError};
use crate::weight::Weight;

/// Strongly connected components of the digraph on `0..n` with the given
/// edges. Members are sorted and components are ordered by smallest member.
pub fn strongly_connected_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(n, edges.len());
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for &(a, b) in edges {
        g.add_edge(nodes[a], nodes[b], ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Closed communicating classes split by size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClosedClasses {
    /// Classes with at least two members and no arc leaving them.
    pub nontrivial: Vec<Vec<usize>>,
    /// Vertices without outgoing arcs.
    pub absorbing: Vec<usize>,
}

impl ClosedClasses {
    /// All closed classes, absorbing states as singletons, ordered by smallest member.
    pub fn all(&self) -> Vec<Vec<usize>> {
        let mut v = self.nontrivial.clone();
        v.extend(self.absorbing.iter().map(|&a| vec![a]));
        v.sort_unstable_by_key(|c| c[0]);
        v
    }
}

/// Closed communicating classes of the digraph on `0..n`: SCCs with no arc
/// leaving them in the condensation.
pub fn closed_communicating_classes(n: usize, edges: &[(usize, usize)]) -> ClosedClasses {
    let comps = strongly_connected_components(n, edges);
    let mut comp_of = vec![0usize; n];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let mut leaves = vec![false; comps.len()];
    for &(a, b) in edges {
        if comp_of[a] != comp_of[b] {
            leaves[comp_of[a]] = true;
        }
    }
    let mut out = ClosedClasses::default();
    for (c, members) in comps.into_iter().enumerate() {
        if leaves[c] {
            continue;
        }
        if members.len() == 1 {
            let v = members[0];
            // a singleton SCC without exits has no arcs at all (no self-loops)
            out.absorbing.push(v);
        } else {
            out.nontrivial.push(members);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub scc_partition: Vec<Vec<String>>,
    pub closed_classes: Vec<Vec<String>>,
    pub is_irreducible: bool,
    pub single_closed_class: bool,
}

/// Communicating-class summary of a chain graph. Structural invariants are
/// already enforced by [`ChainGraph`] construction.
pub fn validate(g: &ChainGraph) -> ValidationReport {
    let edges = g.edges();
    let comps = strongly_connected_components(g.n(), &edges);
    let closed = closed_communicating_classes(g.n(), &edges).all();
    let names = |sets: &[Vec<usize>]| -> Vec<Vec<String>> {
        sets.iter()
            .map(|s| s.iter().map(|&i| g.state_name(i).to_string()).collect())
            .collect()
    };
    ValidationReport {
        n: g.n(),
        is_irreducible: comps.len() == 1,
        single_closed_class: closed.len() == 1,
        scc_partition: names(&comps),
        closed_classes: names(&closed),
    }
}

/// Minimum exponent among the arcs leaving `i` and the indices of every arc
/// attaining it.
pub fn min_arcs(g: &ChainGraph, i: usize) -> Result<(Weight, Vec<usize>), GraphError> {
    let out = g.out_arcs(i);
    let min = out
        .iter()
        .map(|&k| g.arcs()[k].weight)
        .min()
        .ok_or_else(|| GraphError::NoOutgoingArcs(g.state_name(i).to_string()))?;
    let set = out.iter().copied().filter(|&k| g.arcs()[k].weight == min).collect();
    Ok((min, set))
}

/// Reachability matrix by repeated relaxation; small graphs only.
pub fn reachability(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closure_partition(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let r = reachability(n, edges);
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let c: Vec<usize> = (0..n).filter(|&j| r[i][j] && r[j][i]).collect();
            for &j in &c {
                seen[j] = true;
            }
            out.push(c);
        }
        out
    }

    #[test]
    fn cycle_and_chain() {
        let cyc = [(0, 1), (1, 2), (2, 3), (3, 0)];
        assert_eq!(strongly_connected_components(4, &cyc), vec![vec![0, 1, 2, 3]]);
        let chain = [(0, 1), (1, 2), (2, 3), (3, 4)];
        assert_eq!(strongly_connected_components(5, &chain).len(), 5);
    }

    #[test]
    fn two_and_three_state_examples() {
        let g = ChainGraph::from_triples(&[("1", "2", "1"), ("2", "1", "2")]).unwrap();
        let r = validate(&g);
        assert!(r.is_irreducible && r.single_closed_class);
        assert_eq!(r.closed_classes, vec![vec!["1".to_string(), "2".to_string()]]);

        let g = ChainGraph::from_triples(&[("1", "2", "1"), ("2", "1", "2"), ("2", "3", "2")]).unwrap();
        let r = validate(&g);
        assert!(!r.is_irreducible);
        assert_eq!(r.closed_classes, vec![vec!["3".to_string()]]);
    }

    #[test]
    fn open_and_closed_classes() {
        // {0,1,2} closed, {3,4} open (leaks to 5), 5 absorbing
        let e = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 3), (4, 5)];
        let c = closed_communicating_classes(6, &e);
        assert_eq!(c.nontrivial, vec![vec![0, 1, 2]]);
        assert_eq!(c.absorbing, vec![5]);
        let c = closed_communicating_classes(3, &[]);
        assert!(c.nontrivial.is_empty());
        assert_eq!(c.absorbing, vec![0, 1, 2]);
    }

    #[test]
    fn min_arc_ties_are_all_returned() {
        let g =
            ChainGraph::from_triples(&[("1", "5", "2"), ("1", "6", "1.5"), ("2", "1", "2"), ("2", "3", "2")]).unwrap();
        let (u, set) = min_arcs(&g, 0).unwrap();
        assert_eq!(u, crate::weight::w("1.5"));
        assert_eq!(set.len(), 1);
        let (_, set) = min_arcs(&g, g.state_index("2").unwrap()).unwrap();
        assert_eq!(set.len(), 2);
        assert!(min_arcs(&g, g.state_index("5").unwrap()).is_err());
    }

    fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..11).prop_flat_map(|n| {
            let e = prop::collection::vec((0..n, 0..n), 0..(n * 3));
            (Just(n), e)
        })
    }

    proptest! {
        #[test]
        fn scc_matches_transitive_closure((n, edges) in edges_strategy()) {
            let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
            let mut a = strongly_connected_components(n, &edges);
            let mut b = closure_partition(n, &edges);
            a.sort(); b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn closed_classes_match_reachability((n, edges) in edges_strategy()) {
            let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
            let r = reachability(n, &edges);
            let closed = closed_communicating_classes(n, &edges).all();
            // a class is closed iff everything it reaches reaches back
            for c in closure_partition(n, &edges) {
                let i = c[0];
                let is_closed = (0..n).all(|j| !r[i][j] || r[j][i]);
                prop_assert_eq!(is_closed, closed.contains(&c));
            }
        }

        #[test]
        fn scc_invariant_under_relabeling((n, edges) in edges_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mapped: Vec<_> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            let mut a: Vec<Vec<usize>> = strongly_connected_components(n, &edges)
                .into_iter()
                .map(|c| { let mut v: Vec<usize> = c.into_iter().map(|x| perm[x]).collect(); v.sort(); v })
                .collect();
            a.sort();
            let mut b = strongly_connected_components(n, &mapped);
            b.sort();
            prop_assert_eq!(a, b);
        }
    }
}
