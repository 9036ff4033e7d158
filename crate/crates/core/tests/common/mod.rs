#![allow(dead_code)]

use metachain::io::{parse_graph, Format};
use metachain::ChainGraph;

pub fn fixture(name: &str) -> ChainGraph {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_graph(&text, Format::from_path(&path)).unwrap()
}

pub fn names(g: &ChainGraph, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| g.state_name(i).to_string()).collect()
}

use metachain::graph::ArcSpec;
use metachain::Weight;
use rand::seq::SliceRandom;
use rand::Rng;

/// Strongly connected sparse graph: a random Hamiltonian cycle plus chords
/// with probability `density`. Exponents are distinct multiples of 1/5 drawn
/// from `1/5 ..= top/5`.
pub fn random_strong_graph(
    rng: &mut impl Rng,
    n: usize,
    density: f64,
    top: i128,
    prefactors: Option<(f64, f64)>,
) -> ChainGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 0..n {
        pairs.push((order[i], order[(i + 1) % n]));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !pairs.contains(&(i, j)) && rng.random_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    let mut pool: Vec<i128> = (1..=top.max(pairs.len() as i128)).collect();
    pool.shuffle(rng);
    let specs = pairs
        .iter()
        .zip(pool)
        .map(|(&(i, j), u)| {
            let spec = ArcSpec::new((i + 1).to_string(), (j + 1).to_string(), Weight::new(u, 5));
            match prefactors {
                Some((lo, hi)) => spec.with_prefactor(rng.random_range(lo..hi)),
                None => spec,
            }
        })
        .collect();
    let states = (1..=n).map(|i| i.to_string()).collect();
    ChainGraph::new(states, specs).unwrap()
}

/// Reversible chain: well energies `E_i` and symmetric barriers
/// `B_ij >= max(E_i, E_j)`, with `U_ij = B_ij - E_i`. Values are multiples
/// of 1/997 so ties are unlikely but possible; callers check for symmetry.
pub fn detailed_balance_graph(rng: &mut impl Rng, n: usize, density: f64) -> ChainGraph {
    let energy: Vec<i128> = (0..n).map(|_| rng.random_range(0..4000)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    // random spanning tree keeps it irreducible
    for i in 1..n {
        let j = order[rng.random_range(0..i)];
        pairs.push((order[i].min(j), order[i].max(j)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !pairs.contains(&(i, j)) && rng.random_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    let mut specs = Vec::new();
    for (i, j) in pairs {
        let barrier = energy[i].max(energy[j]) + rng.random_range(1..3000);
        for (a, b) in [(i, j), (j, i)] {
            specs.push(ArcSpec::new(
                (a + 1).to_string(),
                (b + 1).to_string(),
                Weight::new(barrier - energy[a], 997),
            ));
        }
    }
    ChainGraph::new((1..=n).map(|i| i.to_string()).collect(), specs).unwrap()
}

/// Random digraph with small integer exponents, full of ties; may be
/// reducible.
pub fn random_integer_graph(rng: &mut impl Rng, n: usize, density: f64, top: i128) -> ChainGraph {
    let mut specs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                specs.push(ArcSpec::new(
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    Weight::integer(rng.random_range(1..=top)),
                ));
            }
        }
    }
    ChainGraph::new((1..=n).map(|i| i.to_string()).collect(), specs).unwrap()
}
