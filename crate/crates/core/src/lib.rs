//! Critical timescales, T-graph hierarchies, optimal W-graphs and asymptotic
//! eigenvalue estimates for continuous-time Markov chains whose rates have the
//! form `kappa_ij * exp(-U_ij / eps)`.

pub mod alg1;
pub mod alg2;
pub mod analysis;
pub mod compare;
pub mod contraction;
pub mod dot;
pub mod fuzzing;
pub mod generator;
pub mod graph;
pub mod io;
pub mod kinesin;
pub mod kmc;
pub mod oracle;
pub mod quasi;
pub mod report;
pub mod spectral;
pub mod stop;
pub mod tgraph;
pub mod weight;
pub mod wgraph;

pub use graph::{ArcSpec, ChainGraph, GraphError};
pub use weight::Weight;
