//! Generator matrices at finite `eps`.

use nalgebra::DMatrix;

use crate::graph::ChainGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("epsilon must be finite and positive, got {0}")]
    Epsilon(f64),
}

#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub matrix: DMatrix<f64>,
    pub epsilon: f64,
    /// Prefactors were absent and taken to be one.
    pub order_only: bool,
}

pub fn check_epsilon(eps: f64) -> Result<(), GeneratorError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(GeneratorError::Epsilon(eps))
    }
}

/// Off-diagonal rates `kappa_ij * exp(-U_ij / eps)`, diagonal set so that
/// rows sum to zero.
pub fn rate(g: &ChainGraph, arc: &crate::graph::Arc, eps: f64) -> f64 {
    g.kappa(arc) * (-arc.weight.to_f64() / eps).exp()
}

pub fn generator_matrix(g: &ChainGraph, eps: f64) -> Result<GeneratorMatrix, GeneratorError> {
    check_epsilon(eps)?;
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for a in g.arcs() {
        m[(a.tail, a.head)] = rate(g, a, eps);
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
        m[(i, i)] = -s;
    }
    Ok(GeneratorMatrix {
        matrix: m,
        epsilon: eps,
        order_only: g.order_only(),
    })
}
