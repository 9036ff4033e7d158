//! Quasi-invariant distributions of cycles and closed classes, and the exit
//! rates they induce. The exit exponents computed here must agree with the
//! reweighting done by both sweeps.

use serde::Serialize;

use crate::alg1::{Alg1Report, CycleRecord};
use crate::alg2::{class_exit_exponent, Alg2Report, ClassRecord};
use crate::analysis::strongly_connected_components;
use crate::generator::{check_epsilon, GeneratorError};
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuasiError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("the class is empty")]
    Empty,
    #[error("arc {tail} -> {head} does not start in the class")]
    ForeignTail { tail: usize, head: usize },
    #[error("member {0} has no arc inside the class")]
    NoInternalArc(usize),
    #[error("min-arcs inside the class split into {0} communicating classes; the zero eigenvalue is not simple")]
    NotSingleClass(usize),
}

/// An arc with its exponent and prefactor. `tail` is a member of the class;
/// `head` is a member for internal arcs and anything for exits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateArc {
    pub tail: usize,
    pub head: usize,
    pub weight: Weight,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ClassInput {
    pub members: Vec<usize>,
    pub internal: Vec<RateArc>,
    pub exits: Vec<RateArc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitRate {
    pub tail: usize,
    pub head: usize,
    /// `U_ix + theta - U_min(i)`.
    pub exponent: Weight,
    /// `ln(pi(i) * L_ix)` at the requested `eps`.
    pub ln_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiInvariant {
    pub members: Vec<usize>,
    pub epsilon: f64,
    /// `U_min` per member, aligned with `members`.
    pub u_min: Vec<Weight>,
    pub theta: Weight,
    /// Zero left eigenvector of `M = D^{-1} L^C`, normalised to sum one.
    pub xi: Vec<f64>,
    pub ln_pi: Vec<f64>,
    pub pi: Vec<f64>,
    pub exits: Vec<ExitRate>,
}

impl QuasiInvariant {
    /// Total escape rate in log form.
    pub fn ln_escape_rate(&self) -> f64 {
        let m = self.exits.iter().map(|e| e.ln_rate).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + self.exits.iter().map(|e| (e.ln_rate - m).exp()).sum::<f64>().ln()
    }

    /// Smallest exit exponent; the escape rate is of order `exp(-it / eps)`.
    pub fn escape_exponent(&self) -> Option<Weight> {
        self.exits.iter().map(|e| e.exponent).min()
    }
}

/// Stationary vector of a rate matrix (rows: off-diagonal rates, diagonal
/// ignored) by state reduction; no subtractions are performed.
pub fn stationary_gth(rates: &[Vec<f64>]) -> Vec<f64> {
    let n = rates.len();
    let mut p: Vec<Vec<f64>> = rates.to_vec();
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| p[k][j]).sum();
        for row in p.iter_mut().take(k) {
            row[k] /= s;
        }
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    p[i][j] += p[i][k] * p[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    x[0] = 1.0;
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * p[i][k]).sum();
    }
    let total: f64 = x.iter().sum();
    x.iter().map(|v| v / total).collect()
}

pub fn quasi_invariant_class(input: &ClassInput, eps: f64) -> Result<QuasiInvariant, QuasiError> {
    check_epsilon(eps)?;
    let q = input.members.len();
    if q == 0 {
        return Err(QuasiError::Empty);
    }
    let pos = |x: usize| input.members.iter().position(|&m| m == x);
    let mut u_min: Vec<Option<Weight>> = vec![None; q];
    let mut internal = Vec::with_capacity(input.internal.len());
    for a in &input.internal {
        let (Some(i), Some(j)) = (pos(a.tail), pos(a.head)) else {
            return Err(QuasiError::ForeignTail {
                tail: a.tail,
                head: a.head,
            });
        };
        u_min[i] = Some(u_min[i].map_or(a.weight, |u| u.min(a.weight)));
        internal.push((i, j, a));
    }
    let u_min: Vec<Weight> = u_min
        .into_iter()
        .enumerate()
        .map(|(i, u)| u.ok_or(QuasiError::NoInternalArc(input.members[i])))
        .collect::<Result<_, _>>()?;
    // the limit of M keeps only the min-arcs; it must be irreducible
    let limit_edges: Vec<(usize, usize)> = internal
        .iter()
        .filter(|(i, _, a)| a.weight == u_min[*i])
        .map(|&(i, j, _)| (i, j))
        .collect();
    let sccs = strongly_connected_components(q, &limit_edges);
    if sccs.len() != 1 {
        return Err(QuasiError::NotSingleClass(sccs.len()));
    }
    let mut m = vec![vec![0.0; q]; q];
    for &(i, j, a) in &internal {
        m[i][j] += a.kappa * (-(a.weight - u_min[i]).to_f64() / eps).exp();
    }
    let xi = stationary_gth(&m);
    let theta = u_min.iter().copied().max().expect("nonempty");
    let raw: Vec<f64> = (0..q).map(|i| xi[i].ln() + (u_min[i] - theta).to_f64() / eps).collect();
    let mx = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = mx + raw.iter().map(|r| (r - mx).exp()).sum::<f64>().ln();
    let ln_pi: Vec<f64> = raw.iter().map(|r| r - norm).collect();
    let mut exits = Vec::with_capacity(input.exits.len());
    for a in &input.exits {
        let i = pos(a.tail).ok_or(QuasiError::ForeignTail {
            tail: a.tail,
            head: a.head,
        })?;
        exits.push(ExitRate {
            tail: a.tail,
            head: a.head,
            exponent: class_exit_exponent(a.weight, u_min[i], theta),
            ln_rate: ln_pi[i] + a.kappa.ln() - a.weight.to_f64() / eps,
        });
    }
    Ok(QuasiInvariant {
        members: input.members.clone(),
        epsilon: eps,
        u_min,
        theta,
        xi,
        pi: ln_pi.iter().map(|v| v.exp()).collect(),
        ln_pi,
        exits,
    })
}

/// Asymptotic cycle distribution, scaled so the member with the largest
/// min-arc weight gets one: `pi(l) = kappa_q/kappa_l exp(-(U_q - U_l)/eps)`.
/// Inputs are the min-arc weight and prefactor of each member.
pub fn cycle_distribution(min_arcs: &[(Weight, f64)], eps: f64) -> Result<Vec<f64>, QuasiError> {
    check_epsilon(eps)?;
    let Some(&(uq, kq)) = min_arcs.iter().max_by_key(|(u, _)| *u) else {
        return Err(QuasiError::Empty);
    };
    Ok(min_arcs
        .iter()
        .map(|&(u, k)| kq / k * (-(uq - u).to_f64() / eps).exp())
        .collect())
}

/// A cycle is a class whose internal arcs form a single loop.
pub fn quasi_invariant_cycle(input: &ClassInput, eps: f64) -> Result<QuasiInvariant, QuasiError> {
    quasi_invariant_class(input, eps)
}

/// Input for a cycle closed by the single-arc sweep, in terms of hierarchy
/// nodes; exit heads are original states.
pub fn cycle_input(report: &Alg1Report, cycle: &CycleRecord) -> ClassInput {
    let q = cycle.members.len();
    let internal = (0..q)
        .map(|l| {
            let t = &report.transfers[cycle.member_arcs[l]];
            RateArc {
                tail: cycle.members[l],
                head: cycle.members[(l + 1) % q],
                weight: t.weight,
                kappa: t.kappa,
            }
        })
        .collect();
    let exits = cycle
        .exits
        .iter()
        .map(|e| RateArc {
            tail: e.member,
            head: e.head,
            weight: e.before,
            kappa: e.kappa_before,
        })
        .collect();
    ClassInput {
        members: cycle.members.clone(),
        internal,
        exits,
    }
}

/// Input for a class closed by the min-arc-set sweep. Members are hierarchy
/// nodes; prefactors are taken to be one.
pub fn class_input(report: &Alg2Report, class: &ClassRecord) -> ClassInput {
    let owner = |s: usize| {
        class
            .members
            .iter()
            .copied()
            .find(|&x| report.nodes[x].members.contains(&s))
    };
    let mut internal = Vec::new();
    for t in report.transfers.iter().filter(|t| t.step <= class.step) {
        if let (Some(a), Some(b)) = (owner(t.tail), owner(t.head)) {
            if a != b {
                internal.push(RateArc {
                    tail: a,
                    head: b,
                    weight: t.weight,
                    kappa: 1.0,
                });
            }
        }
    }
    let exits = class
        .updates
        .iter()
        .map(|u| RateArc {
            tail: u.member,
            head: u.head,
            weight: u.before,
            kappa: 1.0,
        })
        .collect();
    ClassInput {
        members: class.members.clone(),
        internal,
        exits,
    }
}
