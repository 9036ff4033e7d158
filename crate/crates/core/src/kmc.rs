//! Gillespie simulation of the chain at finite `eps` and the census of
//! observed transitions against T-graph arcs.
//!
//! Randomness comes from ChaCha8 seeded with the user seed; trajectory `r` of
//! a batch uses stream `r`, so any subset of a batch can be replayed alone.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::generator::{check_epsilon, rate, GeneratorError};
use crate::graph::ChainGraph;
use crate::tgraph::TGraph;

pub const RNG_NAME: &str = "ChaCha8";
pub const DEFAULT_EVENT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KmcError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("horizon must be finite and positive, got {0}")]
    Horizon(f64),
    #[error("window [{0}, {1}) is empty or invalid")]
    Window(f64, f64),
    #[error("initial state {0} is out of range")]
    State(usize),
    #[error("census is empty: no jumps observed in the window")]
    EmptyCensus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    pub time: f64,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: usize,
    pub jumps: Vec<Jump>,
    pub horizon: f64,
    pub seed: u64,
    pub stream: u64,
    /// Reached a state with no outgoing arcs before the horizon.
    pub absorbed: bool,
    /// Stopped at the event cap before the horizon.
    pub truncated: bool,
}

impl Trajectory {
    /// State occupied at time `t`.
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.jumps.partition_point(|j| j.time <= t);
        if k == 0 {
            self.initial
        } else {
            self.jumps[k - 1].head
        }
    }

    /// Completed holding periods as `(state, duration)`; the period cut by the
    /// horizon is left out.
    pub fn holding_times(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.jumps.len());
        let mut t0 = 0.0;
        let mut s = self.initial;
        for j in &self.jumps {
            out.push((s, j.time - t0));
            t0 = j.time;
            s = j.head;
        }
        out
    }

    /// Time spent in each state up to the horizon.
    pub fn occupation(&self, n: usize) -> Vec<f64> {
        let mut occ = vec![0.0; n];
        let mut t0 = 0.0;
        let mut s = self.initial;
        for j in &self.jumps {
            occ[s] += j.time - t0;
            t0 = j.time;
            s = j.head;
        }
        occ[s] += self.horizon - t0;
        occ
    }
}

/// Precomputed jump tables for one `eps`.
#[derive(Debug, Clone)]
pub struct Simulator {
    n: usize,
    epsilon: f64,
    /// Per state: heads and cumulative rates.
    heads: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
    cap: usize,
}

impl Simulator {
    pub fn new(g: &ChainGraph, eps: f64) -> Result<Simulator, KmcError> {
        check_epsilon(eps)?;
        let n = g.n();
        let mut heads = vec![Vec::new(); n];
        let mut cumulative = vec![Vec::new(); n];
        for i in 0..n {
            let mut acc = 0.0;
            for &a in g.out_arcs(i) {
                let arc = &g.arcs()[a];
                acc += rate(g, arc, eps);
                heads[i].push(arc.head);
                cumulative[i].push(acc);
            }
        }
        Ok(Simulator {
            n,
            epsilon: eps,
            heads,
            cumulative,
            cap: DEFAULT_EVENT_CAP,
        })
    }

    pub fn with_event_cap(mut self, cap: usize) -> Simulator {
        self.cap = cap;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Total exit rate `-L_ii`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        self.cumulative[i].last().copied().unwrap_or(0.0)
    }

    pub fn run(&self, x0: usize, horizon: f64, seed: u64, stream: u64) -> Result<Trajectory, KmcError> {
        if x0 >= self.n {
            return Err(KmcError::State(x0));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(KmcError::Horizon(horizon));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut t = 0.0;
        let mut s = x0;
        let mut jumps = Vec::new();
        let mut absorbed = false;
        let mut truncated = false;
        loop {
            let total = self.exit_rate(s);
            if total == 0.0 {
                absorbed = true;
                break;
            }
            let u: f64 = 1.0 - rng.random::<f64>();
            t += -u.ln() / total;
            if t >= horizon {
                break;
            }
            if jumps.len() == self.cap {
                truncated = true;
                break;
            }
            let r = rng.random::<f64>() * total;
            let c = &self.cumulative[s];
            let k = c.partition_point(|&x| x <= r).min(c.len() - 1);
            let head = self.heads[s][k];
            jumps.push(Jump { time: t, tail: s, head });
            s = head;
        }
        Ok(Trajectory {
            initial: x0,
            jumps,
            horizon,
            seed,
            stream,
            absorbed,
            truncated,
        })
    }
}

pub fn simulate(g: &ChainGraph, eps: f64, x0: usize, horizon: f64, seed: u64) -> Result<Trajectory, KmcError> {
    Simulator::new(g, eps)?.run(x0, horizon, seed, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub epsilon: f64,
    pub window: (f64, f64),
    pub trajectories: usize,
    pub seed: u64,
    pub rng: String,
    pub truncated: usize,
    pub absorbed: usize,
    /// Jump counts keyed by `(tail, head)`.
    #[serde(serialize_with = "serialize_counts")]
    pub counts: BTreeMap<(usize, usize), u64>,
}

fn serialize_counts<S: serde::Serializer>(counts: &BTreeMap<(usize, usize), u64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(counts.len()))?;
    for (&(tail, head), &count) in counts {
        seq.serialize_element(&(tail, head, count))?;
    }
    seq.end()
}

impl Census {
    pub fn empty(epsilon: f64, window: (f64, f64), seed: u64) -> Census {
        Census {
            epsilon,
            window,
            trajectories: 0,
            seed,
            rng: RNG_NAME.to_string(),
            truncated: 0,
            absorbed: 0,
            counts: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn add(&mut self, t: &Trajectory) {
        self.trajectories += 1;
        self.truncated += t.truncated as usize;
        self.absorbed += t.absorbed as usize;
        let (lo, hi) = self.window;
        for j in t.jumps.iter().filter(|j| j.time >= lo && j.time < hi) {
            *self.counts.entry((j.tail, j.head)).or_insert(0) += 1;
        }
    }

    /// Associative merge of two censuses taken with the same parameters.
    pub fn merge(mut self, other: Census) -> Census {
        self.trajectories += other.trajectories;
        self.truncated += other.truncated;
        self.absorbed += other.absorbed;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }

    /// CSV with columns `arc,window,count,frequency`.
    pub fn to_csv(&self, g: &ChainGraph) -> String {
        let total = self.total().max(1) as f64;
        let mut s = String::from("arc,window,count,frequency\n");
        for (&(a, b), &c) in &self.counts {
            s.push_str(&format!(
                "{}->{},{}:{},{},{}\n",
                g.state_name(a),
                g.state_name(b),
                self.window.0,
                self.window.1,
                c,
                c as f64 / total
            ));
        }
        s
    }
}

/// Runs `count` trajectories in parallel and tallies jumps inside `window`
/// without keeping the trajectories. Initial states cycle through `starts`.
pub fn census_runs(
    sim: &Simulator,
    starts: &[usize],
    window: (f64, f64),
    count: usize,
    seed: u64,
) -> Result<Census, KmcError> {
    if !(window.0 >= 0.0 && window.1 > window.0 && window.1.is_finite()) {
        return Err(KmcError::Window(window.0, window.1));
    }
    if let Some(&bad) = starts.iter().find(|&&s| s >= sim.n) {
        return Err(KmcError::State(bad));
    }
    if starts.is_empty() {
        return Err(KmcError::EmptyCensus);
    }
    let eps = sim.epsilon;
    (0..count)
        .into_par_iter()
        .map(|r| {
            let t = sim.run(starts[r % starts.len()], window.1, seed, r as u64)?;
            let mut c = Census::empty(eps, window, seed);
            c.add(&t);
            Ok(c)
        })
        .try_reduce(|| Census::empty(eps, window, seed), |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcCount {
    pub tail: usize,
    pub head: usize,
    pub count: u64,
    pub on_tgraph: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub on_tgraph: u64,
    pub total: u64,
    pub fraction: f64,
    pub per_arc: Vec<ArcCount>,
}

/// Fraction of observed jumps that lie on arcs of `t`.
pub fn census_vs_tgraph(census: &Census, t: &TGraph) -> Result<Coverage, KmcError> {
    let total = census.total();
    if total == 0 {
        return Err(KmcError::EmptyCensus);
    }
    let arcs = t.arc_set();
    let per_arc: Vec<ArcCount> = census
        .counts
        .iter()
        .map(|(&(tail, head), &count)| ArcCount {
            tail,
            head,
            count,
            on_tgraph: arcs.contains(&(tail, head)),
        })
        .collect();
    let on: u64 = per_arc.iter().filter(|a| a.on_tgraph).map(|a| a.count).sum();
    Ok(Coverage {
        on_tgraph: on,
        total,
        fraction: on as f64 / total as f64,
        per_arc,
    })
}

/// One-sample Kolmogorov-Smirnov test against `Exp(rate)`; returns the
/// statistic and its asymptotic p-value.
pub fn ks_exponential(samples: &[f64], rate: f64) -> (f64, f64) {
    let mut x = samples.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = 1.0 - (-rate * v).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sq = n.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    (d, kolmogorov_tail(lambda))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
