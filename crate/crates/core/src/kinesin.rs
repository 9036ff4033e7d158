//! Two-headed molecular motor on a four-state ring, doubled by a chemical
//! switch, and the sweep over the switch exponent `zeta`.
//!
//! Plus states see the potential tilt `+Psi`, minus states `-Psi`. Arcs
//! `1<->4` and `2<->3` feel the tilt, `1<->2` and `3<->4` do not, and every
//! state switches sign with exponent `zeta`.

use std::collections::BTreeSet;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::alg1::StopReason;
use crate::alg2::run_algorithm2;
use crate::graph::{ArcSpec, ChainGraph, GraphError};
use crate::stop::StopCriterion;
use crate::weight::{ParseWeightError, Weight};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinesinError {
    #[error("switch exponent zeta must be positive, got {0}")]
    Zeta(Weight),
    #[error("exponent of {tail} -> {head} is {value}; every barrier must exceed the wells it separates")]
    Barrier { tail: String, head: String, value: Weight },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("grid must be sorted and nonempty")]
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinesinParams {
    pub zeta: Weight,
    pub psi: Weight,
    /// Well energies `F_1..F_4`.
    pub wells: [Weight; 4],
    pub f12: Weight,
    pub f14: Weight,
    pub f23: Weight,
    pub f34: Weight,
}

impl Default for KinesinParams {
    fn default() -> Self {
        KinesinParams {
            zeta: Weight::integer(7),
            psi: Weight::integer(2),
            wells: [5, 0, 5, 0].map(Weight::integer),
            f12: Weight::integer(10),
            f14: Weight::new(15, 2),
            f23: Weight::new(15, 2),
            f34: Weight::integer(10),
        }
    }
}

impl KinesinParams {
    pub fn with_zeta(&self, zeta: Weight) -> KinesinParams {
        KinesinParams { zeta, ..self.clone() }
    }
}

pub const STATES: [&str; 8] = ["1+", "2+", "3+", "4+", "1-", "2-", "3-", "4-"];

/// Ring arcs for one chemical state with tilt `psi`, as `(from, to, U)` on
/// positions 1..4.
fn ring(p: &KinesinParams, psi: Weight) -> [(usize, usize, Weight); 8] {
    let f = |i: usize| p.wells[i - 1];
    [
        (4, 1, p.f14 - f(4) - psi),
        (1, 4, p.f14 - f(1) + psi),
        (2, 3, p.f23 - f(2) + psi),
        (3, 2, p.f23 - f(3) - psi),
        (3, 4, p.f34 - f(3)),
        (4, 3, p.f34 - f(4)),
        (1, 2, p.f12 - f(1)),
        (2, 1, p.f12 - f(2)),
    ]
}

pub fn build_kinesin(p: &KinesinParams) -> Result<ChainGraph, KinesinError> {
    if p.zeta <= Weight::ZERO {
        return Err(KinesinError::Zeta(p.zeta));
    }
    let mut arcs = Vec::with_capacity(24);
    for (sign, psi) in [("+", p.psi), ("-", -p.psi)] {
        for (a, b, u) in ring(p, psi) {
            let (tail, head) = (format!("{a}{sign}"), format!("{b}{sign}"));
            if u <= Weight::ZERO {
                return Err(KinesinError::Barrier { tail, head, value: u });
            }
            arcs.push(ArcSpec::new(tail, head, u));
        }
    }
    for i in 1..=4 {
        arcs.push(ArcSpec::new(format!("{i}+"), format!("{i}-"), p.zeta));
        arcs.push(ArcSpec::new(format!("{i}-"), format!("{i}+"), p.zeta));
    }
    Ok(ChainGraph::new(STATES.iter().map(|s| s.to_string()).collect(), arcs)?)
}

/// Stops once a closed class holds one of `{1+, 1-}` and one of `{3+, 3-}`.
pub fn switching_stop() -> StopCriterion {
    StopCriterion::ClosedClassCovering {
        first: vec![0, 4],
        second: vec![2, 6],
    }
}

/// Ring position of a state index (1..=4) and whether it is a plus state.
fn position(s: usize) -> (usize, bool) {
    (s % 4 + 1, s < 4)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub zeta: Weight,
    /// Arc set of the final T-graph.
    pub arcs: BTreeSet<(usize, usize)>,
    /// State sets of every class contracted on the way; the same arc set can
    /// be reached through differently nested classes.
    pub classes: BTreeSet<Vec<usize>>,
    /// Exponent of the last step: the slowest transition of the final graph.
    pub exponent: Weight,
    pub stopped: bool,
}

impl SweepPoint {
    /// Same final T-graph, nesting included.
    pub fn same_class(&self, other: &SweepPoint) -> bool {
        self.arcs == other.arcs && self.classes == other.classes
    }
}

pub fn sweep_point(p: &KinesinParams, zeta: Weight) -> Result<SweepPoint, KinesinError> {
    let g = build_kinesin(&p.with_zeta(zeta))?;
    let r = run_algorithm2(&g, switching_stop());
    Ok(SweepPoint {
        zeta,
        arcs: r.final_tgraph().arc_set(),
        classes: r.classes.iter().map(|c| r.nodes[c.node].members.clone()).collect(),
        exponent: *r.theta.last().expect("the ring always has arcs"),
        stopped: matches!(r.stop_reason, StopReason::Criterion(_)),
    })
}

/// The closed class that triggered the stop, if any.
fn switching_class(arcs: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    let edges: Vec<(usize, usize)> = arcs.iter().copied().collect();
    crate::analysis::closed_communicating_classes(8, &edges)
        .nontrivial
        .into_iter()
        .find(|c| c.iter().any(|v| [0, 4].contains(v)) && c.iter().any(|v| [2, 6].contains(v)))
}

/// Whether some closed walk inside the switching class winds once around the
/// ring in direction `dir` (`1` forward, `-1` backward). Switch arcs do not
/// move along the ring.
pub fn winds(arcs: &BTreeSet<(usize, usize)>, dir: i32) -> bool {
    let Some(class) = switching_class(arcs) else {
        return false;
    };
    let step = |a: usize, b: usize| -> i32 {
        let (pa, pb) = (position(a).0, position(b).0);
        if pb == pa % 4 + 1 {
            1
        } else if pa == pb % 4 + 1 {
            -1
        } else {
            0
        }
    };
    // displacement is bounded by the number of arcs in a simple lifted path
    let bound = 4 * class.len() as i32;
    for &s0 in &class {
        let mut seen = BTreeSet::from([(s0, 0)]);
        let mut stack = vec![(s0, 0)];
        while let Some((s, d)) = stack.pop() {
            for &(a, b) in arcs.iter().filter(|&&(a, _)| a == s) {
                if !class.contains(&b) {
                    continue;
                }
                let nd = d + step(a, b);
                if b == s0 && nd == 4 * dir {
                    return true;
                }
                if nd.abs() <= bound && seen.insert((b, nd)) {
                    stack.push((b, nd));
                }
            }
        }
    }
    false
}

/// Net forward motion: a forward revolution exists and a backward one does not.
pub fn walks_forward(arcs: &BTreeSet<(usize, usize)>) -> bool {
    winds(arcs, 1) && !winds(arcs, -1)
}

/// `constant + slope * zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Affine {
    pub constant: Weight,
    pub slope: Weight,
}

impl Affine {
    pub fn at(&self, zeta: Weight) -> Weight {
        self.constant + self.slope * zeta
    }

    fn through(a: (Weight, Weight), b: (Weight, Weight)) -> Affine {
        let slope = (b.1 - a.1) / (b.0 - a.0);
        Affine {
            constant: a.1 - slope * a.0,
            slope,
        }
    }
}

impl std::fmt::Display for Affine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let z = Weight::ZERO;
        match (self.constant == z, self.slope == z) {
            (_, true) => write!(f, "{}", self.constant),
            (true, false) if self.slope == Weight::integer(1) => write!(f, "zeta"),
            (true, false) => write!(f, "{}*zeta", self.slope),
            (false, false) if self.slope == Weight::integer(1) => write!(f, "{} + zeta", self.constant),
            (false, false) if self.slope == Weight::integer(-1) => write!(f, "{} - zeta", self.constant),
            (false, false) => write!(f, "{} + {}*zeta", self.constant, self.slope),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepInterval {
    /// First and last grid points of the run of equal final T-graphs.
    pub first: Weight,
    pub last: Weight,
    pub arcs: Vec<(String, String)>,
    pub walks_forward: bool,
    /// Slowest-transition exponent as a function of `zeta`, when it is affine
    /// on the interval.
    pub exponent: Option<Affine>,
    pub exponent_at_first: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    /// The critical value lies in `[lo, hi]`.
    pub lo: Weight,
    pub hi: Weight,
    /// Simplest rational in the bracket, after bisection.
    pub value: Option<Weight>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub intervals: Vec<SweepInterval>,
    pub boundaries: Vec<Boundary>,
}

pub const BISECTION_STEPS: usize = 20;

/// Sweeps the grid; consecutive points with the same labeled final T-graph
/// form one interval. With `bisect`, each boundary bracket is narrowed by
/// exact rational bisection and snapped to the simplest rational inside it.
pub fn kinesin_sweep(p: &KinesinParams, grid: &[Weight], bisect: bool) -> Result<SweepResult, KinesinError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(KinesinError::Grid);
    }
    let points: Vec<SweepPoint> = grid.par_iter().map(|&z| sweep_point(p, z)).collect::<Result<_, _>>()?;
    let g = build_kinesin(&p.with_zeta(grid[0]))?;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for i in 0..points.len() {
        match runs.last_mut() {
            Some(r) if points[r.1].same_class(&points[i]) => r.1 = i,
            _ => runs.push((i, i)),
        }
    }
    let boundaries: Vec<Boundary> = runs
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let (a, b) = (&points[w[0].1], &points[w[1].0]);
            if bisect {
                bisect_boundary(p, a, b)
            } else {
                Ok(Boundary {
                    lo: a.zeta,
                    hi: b.zeta,
                    value: None,
                })
            }
        })
        .collect::<Result<_, _>>()?;
    let mut intervals = Vec::with_capacity(runs.len());
    for (r, &(i0, i1)) in runs.iter().enumerate() {
        let lo = if r == 0 { None } else { Some(boundaries[r - 1].hi) };
        let hi = boundaries.get(r).map(|b| b.lo);
        let exponent = exponent_line(p, &points[i0..=i1], lo, hi)?;
        intervals.push(SweepInterval {
            first: points[i0].zeta,
            last: points[i1].zeta,
            arcs: points[i0]
                .arcs
                .iter()
                .map(|&(a, b)| (g.state_name(a).to_string(), g.state_name(b).to_string()))
                .collect(),
            walks_forward: walks_forward(&points[i0].arcs),
            exponent,
            exponent_at_first: points[i0].exponent,
        });
    }
    Ok(SweepResult { intervals, boundaries })
}

fn bisect_boundary(p: &KinesinParams, a: &SweepPoint, b: &SweepPoint) -> Result<Boundary, KinesinError> {
    let (mut lo, mut hi) = (a.zeta, b.zeta);
    for _ in 0..BISECTION_STEPS {
        let mid = lo.midpoint(&hi);
        if sweep_point(p, mid)?.same_class(a) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Boundary {
        lo,
        hi,
        value: Some(Weight::simplest_between(lo, hi)),
    })
}

/// Fits the slowest exponent on an interval by exact evaluation at two points
/// of the same class and checks the fit on every grid point of the run.
fn exponent_line(
    p: &KinesinParams,
    run: &[SweepPoint],
    lo: Option<Weight>,
    hi: Option<Weight>,
) -> Result<Option<Affine>, KinesinError> {
    let first = &run[0];
    let second = if run.len() >= 2 {
        Some((run[run.len() - 1].zeta, run[run.len() - 1].exponent))
    } else {
        // probe toward the nearer known edge of the interval
        let target = match (lo, hi) {
            (_, Some(h)) => h,
            (Some(l), None) => l,
            (None, None) => first.zeta + Weight::integer(1),
        };
        let mut found = None;
        let mut z = first.zeta.midpoint(&target);
        for _ in 0..BISECTION_STEPS {
            let q = sweep_point(p, z)?;
            if q.same_class(first) && q.zeta != first.zeta {
                found = Some((q.zeta, q.exponent));
                break;
            }
            z = first.zeta.midpoint(&z);
        }
        found
    };
    let Some(second) = second else {
        return Ok(None);
    };
    let line = Affine::through((first.zeta, first.exponent), second);
    Ok(run.iter().all(|q| line.at(q.zeta) == q.exponent).then_some(line))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridParseError {
    #[error("grid `{0}` must have the form start:stop:step")]
    Shape(String),
    #[error("grid bound `{token}`: {source}")]
    Bound { token: String, source: ParseWeightError },
    #[error("grid step must be positive and start must not exceed stop")]
    Order,
    #[error("grid has more than {0} points")]
    TooMany(usize),
}

pub const MAX_GRID_POINTS: usize = 100_000;

/// Parses `start:stop:step` into the exact points `start, start+step, ...`
/// up to and including `stop`.
pub fn parse_grid(s: &str) -> Result<Vec<Weight>, GridParseError> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(GridParseError::Shape(s.to_string()));
    };
    let parse = |t: &str| {
        Weight::from_str(t.trim()).map_err(|source| GridParseError::Bound {
            token: t.trim().to_string(),
            source,
        })
    };
    let (start, stop, step) = (parse(a)?, parse(b)?, parse(c)?);
    if step <= Weight::ZERO || start > stop {
        return Err(GridParseError::Order);
    }
    let count = ((stop - start) / step).to_f64().floor();
    if !(count < MAX_GRID_POINTS as f64) {
        return Err(GridParseError::TooMany(MAX_GRID_POINTS));
    }
    let mut out = Vec::with_capacity(count as usize + 1);
    let mut z = start;
    while z <= stop {
        out.push(z);
        z = z.checked_add(&step).ok_or(GridParseError::TooMany(MAX_GRID_POINTS))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::w;

    #[test]
    fn ring_exponents() {
        let g = build_kinesin(&KinesinParams::default()).unwrap();
        let u = |a: &str, b: &str| {
            g.arc_between(g.state_index(a).unwrap(), g.state_index(b).unwrap())
                .unwrap()
                .weight
        };
        assert_eq!(u("3+", "2+"), w("0.5"));
        assert_eq!(u("4+", "3+"), w("10"));
        assert_eq!(u("1-", "4-"), w("0.5"));
        assert_eq!(u("4+", "1+"), w("5.5"));
        assert_eq!(u("2-", "3-"), w("5.5"));
        assert_eq!(u("2+", "2-"), w("7"));
        assert_eq!(g.arcs().len(), 24);
    }

    #[test]
    fn nonpositive_zeta_is_rejected() {
        let p = KinesinParams::default().with_zeta(Weight::ZERO);
        assert!(matches!(build_kinesin(&p), Err(KinesinError::Zeta(_))));
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.25:10.25:0.5").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], w("10.25"));
        assert_eq!(parse_grid("1:2:1/3").unwrap().len(), 4);
        assert!(matches!(parse_grid("1:2"), Err(GridParseError::Shape(_))));
        assert!(matches!(parse_grid("1:x:1"), Err(GridParseError::Bound { token, .. }) if token == "x"));
        assert_eq!(parse_grid("2:1:1"), Err(GridParseError::Order));
        assert_eq!(parse_grid("0:1:0"), Err(GridParseError::Order));
    }

    #[test]
    fn coarse_grids_inside_one_interval() {
        let p = KinesinParams::default();
        let r = kinesin_sweep(&p, &[w("1"), w("3")], false).unwrap();
        assert!(r.boundaries.is_empty());
        assert_eq!(r.intervals.len(), 1);
        let line = r.intervals[0].exponent.unwrap();
        assert_eq!(line.to_string(), "10.5 - zeta");
        assert!(r.intervals[0].walks_forward);

        let r = kinesin_sweep(&p, &[w("5.25")], false).unwrap();
        assert_eq!(r.intervals[0].exponent_at_first, w("6"));
        assert!(r.intervals[0].walks_forward);
    }

    #[test]
    fn large_zeta_steps_back_and_forth() {
        let pt = sweep_point(&KinesinParams::default(), w("12")).unwrap();
        assert!(pt.stopped);
        assert_eq!(pt.exponent, w("10"));
        assert!(!winds(&pt.arcs, 1) && !winds(&pt.arcs, -1));
    }
}
