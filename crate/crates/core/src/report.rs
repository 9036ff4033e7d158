//! JSON renderings of every result. Exact exponents are strings; a float
//! rendering sits next to each one. Keys come out sorted, so equal inputs
//! give byte-identical output.

use serde_json::{json, Value};

use crate::alg1::{Alg1Report, StopReason};
use crate::alg2::Alg2Report;
use crate::analysis::ValidationReport;
use crate::compare::ComparisonReport;
use crate::graph::ChainGraph;
use crate::kinesin::SweepResult;
use crate::kmc::{Census, Coverage};
use crate::spectral::{CharpolyCheck, ConvergenceRow, SpectralEstimate};
use crate::tgraph::TGraph;
use crate::weight::Weight;
use crate::wgraph::WGraph;

pub const SCHEMA: u32 = 1;

pub fn weight(w: Weight) -> Value {
    json!({ "exact": w.to_string(), "value": w.to_f64() })
}

fn opt_weight(w: Option<Weight>) -> Value {
    w.map_or(Value::Null, weight)
}

fn names(g: &ChainGraph, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| g.state_name(i).to_string()).collect()
}

fn stop_reason(r: &StopReason) -> Value {
    match r {
        StopReason::BucketEmpty => json!("bucket-empty"),
        StopReason::Criterion(c) => json!(c),
    }
}

pub fn tgraph(g: &ChainGraph, t: &TGraph) -> Value {
    let arcs: Vec<Value> = t
        .arcs
        .iter()
        .map(|a| {
            json!({
                "tail": g.state_name(a.tail),
                "head": g.state_name(a.head),
                "weight": a.weight.to_string(),
                "original": a.original.to_string(),
                "step": a.step,
            })
        })
        .collect();
    let cc = t.closed_classes();
    json!({
        "threshold": opt_weight(t.threshold),
        "arcs": arcs,
        "closed_classes": cc.nontrivial.iter().map(|c| names(g, c)).collect::<Vec<_>>(),
        "absorbing": names(g, &cc.absorbing),
    })
}

pub fn wgraph(g: &ChainGraph, w: &WGraph) -> Value {
    json!({
        "sinks": names(g, &w.sinks()),
        "arcs": w.arcs().iter().map(|&(a, b)| [g.state_name(a), g.state_name(b)]).collect::<Vec<_>>(),
        "total_weight": weight(w.total_weight),
    })
}

pub fn validation(r: &ValidationReport) -> Value {
    let mut v = serde_json::to_value(r).expect("plain data");
    v["schema"] = json!(SCHEMA);
    v["kind"] = json!("validation");
    v
}

fn alg1_tree(g: &ChainGraph, r: &Alg1Report, x: usize) -> Value {
    let node = &r.nodes[x];
    if x < r.n {
        return json!({ "state": g.state_name(x), "exit_exponent": opt_weight(node.exit_exponent) });
    }
    json!({
        "name": g.set_name(&node.members),
        "birth_step": node.birth_step,
        "birth_exponent": opt_weight(node.birth_exponent),
        "exit_exponent": opt_weight(node.exit_exponent),
        "main": g.state_name(node.main),
        "children": node.children.iter().map(|&c| alg1_tree(g, r, c)).collect::<Vec<_>>(),
    })
}

pub fn alg1(g: &ChainGraph, r: &Alg1Report) -> Value {
    let eigen: Vec<Value> = r
        .eigen
        .iter()
        .map(|e| {
            json!({
                "m": e.m,
                "delta": weight(e.delta),
                "alpha": e.alpha,
                "alpha_order_only": r.order_only,
                "k": e.step,
                "sink": g.state_name(e.sink),
                "absorbed_by": g.state_name(e.absorbed_by),
            })
        })
        .collect();
    let cycles: Vec<Value> = r
        .cycles
        .iter()
        .map(|c| {
            json!({
                "name": g.set_name(&r.nodes[c.node].members),
                "step": c.step,
                "gamma_last": weight(c.gamma_last),
                "dropped_arcs": c.dropped,
                "exits": c.exits.iter().map(|e| json!({
                    "tail": g.state_name(e.tail),
                    "head": g.state_name(e.head),
                    "before": e.before.to_string(),
                    "after": e.after.to_string(),
                    "kappa_after": e.kappa_after,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let tgraphs: Vec<Value> = (0..=r.steps()).map(|k| tgraph(g, &r.tgraph(k))).collect();
    json!({
        "schema": SCHEMA,
        "kind": "alg1",
        "states": g.states(),
        "order_only": r.order_only,
        "gamma": r.gamma.iter().map(|&w| weight(w)).collect::<Vec<_>>(),
        "K": r.steps(),
        "N_c": r.n_cycles(),
        "cycle_steps": r.cycle_steps(),
        "final_sink": r.final_sink().map(|s| g.state_name(s)),
        "eigen": eigen,
        "cycles": cycles,
        "tgraphs": tgraphs,
        "hierarchy": r.roots().iter().map(|&x| alg1_tree(g, r, x)).collect::<Vec<_>>(),
        "symmetry": {
            "detected": r.symmetry_detected(),
            "first_step": r.symmetry.map(|e| e.step),
            "events": r.symmetry_events.len(),
        },
        "tie_break": format!("{:?}", r.tie_break),
        "stop_reason": stop_reason(&r.stop_reason),
    })
}

fn alg2_tree(g: &ChainGraph, r: &Alg2Report, x: usize) -> Value {
    let node = &r.nodes[x];
    if x < r.n {
        return json!({ "state": g.state_name(x) });
    }
    json!({
        "name": g.set_name(&node.members),
        "birth_step": node.birth_step,
        "birth_exponent": opt_weight(node.birth_exponent),
        "children": node.children.iter().map(|&c| alg2_tree(g, r, c)).collect::<Vec<_>>(),
    })
}

pub fn alg2(g: &ChainGraph, r: &Alg2Report) -> Value {
    // windows are labelled by the distinct exponents only
    let windows: Vec<Value> = (0..r.steps())
        .map(|p| {
            json!({
                "p": p + 1,
                "from_exponent": weight(r.theta[p]),
                "to_exponent": opt_weight(r.theta.get(p + 1).copied()),
                "multiplicity": r.multiplicities[p],
                "tgraph": tgraph(g, &r.tgraph(p + 1)),
            })
        })
        .collect();
    let classes: Vec<Value> = r
        .classes
        .iter()
        .map(|c| {
            json!({
                "name": g.set_name(&r.nodes[c.node].members),
                "step": c.step,
                "theta": weight(c.theta),
                "updates": c.updates.iter().map(|u| json!({
                    "tail": g.state_name(u.tail),
                    "head": g.state_name(u.head),
                    "before": u.before.to_string(),
                    "after": u.after.to_string(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "kind": "alg2",
        "states": g.states(),
        "theta": r.theta.iter().map(|&w| weight(w)).collect::<Vec<_>>(),
        "multiplicities": r.multiplicities,
        "windows": windows,
        "classes": classes,
        "hierarchy": r.roots().iter().map(|&x| alg2_tree(g, r, x)).collect::<Vec<_>>(),
        "transient_states": names(g, &r.transient_states()),
        "prefactors_ignored": r.prefactors_ignored,
        "stop_reason": stop_reason(&r.stop_reason),
    })
}

pub fn comparison(c: &ComparisonReport) -> Value {
    let mut v = serde_json::to_value(c).expect("plain data");
    v["schema"] = json!(SCHEMA);
    v["kind"] = json!("compare");
    v["all_hold"] = json!(c.all_hold());
    v
}

pub fn spectral(s: &[SpectralEstimate]) -> Value {
    let per_eps: Vec<Value> = s
        .iter()
        .map(|e| {
            json!({
                "epsilon": e.epsilon,
                "estimates": e.estimates.iter().map(|x| json!({
                    "m": x.m,
                    "delta": weight(x.delta),
                    "alpha": x.alpha,
                    "alpha_order_only": x.alpha_order_only,
                    "lambda": x.lambda,
                    "ln_lambda": x.ln_lambda,
                })).collect::<Vec<_>>(),
                "numerical": e.numerical.as_ref().map(|v| v.iter().enumerate().map(|(i, z)| json!({
                    "m": i + 1,
                    "ln_neg_re": z.ln_neg_re(),
                    "re": z.value().re,
                    "im_over_re": z.im_over_re(),
                })).collect::<Vec<_>>()),
                "ratios": e.ratios(),
            })
        })
        .collect();
    json!({ "schema": SCHEMA, "kind": "eigs", "epsilons": per_eps })
}

pub fn charpoly(c: &CharpolyCheck) -> Value {
    serde_json::to_value(c).expect("plain data")
}

pub fn convergence(rows: &[ConvergenceRow]) -> Value {
    serde_json::to_value(rows).expect("plain data")
}

pub fn kmc(g: &ChainGraph, census: &Census, coverage: Option<&Coverage>) -> Value {
    json!({
        "schema": SCHEMA,
        "kind": "kmc",
        "epsilon": census.epsilon,
        "window": [census.window.0, census.window.1],
        "trajectories": census.trajectories,
        "seed": census.seed,
        "rng": census.rng,
        "truncated": census.truncated,
        "absorbed": census.absorbed,
        "total_jumps": census.total(),
        "counts": census.counts.iter().map(|(&(a, b), &c)| json!({
            "tail": g.state_name(a), "head": g.state_name(b), "count": c,
        })).collect::<Vec<_>>(),
        "coverage": coverage.map(|c| json!({
            "on_tgraph": c.on_tgraph,
            "total": c.total,
            "fraction": c.fraction,
        })),
    })
}

pub fn sweep(r: &SweepResult) -> Value {
    let intervals: Vec<Value> = r
        .intervals
        .iter()
        .map(|i| {
            json!({
                "first": i.first.to_string(),
                "last": i.last.to_string(),
                "arcs": i.arcs,
                "walks_forward": i.walks_forward,
                "slowest_exponent": i.exponent.map(|a| a.to_string()),
                "slowest_exponent_at_first": weight(i.exponent_at_first),
            })
        })
        .collect();
    let boundaries: Vec<Value> = r
        .boundaries
        .iter()
        .map(|b| json!({ "lo": b.lo.to_string(), "hi": b.hi.to_string(), "value": b.value.map(|v| v.to_string()) }))
        .collect();
    json!({ "schema": SCHEMA, "kind": "kinesin-sweep", "intervals": intervals, "boundaries": boundaries })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg1::run_algorithm1;
    use crate::stop::StopCriterion;

    #[test]
    fn alg1_json_has_schema_and_exact_strings() {
        let g = ChainGraph::from_triples(&[("1", "2", "1/3"), ("2", "1", "2")]).unwrap();
        let r = run_algorithm1(&g, StopCriterion::BucketEmpty);
        let v = alg1(&g, &r);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["gamma"][0]["exact"], "1/3");
        assert_eq!(v["K"], 2);
        assert_eq!(v["tgraphs"].as_array().unwrap().len(), 3);
        assert_eq!(render(&v), render(&alg1(&g, &r)));
    }
}
