//! Graphviz DOT text for chains and T-graphs.

use std::fmt::Write;

use crate::alg1::Alg1Report;
use crate::alg2::Alg2Report;
use crate::graph::ChainGraph;
use crate::tgraph::TGraph;
use crate::weight::Weight;

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    pub title: Option<String>,
    /// Laminar family of state sets drawn as nested clusters.
    pub clusters: Vec<Vec<usize>>,
    /// Arc drawn bold red (the latest transfer).
    pub highlight: Option<(usize, usize)>,
    /// Arcs still waiting in the bucket, drawn dashed.
    pub bucket: Vec<(usize, usize, Weight)>,
    /// Fill closed-class states and absorbing states with two styles.
    pub mark_closed: bool,
}

const CLOSED_FILL: &str = "palegreen";
const ABSORBING_FILL: &str = "lightblue";

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

/// Renders `arcs` over the states of `g`.
pub fn to_dot(g: &ChainGraph, arcs: &[(usize, usize, Weight)], opts: &DotOptions) -> String {
    let mut s = String::from("digraph G {\n");
    if let Some(t) = &opts.title {
        let _ = writeln!(s, "  label={};", quote(t));
    }
    let (mut closed, mut absorbing) = (Vec::new(), Vec::new());
    if opts.mark_closed {
        let edges: Vec<(usize, usize)> = arcs.iter().map(|&(a, b, _)| (a, b)).collect();
        let cc = crate::analysis::closed_communicating_classes(g.n(), &edges);
        closed = cc.nontrivial.concat();
        absorbing = cc.absorbing;
    }
    // clusters as a forest: a set's parent is the smallest strictly larger set containing it
    let mut sets: Vec<Vec<usize>> = opts.clusters.clone();
    for c in &mut sets {
        c.sort_unstable();
    }
    sets.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let parent: Vec<Option<usize>> = (0..sets.len())
        .map(|i| {
            (0..i)
                .rev()
                .find(|&j| sets[j].len() > sets[i].len() && sets[i].iter().all(|v| sets[j].binary_search(v).is_ok()))
        })
        .collect();
    let innermost = |v: usize| (0..sets.len()).rev().find(|&i| sets[i].binary_search(&v).is_ok());
    let node_line = |v: usize| {
        let mut attrs = Vec::new();
        if closed.contains(&v) {
            attrs.push(format!("style=filled, fillcolor={CLOSED_FILL}"));
        } else if absorbing.contains(&v) {
            attrs.push(format!("style=filled, fillcolor={ABSORBING_FILL}"));
        }
        if attrs.is_empty() {
            format!("{};", quote(g.state_name(v)))
        } else {
            format!("{} [{}];", quote(g.state_name(v)), attrs.join(", "))
        }
    };
    fn emit(
        s: &mut String,
        depth: usize,
        cluster: Option<usize>,
        n: usize,
        parent: &[Option<usize>],
        innermost: &dyn Fn(usize) -> Option<usize>,
        node_line: &dyn Fn(usize) -> String,
        label: &dyn Fn(usize) -> String,
    ) {
        let pad = "  ".repeat(depth);
        for v in 0..n {
            if innermost(v) == cluster {
                let _ = writeln!(s, "{pad}{}", node_line(v));
            }
        }
        for (i, p) in parent.iter().enumerate() {
            if *p == cluster {
                let _ = writeln!(s, "{pad}subgraph cluster_{i} {{");
                let _ = writeln!(s, "{pad}  label={};", quote(&label(i)));
                emit(s, depth + 1, Some(i), n, parent, innermost, node_line, label);
                let _ = writeln!(s, "{pad}}}");
            }
        }
    }
    let label = |i: usize| g.set_name(&sets[i]);
    emit(&mut s, 1, None, g.n(), &parent, &innermost, &node_line, &label);
    for &(a, b, wt) in arcs {
        let mut attrs = vec![format!("label={}", quote(&wt.to_string()))];
        if opts.highlight == Some((a, b)) {
            attrs.push("color=red, penwidth=2".into());
        }
        let _ = writeln!(
            s,
            "  {} -> {} [{}];",
            quote(g.state_name(a)),
            quote(g.state_name(b)),
            attrs.join(", ")
        );
    }
    for &(a, b, wt) in &opts.bucket {
        let _ = writeln!(
            s,
            "  {} -> {} [label={}, style=dashed, color=gray];",
            quote(g.state_name(a)),
            quote(g.state_name(b)),
            quote(&wt.to_string())
        );
    }
    s.push_str("}\n");
    s
}

pub fn graph_to_dot(g: &ChainGraph) -> String {
    let arcs: Vec<_> = g.arcs().iter().map(|a| (a.tail, a.head, a.weight)).collect();
    to_dot(g, &arcs, &DotOptions::default())
}

fn tgraph_arcs(t: &TGraph) -> Vec<(usize, usize, Weight)> {
    t.arcs.iter().map(|a| (a.tail, a.head, a.weight)).collect()
}

/// `T_k` of a single-arc sweep: latest arc highlighted, cycles closed by
/// step `k` clustered.
pub fn alg1_tgraph_dot(g: &ChainGraph, report: &Alg1Report, k: usize) -> String {
    let t = report.tgraph(k);
    let highlight = t.arcs.iter().max_by_key(|a| a.step).map(|a| (a.tail, a.head));
    let clusters = report
        .cycle_nodes()
        .filter(|(_, n)| n.birth_step.is_some_and(|s| s <= k))
        .map(|(_, n)| n.members.clone())
        .collect();
    let title = match t.threshold {
        Some(th) => format!("T_{k}, exponent {th}"),
        None => "T_0".to_string(),
    };
    to_dot(
        g,
        &tgraph_arcs(&t),
        &DotOptions {
            title: Some(title),
            clusters,
            highlight,
            ..Default::default()
        },
    )
}

/// `T_p` of a min-arc-set sweep: contracted classes clustered, closed classes
/// and absorbing states filled.
pub fn alg2_tgraph_dot(g: &ChainGraph, report: &Alg2Report, p: usize) -> String {
    let t = report.tgraph(p);
    let clusters = report
        .classes
        .iter()
        .filter(|c| c.step <= p)
        .map(|c| report.nodes[c.node].members.clone())
        .collect();
    let title = match t.threshold {
        Some(th) => format!("T_{p}, exponent {th}"),
        None => "T_0".to_string(),
    };
    to_dot(
        g,
        &tgraph_arcs(&t),
        &DotOptions {
            title: Some(title),
            clusters,
            mark_closed: true,
            ..Default::default()
        },
    )
}
