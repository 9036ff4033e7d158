//! Entry points for the fuzz targets. Each takes raw bytes, ignores input that
//! is not UTF-8, and panics only when a parsed value breaks an invariant.

use crate::alg1::run_algorithm1;
use crate::alg2::run_algorithm2;
use crate::graph::ChainGraph;
use crate::io::{parse_json, parse_tsv, to_json, to_tsv};
use crate::kinesin::{parse_grid, MAX_GRID_POINTS};
use crate::stop::{StopCriterion, StopSpec};
use crate::weight::Weight;

/// Sweeps are only run on graphs this small, to keep each input fast.
const SWEEP_LIMIT: usize = 12;

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

fn check_graph(g: &ChainGraph) {
    let j = parse_json(&to_json(g).to_string()).expect("written JSON parses");
    assert_eq!(&j, g, "JSON round trip");
    let t = parse_tsv(&to_tsv(g)).expect("written TSV parses");
    assert_eq!(&t, g, "TSV round trip");
    if g.n() <= SWEEP_LIMIT {
        let r = run_algorithm1(g, StopCriterion::BucketEmpty);
        if r.final_sink().is_some() {
            assert_eq!(r.steps() - r.n_cycles(), g.n() - 1);
        }
        let r2 = run_algorithm2(g, StopCriterion::BucketEmpty);
        assert!(r2.theta.windows(2).all(|p| p[0] < p[1]));
    }
}

pub fn json_graph(data: &[u8]) {
    if let Some(Ok(g)) = text(data).map(parse_json) {
        check_graph(&g);
    }
}

pub fn tsv_graph(data: &[u8]) {
    if let Some(Ok(g)) = text(data).map(parse_tsv) {
        check_graph(&g);
    }
}

pub fn weight(data: &[u8]) {
    if let Some(Ok(x)) = text(data).map(str::parse::<Weight>) {
        let back: Weight = x.to_string().parse().expect("displayed weight parses");
        assert_eq!(back, x);
    }
}

pub fn stop(data: &[u8]) {
    if let Some(Ok(spec)) = text(data).map(str::parse::<StopSpec>) {
        let g = ChainGraph::from_triples(&[("a", "b", "1"), ("b", "a", "2")]).expect("valid graph");
        // unknown state names are an error, never a panic
        let _ = spec.resolve(&g);
        if let StopSpec::Covering { first, second } = &spec {
            assert!(!first.is_empty() && !second.is_empty());
        }
    }
}

pub fn grid(data: &[u8]) {
    if let Some(Ok(points)) = text(data).map(parse_grid) {
        assert!(!points.is_empty() && points.len() <= MAX_GRID_POINTS);
        assert!(points.windows(2).all(|p| p[0] < p[1]));
    }
}
