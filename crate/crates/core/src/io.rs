//! Reading and writing chain graphs as JSON or TSV.
//!
//! JSON: `{"states": [...], "arcs": [{"from": .., "to": .., "U": "3/2", "kappa": 0.7}]}`.
//! State ids may be strings or integers; `U` may be an integer, a decimal or
//! `p/q` string, or a JSON number.
//!
//! TSV: one arc per line, `tail head U [kappa]`, `#` starts a comment. An
//! optional line `@states a b c ...` fixes the state order and may list
//! states without arcs.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::graph::{ArcSpec, ChainGraph, GraphError};
use crate::weight::{ParseWeightError, Weight};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {message}")]
    Shape { context: String, message: String },
    #[error("{context}: {source}")]
    Weight { context: String, source: ParseWeightError },
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "tsv" => Ok(Format::Tsv),
            other => Err(format!("unknown format `{other}` (expected json or tsv)")),
        }
    }
}

impl Format {
    /// Guess from a file name; JSON unless the extension says otherwise.
    pub fn from_path(path: &str) -> Format {
        if path.ends_with(".tsv") || path.ends_with(".txt") {
            Format::Tsv
        } else {
            Format::Json
        }
    }
}

pub fn parse_graph(text: &str, format: Format) -> Result<ChainGraph, InputError> {
    match format {
        Format::Json => parse_json(text),
        Format::Tsv => parse_tsv(text),
    }
}

fn shape(context: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Shape {
        context: context.into(),
        message: message.into(),
    }
}

fn state_id(v: &Value, context: &str) -> Result<String, InputError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
        other => Err(shape(
            context,
            format!("state id must be a string or integer, got {other}"),
        )),
    }
}

fn weight_value(v: &Value, context: &str) -> Result<Weight, InputError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => {
            return Err(shape(
                context,
                format!("U must be a number or rational string, got {other}"),
            ))
        }
    };
    text.parse().map_err(|source| InputError::Weight {
        context: context.to_string(),
        source,
    })
}

pub fn parse_json(text: &str) -> Result<ChainGraph, InputError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| shape("document", "expected a JSON object"))?;
    let mut states = Vec::new();
    if let Some(list) = obj.get("states") {
        let list = list.as_array().ok_or_else(|| shape("states", "expected an array"))?;
        for (i, s) in list.iter().enumerate() {
            states.push(state_id(s, &format!("states[{i}]"))?);
        }
    }
    let arcs = obj
        .get("arcs")
        .ok_or_else(|| shape("document", "missing `arcs`"))?
        .as_array()
        .ok_or_else(|| shape("arcs", "expected an array"))?;
    let mut specs = Vec::with_capacity(arcs.len());
    for (i, a) in arcs.iter().enumerate() {
        let ctx = format!("arcs[{i}]");
        let a = a.as_object().ok_or_else(|| shape(&ctx, "expected an object"))?;
        let from = state_id(a.get("from").ok_or_else(|| shape(&ctx, "missing `from`"))?, &ctx)?;
        let to = state_id(a.get("to").ok_or_else(|| shape(&ctx, "missing `to`"))?, &ctx)?;
        let weight = weight_value(a.get("U").ok_or_else(|| shape(&ctx, "missing `U`"))?, &ctx)?;
        let kappa = match a.get("kappa") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) => Some(n.as_f64().ok_or_else(|| shape(&ctx, "kappa is not representable"))?),
            Some(other) => return Err(shape(&ctx, format!("kappa must be a number, got {other}"))),
        };
        specs.push(ArcSpec {
            from,
            to,
            weight,
            kappa,
        });
    }
    Ok(ChainGraph::new(states, specs)?)
}

pub fn parse_tsv(text: &str) -> Result<ChainGraph, InputError> {
    let mut states = Vec::new();
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields[0] == "@states" {
            if !states.is_empty() || !specs.is_empty() {
                return Err(InputError::Tsv {
                    line,
                    message: "`@states` must come once, before any arc".into(),
                });
            }
            states.extend(fields[1..].iter().map(|s| s.to_string()));
            continue;
        }
        if fields.len() < 3 || fields.len() > 4 {
            return Err(InputError::Tsv {
                line,
                message: format!("expected `tail head U [kappa]`, got {} fields", fields.len()),
            });
        }
        let weight: Weight = fields[2].parse().map_err(|e: ParseWeightError| InputError::Tsv {
            line,
            message: e.to_string(),
        })?;
        let kappa = match fields.get(3) {
            None => None,
            Some(k) => Some(k.parse::<f64>().map_err(|_| InputError::Tsv {
                line,
                message: format!("malformed prefactor `{k}`"),
            })?),
        };
        specs.push(ArcSpec {
            from: fields[0].to_string(),
            to: fields[1].to_string(),
            weight,
            kappa,
        });
    }
    Ok(ChainGraph::new(states, specs)?)
}

/// JSON rendering; weights are written as exact strings.
pub fn to_json(g: &ChainGraph) -> Value {
    let arcs: Vec<Value> = g
        .arcs()
        .iter()
        .map(|a| {
            let mut o = json!({
                "from": g.state_name(a.tail),
                "to": g.state_name(a.head),
                "U": a.weight.to_string(),
            });
            if let Some(k) = a.kappa {
                o["kappa"] = json!(k);
            }
            o
        })
        .collect();
    json!({ "schema": 1, "states": g.states(), "arcs": arcs })
}

pub fn to_tsv(g: &ChainGraph) -> String {
    let mut s = String::from("@states");
    for name in g.states() {
        let _ = write!(s, "\t{name}");
    }
    s.push('\n');
    for a in g.arcs() {
        let _ = write!(s, "{}\t{}\t{}", g.state_name(a.tail), g.state_name(a.head), a.weight);
        if let Some(k) = a.kappa {
            let _ = write!(s, "\t{k:?}");
        }
        s.push('\n');
    }
    s
}
