//! Graph JSON documents.
//!
//! Numbers may be JSON numbers or `"p/q"` strings. Floats are recovered as
//! the simplest nearby rational, so values written by [`graph_to_json`]
//! round-trip exactly.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MetricMode, WeightedGraph};
use crate::rational::{format_rational, parse_rational, rationalize, to_f64, Rational};

fn number(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(Rational::from_integer(i.into()));
            }
            n.as_f64()
                .and_then(rationalize)
                .ok_or_else(|| Error::Parse(format!("{field}: not a finite number")))
        }
        Value::String(s) => {
            parse_rational(s).ok_or_else(|| Error::Parse(format!("{field}: cannot parse `{s}`")))
        }
        _ => Err(Error::Parse(format!("{field}: expected a number"))),
    }
}

fn string<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a str> {
    obj.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("{at}.{key}: expected a string")))
}

/// Writes an exact rational as a JSON number when that number reads back
/// exactly, otherwise as `"p/q"`.
pub fn rational_value(r: &Rational) -> Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer()) {
            return json!(i);
        }
    }
    let f = to_f64(r);
    if rationalize(f).as_ref() == Some(r) {
        json!(f)
    } else {
        json!(format_rational(r))
    }
}

pub fn graph_from_json(value: &Value) -> Result<WeightedGraph> {
    let root = value
        .as_object()
        .ok_or_else(|| Error::Parse("document: expected an object".into()))?;
    let mut b = GraphBuilder::new();
    let mode = match root.get("metric") {
        None => MetricMode::Combinatorial,
        Some(m) => serde_json::from_value(m.clone()).map_err(|_| {
            Error::Parse("metric: expected \"combinatorial\" or \"edge-lengths\"".into())
        })?,
    };
    b.metric(mode);
    let vertices = root
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("vertices: expected an array".into()))?;
    for (i, v) in vertices.iter().enumerate() {
        let at = format!("vertices[{i}]");
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse(format!("{at}: expected an object")))?;
        let id = string(obj, "id", &at)?;
        let m = number(
            obj.get("m").ok_or_else(|| Error::Parse(format!("{at}.m: missing")))?,
            &format!("{at}.m"),
        )?;
        let boundary = match obj.get("boundary") {
            None => false,
            Some(Value::Bool(x)) => *x,
            Some(_) => return Err(Error::Parse(format!("{at}.boundary: expected a boolean"))),
        };
        b.vertex(id, m, boundary);
    }
    let edges = root
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("edges: expected an array".into()))?;
    for (i, e) in edges.iter().enumerate() {
        let at = format!("edges[{i}]");
        let obj = e
            .as_object()
            .ok_or_else(|| Error::Parse(format!("{at}: expected an object")))?;
        let u = string(obj, "u", &at)?;
        let v = string(obj, "v", &at)?;
        let w = number(
            obj.get("w").ok_or_else(|| Error::Parse(format!("{at}.w: missing")))?,
            &format!("{at}.w"),
        )?;
        match obj.get("len") {
            None | Some(Value::Null) => b.edge(u, v, w),
            Some(l) => b.edge_with_length(u, v, w, number(l, &format!("{at}.len"))?),
        };
    }
    b.build()
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    graph_from_json(&value)
}

/// Canonical document: vertices in id order, edges by `(u, v)` with `u < v`.
pub fn graph_to_json(g: &WeightedGraph) -> Value {
    let vertices: Vec<Value> = (0..g.len())
        .map(|v| {
            json!({
                "id": g.id(v),
                "m": rational_value(g.measure(v)),
                "boundary": g.is_boundary(v),
            })
        })
        .collect();
    let edges: Vec<Value> = g
        .edges()
        .map(|(u, a)| {
            let mut e = Map::new();
            e.insert("u".into(), json!(g.id(u)));
            e.insert("v".into(), json!(g.id(a.to)));
            e.insert("w".into(), rational_value(&a.weight));
            if let Some(l) = &a.length {
                e.insert("len".into(), rational_value(l));
            }
            Value::Object(e)
        })
        .collect();
    json!({
        "vertices": vertices,
        "edges": edges,
        "metric": g.metric_mode(),
    })
}

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut s = serde_json::to_string_pretty(&graph_to_json(g)).expect("graph JSON serialises");
    s.push('\n');
    s
}
