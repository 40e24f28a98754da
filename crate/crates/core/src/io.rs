//! Dataset files (JSONL and single-JSON) and the small CSV tables the
//! pipeline exchanges.
//!
//! Reals are always written with 17 significant digits, which round-trips
//! every finite `f64` exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// One graph object per line.
    Jsonl,
    /// `{"graphs":[...]}`; a bare graph object is also accepted on input.
    SingleJson,
}

impl DatasetFormat {
    /// `.jsonl` selects JSONL, anything else single-JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => DatasetFormat::Jsonl,
            _ => DatasetFormat::SingleJson,
        }
    }
}

#[derive(Deserialize)]
struct RawNode {
    id: u64,
    x: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawEdge {
    u: u64,
    v: u64,
    e: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawGraph {
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
    label: Option<i64>,
}

#[derive(Deserialize)]
struct RawDataset {
    graphs: Vec<RawGraph>,
}

fn to_graph(raw: RawGraph, index: usize) -> Result<(Graph, Option<i64>)> {
    let mut ids = HashMap::with_capacity(raw.nodes.len());
    for (i, node) in raw.nodes.iter().enumerate() {
        if ids.insert(node.id, i).is_some() {
            return Err(Error::validation(index, format!("duplicate node id {}", node.id)));
        }
    }
    let with_x = raw.nodes.iter().filter(|n| n.x.is_some()).count();
    if with_x != 0 && with_x != raw.nodes.len() {
        return Err(Error::validation(
            index,
            "node features present on some nodes but not others",
        ));
    }
    let features: Vec<Vec<f64>> = raw
        .nodes
        .into_iter()
        .map(|n| n.x.unwrap_or_default())
        .collect();

    let with_e = raw.edges.iter().filter(|e| e.e.is_some()).count();
    if with_e != 0 && with_e != raw.edges.len() {
        return Err(Error::validation(
            index,
            "edge features present on some edges but not others",
        ));
    }
    let mut edges = Vec::with_capacity(raw.edges.len());
    let mut edge_features = Vec::with_capacity(with_e);
    for edge in raw.edges {
        let lookup = |id: u64| {
            ids.get(&id).copied().ok_or_else(|| {
                Error::validation(index, format!("edge endpoint {id} is not a node id"))
            })
        };
        edges.push((lookup(edge.u)?, lookup(edge.v)?));
        if let Some(e) = edge.e {
            edge_features.push(e);
        }
    }
    let edge_features = (with_e > 0).then_some(edge_features);
    let graph = Graph::build(features, edges, edge_features, index)?;
    Ok((graph, raw.label))
}

fn assemble(parsed: Vec<(Graph, Option<i64>)>, classes: Option<usize>) -> Result<GraphDataset> {
    let labeled = parsed.iter().filter(|(_, l)| l.is_some()).count();
    if labeled == 0 {
        return Ok(GraphDataset::unlabeled(
            parsed.into_iter().map(|(g, _)| g).collect(),
        ));
    }
    let mut graphs = Vec::with_capacity(parsed.len());
    let mut labels = Vec::with_capacity(parsed.len());
    for (i, (g, l)) in parsed.into_iter().enumerate() {
        let l = l.ok_or_else(|| Error::validation(i, "missing label"))?;
        let l = usize::try_from(l).map_err(|_| Error::validation(i, "negative label"))?;
        graphs.push(g);
        labels.push(l);
    }
    GraphDataset::labeled(graphs, labels, classes)
}

fn parse_error(err: serde_json::Error, line_offset: usize) -> Error {
    Error::Parse {
        line: err.line().max(1) + line_offset,
        message: err.to_string(),
    }
}

/// Parses dataset text. `classes` overrides the inferred class count.
pub fn parse_dataset_str(
    text: &str,
    format: DatasetFormat,
    classes: Option<usize>,
) -> Result<GraphDataset> {
    let mut parsed = Vec::new();
    match format {
        DatasetFormat::Jsonl => {
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let raw: RawGraph =
                    serde_json::from_str(line).map_err(|e| parse_error(e, lineno))?;
                let index = parsed.len();
                parsed.push(to_graph(raw, index)?);
            }
        }
        DatasetFormat::SingleJson => {
            let doc: serde_json::Value =
                serde_json::from_str(text).map_err(|e| parse_error(e, 0))?;
            let raws = if doc.get("graphs").is_some() {
                RawDataset::deserialize(doc).map_err(|e| parse_error(e, 0))?.graphs
            } else {
                vec![RawGraph::deserialize(doc).map_err(|e| parse_error(e, 0))?]
            };
            for (i, raw) in raws.into_iter().enumerate() {
                parsed.push(to_graph(raw, i)?);
            }
        }
    }
    assemble(parsed, classes)
}

pub fn parse_dataset(path: &Path, format: DatasetFormat) -> Result<GraphDataset> {
    parse_dataset_with_classes(path, format, None)
}

pub fn parse_dataset_with_classes(
    path: &Path,
    format: DatasetFormat,
    classes: Option<usize>,
) -> Result<GraphDataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        Error::Parse {
            line: valid.iter().filter(|&&b| b == b'\n').count() + 1,
            message: "invalid UTF-8".into(),
        }
    })?;
    parse_dataset_str(&text, format, classes)
}

/// Formats a real with 17 significant digits. Positional notation for
/// decimal exponents in `-5..17`, scientific otherwise.
pub fn format_real(x: f64) -> String {
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        return format!("{mantissa}e{exp}");
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::with_capacity(24);
    out.push_str(sign);
    if exp >= 0 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        if split == digits.len() {
            out.push('0');
        } else {
            out.push_str(&digits[split..]);
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    }
    out
}

fn write_reals(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_real(*x));
    }
    out.push(']');
}

fn write_graph(out: &mut String, g: &Graph, label: Option<usize>) {
    out.push_str("{\"nodes\":[");
    for v in 0..g.node_count() {
        if v > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"id\":{v},\"x\":");
        write_reals(out, g.feature(v));
        out.push('}');
    }
    out.push_str("],\"edges\":[");
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"u\":{u},\"v\":{v}");
        if g.edge_dim().is_some() {
            out.push_str(",\"e\":");
            write_reals(out, g.edge_feature(i));
        }
        out.push('}');
    }
    out.push(']');
    if let Some(l) = label {
        let _ = write!(out, ",\"label\":{l}");
    }
    out.push('}');
}

pub fn serialize_dataset_string(ds: &GraphDataset, format: DatasetFormat) -> String {
    let mut out = String::new();
    let label = |i: usize| ds.labels().map(|l| l[i]);
    match format {
        DatasetFormat::Jsonl => {
            for (i, g) in ds.graphs().iter().enumerate() {
                write_graph(&mut out, g, label(i));
                out.push('\n');
            }
        }
        DatasetFormat::SingleJson => {
            out.push_str("{\"graphs\":[");
            for (i, g) in ds.graphs().iter().enumerate() {
                out.push_str(if i > 0 { ",\n" } else { "\n" });
                write_graph(&mut out, g, label(i));
            }
            out.push_str("\n]}\n");
        }
    }
    out
}

pub fn serialize_dataset(ds: &GraphDataset, path: &Path, format: DatasetFormat) -> Result<()> {
    write_text(path, &serialize_dataset_string(ds, format))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Square or rectangular matrix as CSV: a header row of column indices,
/// then one row of reals per matrix row.
pub fn matrix_to_csv(rows: &[Vec<f64>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = (0..cols)
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| format_real(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("not a real number: {field:?}"),
    })
}

pub fn matrix_from_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    let width = match lines.next() {
        Some((_, header)) if !header.trim().is_empty() => header.split(',').count(),
        _ => 0,
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| parse_real(f, i + 1))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Two-column CSV with a header: integer index, then a value.
pub fn indexed_column_to_csv(header: &str, values: &[f64]) -> String {
    let mut out = format!("{header}\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_real(*v));
    }
    out
}

/// Reads the value column of a two-column indexed CSV, keeping file order.
pub fn indexed_column_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (_, value) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected two columns".into(),
        })?;
        out.push(parse_real(value, i + 1)?);
    }
    Ok(out)
}
