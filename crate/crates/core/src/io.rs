//! Plain-text edge-list format.
//!
//! ```text
//! # optional full-line comments
//! n m
//! u v      (m lines, u < v, ascending lexicographic order)
//! ```
//!
//! The writer always emits canonical order, so files of equal graphs are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::GraphError;
use crate::graph::{Edge, Graph};

pub fn to_edge_list_string(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * (g.edge_count() + 1));
    writeln!(out, "{} {}", g.vertex_count(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<Edge> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        let err = |msg: String| GraphError::Parse { line: line_no, msg };
        if line.is_empty() {
            return Err(err("empty line".into()));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", fields.len())));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|e| err(format!("{s:?}: {e}")));
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        match header {
            None => header = Some((a, b)),
            Some((n, _)) => {
                if a >= n || b >= n {
                    return Err(err(format!("edge ({a}, {b}) out of range for n = {n}")));
                }
                if a >= b {
                    return Err(err(format!("edge ({a}, {b}) must satisfy u < v")));
                }
                edges.push((a, b));
            }
        }
    }
    let (n, m) = header.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if edges.len() != m {
        return Err(GraphError::Parse {
            line: text.lines().count(),
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::new(n, &edges)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    fs::write(path, to_edge_list_string(g))?;
    Ok(())
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    parse_edge_list(&fs::read_to_string(path)?)
}
