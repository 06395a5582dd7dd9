//! Line-based graph file format:
//!
//! ```text
//! # comment
//! node <id:int> <epsilon:float>
//! edge <u:int> <v:int> <weight:float>
//! ```
//!
//! Nodes must be declared before any edge references them. Floats accept
//! decimal and scientific notation. Blank lines are ignored.

use std::collections::HashSet;
use std::fmt;

use edgeh2_core::graph::build_graph;
use edgeh2_core::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

pub fn parse_graph_text(text: &str) -> Result<Graph, ParseError> {
    let mut vertices: Vec<(u64, f64)> = Vec::new();
    let mut edges: Vec<(u64, u64, f64)> = Vec::new();
    let mut declared: HashSet<u64> = HashSet::new();
    let mut edge_keys: HashSet<(u64, u64)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "node" => {
                if fields.len() != 3 {
                    return Err(err(lineno, "expected: node <id> <epsilon>"));
                }
                let id: u64 = fields[1]
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid node id '{}'", fields[1])))?;
                let eps: f64 = fields[2]
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid time scale '{}'", fields[2])))?;
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(err(lineno, format!("time scale must be positive, got {eps}")));
                }
                if !declared.insert(id) {
                    return Err(err(lineno, format!("node {id} declared twice")));
                }
                vertices.push((id, eps));
            }
            "edge" => {
                if fields.len() != 4 {
                    return Err(err(lineno, "expected: edge <u> <v> <weight>"));
                }
                let u: u64 = fields[1]
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid vertex id '{}'", fields[1])))?;
                let v: u64 = fields[2]
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid vertex id '{}'", fields[2])))?;
                let w: f64 = fields[3]
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid weight '{}'", fields[3])))?;
                for id in [u, v] {
                    if !declared.contains(&id) {
                        return Err(err(lineno, format!("vertex {id} used before declaration")));
                    }
                }
                if u == v {
                    return Err(err(lineno, format!("self-loop at vertex {u}")));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(err(lineno, format!("weight must be positive, got {w}")));
                }
                if !edge_keys.insert((u.min(v), u.max(v))) {
                    return Err(err(lineno, format!("duplicate edge {u}-{v}")));
                }
                edges.push((u, v, w));
            }
            other => {
                return Err(err(lineno, format!("unknown record '{other}'")));
            }
        }
    }
    build_graph(&vertices, &edges).map_err(|e| err(0, e.to_string()))
}
