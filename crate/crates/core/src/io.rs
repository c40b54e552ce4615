//! Text and JSON formats: edge lists, node attributes, and cascade traces.
//!
//! Edge-list files start with a header `n <count> directed|undirected`
//! followed by one `i j weight` triple per line. Node-attribute files hold
//! one `i phi0 theta [theta_prime]` line per node. Both are whitespace
//! delimited; `#` starts a comment.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::network::{build_network, CascadeTrace, Network, NetworkError, NodeState};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid trace JSON: {0}")]
    TraceJson(#[from] serde_json::Error),
    #[error("trace is empty")]
    EmptyTrace,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Parse an edge-list document (see module docs for the format).
pub fn parse_edge_list(text: &str, path: &str) -> Result<Network, IoError> {
    let mut n: Option<(usize, bool)> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if n.is_none() {
            if fields.len() != 3 || fields[0] != "n" {
                return Err(parse_err(
                    path,
                    lineno,
                    "expected header `n <count> directed|undirected`",
                ));
            }
            let count: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad node count `{}`", fields[1])))?;
            let undirected = match fields[2] {
                "directed" => false,
                "undirected" => true,
                other => {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("expected `directed` or `undirected`, got `{other}`"),
                    ))
                }
            };
            n = Some((count, undirected));
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected `i j weight`, got {} fields", fields.len()),
            ));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node index `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node index `{}`", fields[1])))?;
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad weight `{}`", fields[2])))?;
        edges.push((i, j, w));
    }
    let (count, undirected) = n.ok_or_else(|| parse_err(path, 1, "missing header line"))?;
    Ok(build_network(&edges, count, undirected)?)
}

pub fn read_edge_list(path: &Path) -> Result<Network, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, &path.display().to_string())
}

/// Per-node attributes as read from a node file.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttributes {
    pub phi0: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_prime: Option<Vec<f64>>,
}

impl NodeAttributes {
    /// All-healthy initial state carrying these thresholds.
    pub fn initial_state(&self) -> NodeState {
        let mut st = NodeState::healthy(self.theta.clone());
        st.theta_prime = self.theta_prime.clone();
        st
    }
}

/// Parse a node-attribute document: one `i phi0 theta [theta_prime]` line
/// per node, each index in 0..n appearing exactly once.
pub fn parse_node_attributes(text: &str, n: usize, path: &str) -> Result<NodeAttributes, IoError> {
    let mut phi0 = vec![f64::NAN; n];
    let mut theta = vec![f64::NAN; n];
    let mut theta_prime = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    let mut any_prime = false;
    let mut missing_prime = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!(
                    "expected `i phi0 theta [theta_prime]`, got {} fields",
                    fields.len()
                ),
            ));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node index `{}`", fields[0])))?;
        if i >= n {
            return Err(parse_err(path, lineno, format!("node {i} out of range (n={n})")));
        }
        if seen[i] {
            return Err(parse_err(path, lineno, format!("duplicate node {i}")));
        }
        seen[i] = true;
        let parse_f = |s: &str| -> Result<f64, IoError> {
            s.parse()
                .map_err(|_| parse_err(path, lineno, format!("bad number `{s}`")))
        };
        phi0[i] = parse_f(fields[1])?;
        theta[i] = parse_f(fields[2])?;
        if fields.len() == 4 {
            theta_prime[i] = parse_f(fields[3])?;
            any_prime = true;
        } else {
            missing_prime = true;
        }
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(parse_err(path, 0, format!("node {i} has no attribute line")));
    }
    if any_prime && missing_prime {
        return Err(parse_err(
            path,
            0,
            "theta_prime given for some nodes but not all",
        ));
    }
    Ok(NodeAttributes {
        phi0,
        theta,
        theta_prime: if any_prime { Some(theta_prime) } else { None },
    })
}

pub fn read_node_attributes(path: &Path, n: usize) -> Result<NodeAttributes, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_node_attributes(&text, n, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub s: Vec<u8>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub z: Vec<f64>,
    pub x: f64,
}

/// Serialized form of a cascade trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub schema_version: u32,
    pub steps: Vec<TraceStep>,
}

impl TraceDocument {
    pub fn from_trace(trace: &CascadeTrace) -> Self {
        let steps = trace
            .states
            .iter()
            .enumerate()
            .map(|(t, st)| TraceStep {
                t,
                s: st.s.iter().map(|&b| b as u8).collect(),
                phi: st.phi.clone(),
                theta: st.theta.clone(),
                z: (0..st.n()).map(|i| st.net_fragility(i)).collect(),
                x: trace.x_series[t],
            })
            .collect();
        TraceDocument {
            schema_version: TRACE_SCHEMA_VERSION,
            steps,
        }
    }

    pub fn to_trace(&self) -> CascadeTrace {
        let states: Vec<NodeState> = self
            .steps
            .iter()
            .map(|step| NodeState {
                s: step.s.iter().map(|&b| b != 0).collect(),
                phi: step.phi.clone(),
                theta: step.theta.clone(),
                theta_prime: None,
            })
            .collect();
        CascadeTrace {
            x_series: self.steps.iter().map(|s| s.x).collect(),
            terminated_at: states.len().saturating_sub(1),
            states,
        }
    }
}

/// Write a trace as pretty JSON. The emitted bytes are deterministic for
/// a given trace.
pub fn emit_trace(trace: &CascadeTrace, path: &Path) -> Result<(), IoError> {
    if trace.is_empty() {
        return Err(IoError::EmptyTrace);
    }
    let doc = TraceDocument::from_trace(trace);
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, json + "\n").map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<TraceDocument, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LoadVariant, ModelSpec};
    use crate::network::run_cascade;

    #[test]
    fn edge_list_round_trip_with_comments() {
        let text = "# a three node path\nn 3 undirected\n0 1 1.0  # first edge\n1 2 1.0\n";
        let net = parse_edge_list(text, "test").unwrap();
        assert_eq!(net.n(), 3);
        assert_eq!(net.k_in(1), 2);
    }

    #[test]
    fn edge_list_directed_header() {
        let net = parse_edge_list("n 2 directed\n0 1 0.5\n", "test").unwrap();
        assert_eq!(net.k_out(0), 1);
        assert_eq!(net.k_out(1), 0);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let err = parse_edge_list("n 2 undirected\n0 x 1.0\n", "net.txt").unwrap_err();
        assert!(err.to_string().contains("net.txt:2"));
        let err = parse_edge_list("nodes 2\n", "net.txt").unwrap_err();
        assert!(err.to_string().contains("header"));
        let err = parse_edge_list("", "net.txt").unwrap_err();
        assert!(err.to_string().contains("missing header"));
    }

    #[test]
    fn node_attributes_with_and_without_prime() {
        let attrs = parse_node_attributes("0 0.0 0.5\n1 1.0 0.7\n", 2, "t").unwrap();
        assert_eq!(attrs.phi0, vec![0.0, 1.0]);
        assert_eq!(attrs.theta, vec![0.5, 0.7]);
        assert!(attrs.theta_prime.is_none());

        let attrs = parse_node_attributes("0 0 0.5 0.6\n1 1 0.7 0.8\n", 2, "t").unwrap();
        assert_eq!(attrs.theta_prime, Some(vec![0.6, 0.8]));
    }

    #[test]
    fn node_attributes_reject_gaps_and_mixed_prime() {
        assert!(parse_node_attributes("0 0 0.5\n", 2, "t").is_err());
        assert!(parse_node_attributes("0 0 0.5\n0 0 0.5\n", 1, "t").is_err());
        assert!(parse_node_attributes("0 0 0.5 0.1\n1 0 0.5\n", 2, "t").is_err());
    }

    #[test]
    fn trace_document_round_trips() {
        let net = build_network(&[(0, 1, 1.0), (1, 2, 1.0)], 3, true).unwrap();
        let init = NodeState::healthy(vec![-0.1, 0.4, 0.4]);
        let spec = ModelSpec::constant_load(LoadVariant::Inward);
        let trace = run_cascade(&spec, &net, &init, 4).unwrap();
        let doc = TraceDocument::from_trace(&trace);
        assert_eq!(doc.schema_version, TRACE_SCHEMA_VERSION);
        // x equals the mean of s at each step
        for step in &doc.steps {
            let mean = step.s.iter().map(|&v| v as f64).sum::<f64>() / step.s.len() as f64;
            assert!((step.x - mean).abs() < 1e-15);
        }
        let back = doc.to_trace();
        assert_eq!(back.x_series, trace.x_series);
        for (a, b) in back.states.iter().zip(&trace.states) {
            assert_eq!(a.s, b.s);
            assert_eq!(a.phi, b.phi);
        }
        // and through JSON text
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: TraceDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, doc);
    }

    #[test]
    fn single_step_trace_serializes_to_one_element() {
        let net = build_network(&[], 2, true).unwrap();
        let init = NodeState::healthy(vec![0.5, 0.5]);
        let spec = ModelSpec::constant_load(LoadVariant::Inward);
        let trace = run_cascade(&spec, &net, &init, 3).unwrap();
        let doc = TraceDocument::from_trace(&trace);
        assert_eq!(doc.steps.len(), 1);
    }
}
