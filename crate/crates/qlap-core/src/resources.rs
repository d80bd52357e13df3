//! Resource-cost forecasting from closed-form complexity expressions.
//!
//! No simulation happens here: qubit counts, controlled-evolution
//! applications, and oracle-call costs follow directly from the graph'
//! size, the target precision δ, and the evolution-oracle tolerance ε.
//! Graph statistics come either from an in-memory [`Graph`] or from
//! [`scan_edge_list`], which streams an edge-list file and keeps only
//! per-vertex degrees, so estimates work for graphs far beyond what the
//! simulator (or the dense classical oracle) could hold.

use crate::graph::{Graph, GraphError};
use crate::qpe::EVOLUTION_TIME;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ResourceError {
    #[error("precision delta must lie in (0, 1), got {delta}")]
    InvalidDelta { delta: f64 },
    #[error("oracle tolerance epsilon must lie in (0, 1), got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },
    #[error("{m} ancilla bits overflow the controlled-application count")]
    AncillaOverflow { m: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Degree statistics of an edge list, cheap enough to stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub max_degree: usize,
}

impl GraphSummary {
    pub fn of_graph(g: &Graph) -> GraphSummary {
        GraphSummary {
            num_vertices: g.num_vertices(),
            num_edges: g.num_edges(),
            max_degree: g.max_degree(),
        }
    }
}

/// Streams the edge-list text format and returns degree statistics without
/// building a graph. Accepts exactly what the full parser accepts: `#`
/// comments, an optional leading `N <count>` header, one `u v` edge per
/// line, duplicates collapsed, self-loops rejected.
pub fn scan_edge_list<R: BufRead>(reader: R) -> Result<GraphSummary, GraphError> {
    let mut declared: Option<usize> = None;
    let mut saw_content = false;
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut degrees: HashMap<usize, usize> = HashMap::new();
    let mut max_vertex: Option<usize> = None;
    let mut max_degree = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let raw = line.map_err(|_| GraphError::Malformed {
            line: line_no,
            text: String::from("<unreadable line>"),
        })?;
        let text = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => &raw[..],
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if !saw_content && tokens.len() == 2 && tokens[0] == "N" {
            declared = Some(tokens[1].parse().map_err(|_| GraphError::Malformed {
                line: line_no,
                text: text.to_string(),
            })?);
            saw_content = true;
            continue;
        }
        saw_content = true;
        if tokens.len() != 2 {
            return Err(GraphError::Malformed {
                line: line_no,
                text: text.to_string(),
            });
        }
        let parse = |tok: &str| -> Result<usize, GraphError> {
            tok.parse().map_err(|_| GraphError::Malformed {
                line: line_no,
                text: text.to_string(),
            })
        };
        let u = parse(tokens[0])?;
        let v = parse(tokens[1])?;
        if u == v {
            return Err(GraphError::SelfLoop {
                line: line_no,
                vertex: u,
            });
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange {
                    line: line_no,
                    vertex: u.max(v),
                    declared: n,
                });
            }
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m: usize| m.max(u.max(v))));
        if seen.insert((u.min(v), u.max(v))) {
            for w in [u, v] {
                let d = degrees.entry(w).or_insert(0);
                *d += 1;
                max_degree = max_degree.max(*d);
            }
        }
    }

    let from_edges = max_vertex.map(|m| m + 1);
    let num_vertices = match (declared, from_edges) {
        (Some(n), _) => n,
        (None, Some(m)) => m,
        (None, None) => return Err(GraphError::Empty),
    };
    Ok(GraphSummary {
        num_vertices,
        num_edges: seen.len(),
        max_degree,
    })
}

/// Forecast qubit/application/oracle costs for one phase-estimation run,
/// next to the classical exact solver's asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceEstimate {
    pub num_vertices: usize,
    /// Vertex count after padding to the next power of two.
    pub padded_vertices: usize,
    pub num_edges: usize,
    pub max_degree: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub guard_bits: usize,
    /// System-register qubits: `log2(padded_vertices)`.
    pub n_system: usize,
    /// Ancilla qubits: `ceil(log2(1/δ)) + guard_bits`.
    pub m_ancilla: usize,
    /// `n_system + m_ancilla`.
    pub total_qubits: usize,
    /// Controlled evolution applications across the ladder: `2^m − 1`.
    pub controlled_u_applications: u64,
    /// `κ·(t + log2(1/ε))` evaluated at κ = 1, t = 2π.
    pub oracle_calls_per_u: f64,
    /// The symbolic form of `oracle_calls_per_u`.
    pub oracle_calls_formula: String,
    /// Quantum runtime scaling instantiated with this graph's numbers.
    pub runtime_class: String,
    pub classical_exact_class: String,
    pub classical_memory_class: String,
}

/// Fills a [`ResourceEstimate`] from the closed-form cost expressions;
/// `delta` and `epsilon` must lie strictly inside `(0, 1)`.
pub fn estimate(
    summary: GraphSummary,
    delta: f64,
    epsilon: f64,
    guard_bits: usize,
) -> Result<ResourceEstimate, ResourceError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ResourceError::InvalidDelta { delta });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ResourceError::InvalidEpsilon { epsilon });
    }
    let padded_vertices = summary.num_vertices.next_power_of_two();
    let n_system = padded_vertices.trailing_zeros() as usize;
    let m_ancilla = (1.0 / delta).log2().ceil().max(0.0) as usize + guard_bits;
    let controlled_u_applications = 1u64
        .checked_shl(m_ancilla as u32)
        .map(|x| x - 1)
        .ok_or(ResourceError::AncillaOverflow { m: m_ancilla })?;
    let oracle_calls_per_u = EVOLUTION_TIME + (1.0 / epsilon).log2();
    let runtime_value =
        summary.max_degree as f64 * (padded_vertices as f64).log2() / delta;
    Ok(ResourceEstimate {
        num_vertices: summary.num_vertices,
        padded_vertices,
        num_edges: summary.num_edges,
        max_degree: summary.max_degree,
        delta,
        epsilon,
        guard_bits,
        n_system,
        m_ancilla,
        total_qubits: n_system + m_ancilla,
        controlled_u_applications,
        oracle_calls_per_u,
        oracle_calls_formula: String::from("κ·(t + log2(1/ε)) with κ = 1, t = 2π"),
        runtime_class: format!(
            "O(d·log(N)/δ) = O({}·log2({})/{}) ≈ O({:.0})",
            summary.max_degree, padded_vertices, delta, runtime_value
        ),
        classical_exact_class: String::from("O(N³)"),
        classical_memory_class: String::from("O(N)"),
    })
}

/// [`estimate`] on an in-memory graph.
pub fn estimate_graph(
    g: &Graph,
    delta: f64,
    epsilon: f64,
    guard_bits: usize,
) -> Result<ResourceEstimate, ResourceError> {
    estimate(GraphSummary::of_graph(g), delta, epsilon, guard_bits)
}
