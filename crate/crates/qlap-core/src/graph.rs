//! Graphs, Laplacians, and partitions.
//!
//! Input graphs are simple and undirected: no self-loops, no duplicate
//! edges, vertices labeled `0..N`. The edge-list text format is one `u v`
//! pair per line, `#` starting a comment, with an optional leading header
//! line `N <count>` that fixes the vertex count when it exceeds
//! `1 + max vertex id`.
//!
//! Padding a graph to a power-of-two vertex count appends isolated "ghost"
//! vertices. Ghosts carry no edges, so each contributes exactly one extra
//! zero eigenvalue to the Laplacian and can be accounted for separately by
//! everything downstream.

use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::collections::BTreeSet;
use std::io::BufRead;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: malformed entry {text:?} (expected `u v` or header `N <count>`)")]
    Malformed { line: usize, text: String },
    #[error("line {line}: vertex {vertex} out of range for declared count {declared}")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        declared: usize,
    },
    #[error("graph has no vertices")]
    Empty,
    #[error("edge ({u}, {v}) touches a vertex outside 0..{n}")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },
    #[error("ghost vertices must stay isolated (edge ({u}, {v}) touches a ghost)")]
    GhostEdge { u: usize, v: usize },
    #[error("assignment length {got} does not match non-ghost vertex count {expected}")]
    AssignmentLength { got: usize, expected: usize },
    #[error("block label {label} out of range for {num_blocks} blocks")]
    LabelOutOfRange { label: usize, num_blocks: usize },
}

/// Simple undirected graph. Edges are kept sorted with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    ghost_count: usize,
}

impl Graph {
    /// Builds a graph from an explicit vertex count and edge list. Edges are
    /// normalized to `u < v`, deduplicated, and sorted; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn new(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if num_vertices == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop { line: 0, vertex: u });
            }
            if u >= num_vertices || v >= num_vertices {
                return Err(GraphError::EdgeOutOfRange {
                    u,
                    v,
                    n: num_vertices,
                });
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph {
            num_vertices,
            edges: set.into_iter().collect(),
            ghost_count: 0,
        })
    }

    /// Parses the edge-list text format from a buffered reader.
    pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut declared: Option<usize> = None;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (u, v, line)
        let mut max_vertex: Option<usize> = None;
        let mut saw_content = false;

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
            max_vertex = Some(max_vertex.map_or(u.max(v), |m: usize| m.max(u.max(v))));
            edges.push((u, v, line_no));
        }

        let from_edges = max_vertex.map(|m| m + 1);
        let num_vertices = match (declared, from_edges) {
            (Some(n), Some(m)) => {
                if m > n {
                    let bad = edges
                        .iter()
                        .find(|&&(u, v, _)| u >= n || v >= n)
                        .expect("an edge must exceed the declared count");
                    return Err(GraphError::VertexOutOfRange {
                        line: bad.2,
                        vertex: bad.0.max(bad.1),
                        declared: n,
                    });
                }
                n
            }
            (Some(n), None) => n,
            (None, Some(m)) => m,
            (None, None) => return Err(GraphError::Empty),
        };
        let plain: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
        Graph::new(num_vertices, &plain)
    }

    /// Parses the edge-list format from an in-memory string.
    pub fn from_edge_list_str(text: &str) -> Result<Self, GraphError> {
        Self::parse_edge_list(text.as_bytes())
    }

    /// Renders the graph back into the edge-list text format, including the
    /// `N <count>` header so isolated trailing vertices survive a round trip.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("N {}\n", self.num_vertices));
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Vertices that are part of the original problem (ghosts excluded).
    pub fn non_ghost_count(&self) -> usize {
        self.num_vertices - self.ghost_count
    }

    pub fn ghost_count(&self) -> usize {
        self.ghost_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.num_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub fn adjacency_list(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Appends isolated ghost vertices until the vertex count is a power of
    /// two. A graph that is already a power of two comes back unchanged.
    pub fn pad_to_power_of_two(&self) -> Graph {
        let target = self.num_vertices.next_power_of_two();
        Graph {
            num_vertices: target,
            edges: self.edges.clone(),
            ghost_count: self.ghost_count + (target - self.num_vertices),
        }
    }

    /// Induced subgraph on `vertices` (which must be non-ghost and unique).
    /// Vertex `vertices[i]` becomes vertex `i` of the result.
    pub fn induced(&self, vertices: &[usize]) -> Result<Graph, GraphError> {
        let mut index = vec![usize::MAX; self.num_vertices];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.non_ghost_count() {
                return Err(GraphError::EdgeOutOfRange {
                    u: v,
                    v,
                    n: self.non_ghost_count(),
                });
            }
            index[v] = i;
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if index[u] != usize::MAX && index[v] != usize::MAX {
                edges.push((index[u], index[v]));
            }
        }
        Graph::new(vertices.len(), &edges)
    }

    /// Connected components via union-find. Ghost vertices are labeled but
    /// not counted: `count` covers only components containing a non-ghost
    /// vertex. Labels are assigned in order of first appearance by vertex
    /// index, non-ghost components first.
    pub fn connected_components(&self) -> ComponentLabels {
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        let real = self.non_ghost_count();
        let mut labels = vec![usize::MAX; self.num_vertices];
        let mut next = 0usize;
        for v in 0..real {
            let root = uf.find(v);
            if labels[root] == usize::MAX {
                labels[root] = next;
                next += 1;
            }
        }
        let count = next;
        for v in real..self.num_vertices {
            let root = uf.find(v);
            if labels[root] == usize::MAX {
                labels[root] = next;
                next += 1;
            }
        }
        let assignment = (0..self.num_vertices)
            .map(|v| labels[uf.find(v)])
            .collect();
        ComponentLabels {
            count,
            labels: assignment,
        }
    }

    /// Builds the combinatorial Laplacian `L = D - A` in sparse row storage.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vertices];
        let mut deg = vec![0usize; self.num_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
            rows[u].push((v, -1.0));
            rows[v].push((u, -1.0));
        }
        for (v, row) in rows.iter_mut().enumerate() {
            row.push((v, deg[v] as f64));
            row.sort_by_key(|&(c, _)| c);
        }
        LaplacianMatrix {
            dim: self.num_vertices,
            rows,
            max_degree: deg.into_iter().max().unwrap_or(0),
            divisor: 1.0,
            normalized: false,
        }
    }
}

/// Free-function spelling of Laplacian assembly.
pub fn build_laplacian(g: &Graph) -> LaplacianMatrix {
    g.laplacian()
}

/// Result of a connectivity scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    /// Number of components containing at least one non-ghost vertex.
    pub count: usize,
    /// Component label per vertex (ghosts included at the tail).
    pub labels: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// How to scale a Laplacian so its spectrum fits strictly below 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Divide by the next power of two above the Gershgorin bound `2Δ`,
    /// i.e. `c = 2^ceil(log2(2Δ + 1))`. Keeps integer spectra exactly
    /// representable as dyadic fractions.
    GershgorinPow2,
    /// Divide by `λ_max · (1 + 2⁻²⁰)`: the tightest scaling that still
    /// avoids the top eigenvalue aliasing with phase 0.
    Exact,
}

/// Symmetric real Laplacian in sparse row storage, possibly rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    max_degree: usize,
    divisor: f64,
    normalized: bool,
}

impl LaplacianMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Scale factor that was divided out of the raw Laplacian (1 if none).
    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Dense row-major copy, used by the eigensolver and exact propagator.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim * self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, x) in row {
                out[i * self.dim + j] = x;
            }
        }
        out
    }

    /// Edge list recovered from the off-diagonal pattern (`u < v`, sorted).
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, x) in row {
                if j > i && x != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Matrix-vector product, mostly for oracle cross-checks in tests.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, x)| x * v[j]).sum())
            .collect()
    }

    /// Returns a rescaled copy whose eigenvalues lie in `[0, 1)`.
    ///
    /// `GershgorinPow2` needs no spectral information. `Exact` runs the
    /// dense eigensolver to find `λ_max`, so it is subject to the oracle
    /// size cap; an edgeless graph falls back to divisor 1.
    pub fn normalize(&self, mode: NormalizationMode) -> Result<LaplacianMatrix, crate::spectral::SpectralError> {
        let c = match mode {
            NormalizationMode::GershgorinPow2 => {
                let bound = 2 * self.max_degree + 1;
                let mut c = 1.0f64;
                while c < bound as f64 {
                    c *= 2.0;
                }
                c
            }
            NormalizationMode::Exact => {
                let eig = crate::spectral::eig_sym(self)?;
                let lambda_max = eig.eigenvalues.last().copied().unwrap_or(0.0);
                if lambda_max <= 0.0 {
                    1.0
                } else {
                    lambda_max * (1.0 + (0.5f64).powi(20))
                }
            }
        };
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(j, x)| (j, x / c)).collect())
            .collect();
        Ok(LaplacianMatrix {
            dim: self.dim,
            rows,
            max_degree: self.max_degree,
            divisor: self.divisor * c,
            normalized: true,
        })
    }
}

/// Block assignment of the non-ghost vertices, with its cut size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_blocks: usize,
    cut_edges: usize,
}

impl Partition {
    /// Builds a partition from raw labels. Labels are relabeled to be
    /// contiguous (`0..num_blocks`) in order of first appearance, and the
    /// cut size is counted edge by edge against `g`.
    pub fn from_assignment(g: &Graph, raw: &[usize]) -> Result<Partition, GraphError> {
        if raw.len() != g.non_ghost_count() {
            return Err(GraphError::AssignmentLength {
                got: raw.len(),
                expected: g.non_ghost_count(),
            });
        }
        let mut remap: Vec<(usize, usize)> = Vec::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &label in raw {
            let mapped = match remap.iter().find(|&&(from, _)| from == label) {
                Some(&(_, to)) => to,
                None => {
                    let to = remap.len();
                    remap.push((label, to));
                    to
                }
            };
            assignment.push(mapped);
        }
        let num_blocks = remap.len();
        let cut_edges = count_cut(g, &assignment);
        Ok(Partition {
            assignment,
            num_blocks,
            cut_edges,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn cut_edges(&self) -> usize {
        self.cut_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.assignment.len()
    }

    /// True when the two partitions name the same blocks, allowing the
    /// block labels themselves to differ (e.g. a global 0/1 swap).
    pub fn equivalent_to(&self, other: &Partition) -> bool {
        if self.assignment.len() != other.assignment.len() || self.num_blocks != other.num_blocks {
            return false;
        }
        let mut map = vec![usize::MAX; self.num_blocks];
        let mut used = vec![false; other.num_blocks];
        for (&a, &b) in self.assignment.iter().zip(&other.assignment) {
            if map[a] == usize::MAX {
                if used[b] {
                    return false;
                }
                map[a] = b;
                used[b] = true;
            } else if map[a] != b {
                return false;
            }
        }
        true
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Partition", 4)?;
        s.serialize_field("num_vertices", &self.assignment.len())?;
        s.serialize_field("assignment", &self.assignment)?;
        s.serialize_field("num_blocks", &self.num_blocks)?;
        s.serialize_field("cut_edges", &self.cut_edges)?;
        s.end()
    }
}

fn count_cut(g: &Graph, assignment: &[usize]) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| assignment[u] != assignment[v])
        .count()
}

/// Recounts the cut of `p` against `g` edge by edge.
pub fn cut_size(g: &Graph, p: &Partition) -> Result<usize, GraphError> {
    if p.assignment.len() != g.non_ghost_count() {
        return Err(GraphError::AssignmentLength {
            got: p.assignment.len(),
            expected: g.non_ghost_count(),
        });
    }
    for &label in &p.assignment {
        if label >= p.num_blocks {
            return Err(GraphError::LabelOutOfRange {
                label,
                num_blocks: p.num_blocks,
            });
        }
    }
    Ok(count_cut(g, &p.assignment))
}
