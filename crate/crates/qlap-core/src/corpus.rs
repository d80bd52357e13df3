//! Built-in graph corpus.
//!
//! Small named families with known spectra, plus a fixed seeded batch of
//! random graphs. The same constructors back the `corpus` CLI subcommand
//! and the test suite, so the edge-list files shipped in `corpus/` are
//! reproducible from here.

use crate::graph::Graph;
use crate::qsim::RngStream;

/// Seed for the shipped random corpus. Changing it changes the corpus
/// files byte for byte, so treat it as frozen.
pub const RANDOM_CORPUS_SEED: u64 = 0x51ab_c0de;
pub const RANDOM_CORPUS_SIZE: usize = 20;
pub const RANDOM_CORPUS_EDGE_PROB: f64 = 0.3;
pub const RANDOM_CORPUS_MAX_VERTICES: usize = 16;

pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Graph::new(n, &edges).expect("path is a valid graph")
}

pub fn cycle_graph(n: usize) -> Graph {
    let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n - 1));
    Graph::new(n, &edges).expect("cycle is a valid graph")
}

pub fn complete_graph(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, &edges).expect("complete graph is a valid graph")
}

/// Star with `n - 1` leaves attached to vertex 0.
pub fn star_graph(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
    Graph::new(n, &edges).expect("star is a valid graph")
}

/// Two triangles `{0,1,2}` and `{3,4,5}` joined by the bridge `2-3`.
pub fn barbell6() -> Graph {
    Graph::new(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)])
        .expect("barbell is a valid graph")
}

/// Two disjoint triangles: the canonical disconnected test case.
pub fn two_triangles() -> Graph {
    Graph::new(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
        .expect("two triangles is a valid graph")
}

/// The named corpus in a stable order.
pub fn named_corpus() -> Vec<(&'static str, Graph)> {
    vec![
        ("p2", path_graph(2)),
        ("p3", path_graph(3)),
        ("c4", cycle_graph(4)),
        ("k4", complete_graph(4)),
        ("s4", star_graph(4)),
        ("barbell6", barbell6()),
        ("two_triangles", two_triangles()),
    ]
}

/// The connected members of the named corpus.
pub fn connected_named_corpus() -> Vec<(&'static str, Graph)> {
    named_corpus()
        .into_iter()
        .filter(|(_, g)| g.connected_components().count == 1)
        .collect()
}

/// Erdős–Rényi style draw: each pair becomes an edge with probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut RngStream) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.uniform() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).expect("random draw is a valid graph")
}

/// The frozen 20-graph random corpus (vertex counts 4..=16, edge
/// probability 0.3), one RNG stream per graph.
pub fn random_corpus() -> Vec<(String, Graph)> {
    (0..RANDOM_CORPUS_SIZE)
        .map(|i| {
            let mut rng = RngStream::new(RANDOM_CORPUS_SEED, i as u64);
            let span = RANDOM_CORPUS_MAX_VERTICES - 4 + 1;
            let n = 4 + (rng.uniform() * span as f64) as usize;
            let n = n.min(RANDOM_CORPUS_MAX_VERTICES);
            let g = random_graph(n, RANDOM_CORPUS_EDGE_PROB, &mut rng);
            (format!("random_{i:02}"), g)
        })
        .collect()
}

/// Every corpus graph, named then random, as written by `qlap corpus`.
pub fn full_corpus() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = named_corpus()
        .into_iter()
        .map(|(name, g)| (name.to_string(), g))
        .collect();
    out.extend(random_corpus());
    out
}
