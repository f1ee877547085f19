//! Constructors for the graph families under study: complete graphs,
//! complete graphs with one edge removed, and their two-lead open versions.

use crate::error::GraphError;
use crate::graph::{MetricGraph, OpenQuantumGraph};

/// The complete graph K_n with every edge of the given length.
pub fn complete_graph(n: usize, length: f64) -> Result<MetricGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::FamilyTooSmall {
            family: "complete",
            n,
            min: 2,
        });
    }
    MetricGraph::new(n, &all_pairs_except(n, None, length))
}

/// K_n with the single edge {i, f} removed.
pub fn complete_minus_edge(
    n: usize,
    i: usize,
    f: usize,
    length: f64,
) -> Result<MetricGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::FamilyTooSmall {
            family: "complete-minus-edge",
            n,
            min: 2,
        });
    }
    if i == f {
        return Err(GraphError::SelfLoop(i));
    }
    if i >= n || f >= n {
        let vertex = i.max(f);
        return Err(GraphError::VertexOutOfRange {
            vertex,
            vertex_count: n,
        });
    }
    MetricGraph::new(n, &all_pairs_except(n, Some((i.min(f), i.max(f))), length))
}

/// K_n^e opened at the removed edge: leads sit at the canonical terminals
/// i = 0 and f = n−1, exactly where the edge was deleted. Every vertex then
/// has total degree n−1.
pub fn open_kne(n: usize, length: f64) -> Result<OpenQuantumGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::FamilyTooSmall {
            family: "kne",
            n,
            min: 3,
        });
    }
    let base = complete_minus_edge(n, 0, n - 1, length)?;
    OpenQuantumGraph::new(base, &[0, n - 1])
}

/// Expands the `kne:<n>` CLI shorthand with unit edge lengths. Returns
/// `None` when `spec` does not use the shorthand syntax at all, so the
/// caller can fall back to treating it as a file path.
pub fn expand_shorthand(spec: &str) -> Option<Result<OpenQuantumGraph, GraphError>> {
    let rest = spec.strip_prefix("kne:")?;
    Some(match rest.parse::<usize>() {
        Ok(n) => open_kne(n, 1.0),
        Err(_) => Err(GraphError::BadFamilySpec(spec.to_string())),
    })
}

fn all_pairs_except(
    n: usize,
    skip: Option<(usize, usize)>,
    length: f64,
) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            if skip == Some((u, v)) {
                continue;
            }
            edges.push((u, v, length));
        }
    }
    edges
}
