//! Reading and writing open-graph definition files.
//!
//! The format is a small TOML document:
//!
//! ```toml
//! vertices = 4
//! edges = [[0, 1, 1.0], [0, 2, 1.0], [1, 2, 1.0], [1, 3, 1.0], [2, 3, 1.0]]
//! leads = [0, 3]
//! ```
//!
//! Emission writes lengths with however many digits round-trip exactly, so
//! parse(emit(g)) reproduces g bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GraphError;
use crate::graph::{MetricGraph, OpenQuantumGraph};

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("malformed graph file: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: usize,
    edges: Vec<(usize, usize, f64)>,
    leads: Vec<usize>,
}

/// Serializes an open graph to the definition-file text format.
pub fn emit(graph: &OpenQuantumGraph) -> String {
    let doc = GraphDoc {
        vertices: graph.vertex_count(),
        edges: graph
            .edges()
            .iter()
            .map(|e| (e.u, e.v, e.length))
            .collect(),
        leads: graph.leads().to_vec(),
    };
    toml::to_string(&doc).expect("graph documents serialize to plain tables")
}

/// Parses definition-file text, applying the same validation as the graph
/// constructors.
pub fn parse(text: &str) -> Result<OpenQuantumGraph, GraphFileError> {
    let doc: GraphDoc = toml::from_str(text)?;
    let base = MetricGraph::new(doc.vertices, &doc.edges)?;
    Ok(OpenQuantumGraph::new(base, &doc.leads)?)
}
