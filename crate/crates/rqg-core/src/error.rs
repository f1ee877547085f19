//! Error types shared across the crate.

use thiserror::Error;

use crate::graph::MAX_MASK_EDGES;

/// Construction and indexing failures for graphs, leads, and masks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("a graph needs at least one vertex")]
    NoVertices,
    #[error("vertex {vertex} out of range for a graph on {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge {{{u}, {v}}} has non-positive or non-finite length {length}")]
    BadLength { u: usize, v: usize, length: f64 },
    #[error("an open graph needs at least one lead")]
    NoLeads,
    #[error("more than one lead at vertex {0}")]
    DuplicateLead(usize),
    #[error("mask covers {mask_len} edges but the host has {edge_count}")]
    MaskLengthMismatch { mask_len: usize, edge_count: usize },
    #[error("mask bits {bits:#x} do not fit in {len} edge positions")]
    MaskBitsOutOfRange { bits: u64, len: usize },
    #[error("{0} edges exceed the {MAX_MASK_EDGES}-edge mask limit")]
    TooManyEdges(usize),
    #[error("cannot select {target} edges out of {available}")]
    TargetAboveEdgeCount { target: usize, available: usize },
    #[error("`{0}` is not a hexadecimal edge mask")]
    BadMaskText(String),
    #[error("scattering amplitudes are undefined at an isolated vertex without a lead")]
    ZeroDegree,
    #[error("family `{family}` needs at least {min} vertices, got {n}")]
    FamilyTooSmall {
        family: &'static str,
        n: usize,
        min: usize,
    },
    #[error("`{0}` is not a recognized graph family spec")]
    BadFamilySpec(String),
}

/// Failures while assembling or solving a scattering problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatterError {
    #[error("vertex {0} carries no lead, so it is not a scattering channel")]
    NoLeadAt(usize),
    #[error("entrance and exit must be distinct channels, both at vertex {0}")]
    SameChannel(usize),
    #[error("wavenumber must be positive and finite, got {0}")]
    BadWavenumber(f64),
    #[error("path-family system is singular at k = {k} (relative pivot {pivot:.3e})")]
    SingularAtK { k: f64, pivot: f64 },
    #[error("wavenumber grid must be nonempty and strictly ascending")]
    BadGrid,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Failures in ensemble enumeration, sampling, and averaging.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RqgError {
    #[error("host has {edges} edges; exact enumeration is limited to {limit} (2^{limit} subgraphs)")]
    EnumerationTooLarge { edges: usize, limit: usize },
    #[error("randomized transmission needs at least two leads, an entrance and an exit")]
    NeedsTwoChannels,
    #[error("edge retention probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("ensemble cap must be at least 1")]
    ZeroCap,
    #[error(
        "{flagged} of {total} subgraphs with {edge_count} edges hit singular systems, \
         more than the tolerated fraction"
    )]
    TooManyFlagged {
        edge_count: usize,
        flagged: usize,
        total: usize,
    },
    #[error("scan step must lie in (0, {max}], got {got}")]
    BadScanStep { got: f64, max: f64 },
    #[error("surfaces were computed on different grids: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
}
