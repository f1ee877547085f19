//! Transmission through open metric graphs and randomized edge-deletion
//! ensembles.
//!
//! A metric graph carries a wave of wavenumber k on every edge; vertices
//! couple the edges with Neumann–Kirchhoff conditions (continuity plus
//! current conservation), and semi-infinite leads attached to two vertices
//! turn the graph into a scattering target. The [`scattering`] module
//! computes the transmission and reflection coefficients by solving a
//! linear system over directed-edge wave amplitudes. The [`rqg`] module
//! averages the transmission over the ensemble of random subgraphs in which
//! every edge is independently kept with probability p, either exactly (full
//! enumeration grouped by edge count) or by Monte Carlo sampling.
//! [`symmetry`] classifies subgraphs of a host up to lead-preserving
//! isomorphism, and [`families`] builds the complete-graph hosts used
//! throughout.

pub mod error;
pub mod families;
pub mod graph;
pub mod graphfile;
pub mod linalg;
pub mod rqg;
pub mod scattering;
pub mod symmetry;

pub use error::{GraphError, RqgError, ScatterError};
pub use families::{complete_graph, complete_minus_edge, expand_shorthand, open_kne};
pub use graph::{
    masks_with_edge_count, nk_amplitudes, Edge, MetricGraph, OpenQuantumGraph, SubgraphMask,
    VertexAmplitudes, MAX_MASK_EDGES,
};
pub use graphfile::GraphFileError;
pub use rqg::{
    approx_transmission, argmax_over_p, exact_profile, exact_profile_with_limit,
    exact_transmission, max_abs_error, mc_profile, sample_ensemble, subgraph_weight,
    EdgeCountProfile, EdgeCountStats, ProfileMode, RqgEstimate, DEFAULT_ENUMERATION_LIMIT,
};
pub use scattering::{
    assemble, reflection_amplitude, scatter, solve_path_families, transmission_amplitude,
    transmission_curve, CurvePoint, PathFamilySystem, ScatteringResult,
};
pub use symmetry::{classify_all, classify_subgraphs, lead_preserving_automorphisms, IsoClass};
