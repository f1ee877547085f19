//! Metric graphs, leads, edge-subset masks, and vertex scattering amplitudes.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Maximum number of edges a host graph may carry so that edge subsets fit in
/// a `u64` bit-vector.
pub const MAX_MASK_EDGES: usize = 64;

/// An undirected edge `{u, v}` with a positive metric length.
///
/// Endpoints are stored with `u < v`; the pair is unordered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

impl Edge {
    /// The endpoint opposite to `vertex`, if `vertex` is an endpoint at all.
    pub fn other(&self, vertex: usize) -> Option<usize> {
        if vertex == self.u {
            Some(self.v)
        } else if vertex == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

/// A finite metric graph: vertices `0..vertex_count` and a stable, indexed
/// list of undirected weighted edges.
///
/// Simple by construction: no self-loops, no parallel edges. Edge indices are
/// fixed by list order and survive for the lifetime of the graph, so an edge
/// subset of a host is unambiguously a bit pattern over `0..edge_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl MetricGraph {
    /// Builds a graph from `(u, v, length)` triples, canonicalizing each pair
    /// to `u < v` without reordering the list.
    pub fn new(vertex_count: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut seen = std::collections::HashSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b, length) in edges {
            let (u, v) = (a.min(b), a.max(b));
            for w in [a, b] {
                if w >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge { u, v });
            }
            if !(length > 0.0) || !length.is_finite() {
                return Err(GraphError::BadLength { u, v, length });
            }
            list.push(Edge { u, v, length });
        }
        Ok(Self {
            vertex_count,
            edges: list,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of edges incident to `vertex`.
    pub fn degree(&self, vertex: usize) -> Result<usize, GraphError> {
        if vertex >= self.vertex_count {
            return Err(GraphError::VertexOutOfRange {
                vertex,
                vertex_count: self.vertex_count,
            });
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| e.u == vertex || e.v == vertex)
            .count())
    }
}

/// A metric graph opened by attaching semi-infinite leads to a set of
/// vertices, one scattering channel per lead, with Neumann–Kirchhoff vertex
/// conditions throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenQuantumGraph {
    base: MetricGraph,
    leads: Vec<usize>,
}

impl OpenQuantumGraph {
    /// Attaches one lead per entry of `leads`. At most one lead per vertex.
    pub fn new(base: MetricGraph, leads: &[usize]) -> Result<Self, GraphError> {
        if leads.is_empty() {
            return Err(GraphError::NoLeads);
        }
        let mut seen = std::collections::HashSet::new();
        for &v in leads {
            if v >= base.vertex_count() {
                return Err(GraphError::VertexOutOfRange {
                    vertex: v,
                    vertex_count: base.vertex_count(),
                });
            }
            if !seen.insert(v) {
                return Err(GraphError::DuplicateLead(v));
            }
        }
        Ok(Self {
            base,
            leads: leads.to_vec(),
        })
    }

    pub fn base(&self) -> &MetricGraph {
        &self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.base.edge_count()
    }

    pub fn edges(&self) -> &[Edge] {
        self.base.edges()
    }

    pub fn leads(&self) -> &[usize] {
        &self.leads
    }

    pub fn has_lead(&self, vertex: usize) -> bool {
        self.leads.contains(&vertex)
    }

    /// Total degree of `vertex`: incident edges plus one per attached lead.
    /// This is the degree that sets the vertex scattering amplitudes.
    pub fn total_degree(&self, vertex: usize) -> Result<usize, GraphError> {
        let lead = usize::from(self.has_lead(vertex));
        Ok(self.base.degree(vertex)? + lead)
    }

    /// The subgraph keeping exactly the edges selected by `mask`. All
    /// vertices and all leads are kept; retained edges keep their lengths
    /// and, by convention, their host edge indices are remembered by the
    /// caller through `mask` itself.
    pub fn apply_mask(&self, mask: SubgraphMask) -> Result<OpenQuantumGraph, GraphError> {
        if mask.len() != self.edge_count() {
            return Err(GraphError::MaskLengthMismatch {
                mask_len: mask.len(),
                edge_count: self.edge_count(),
            });
        }
        let kept: Vec<(usize, usize, f64)> = self
            .edges()
            .iter()
            .enumerate()
            .filter(|(j, _)| mask.contains(*j))
            .map(|(_, e)| (e.u, e.v, e.length))
            .collect();
        let base = MetricGraph::new(self.vertex_count(), &kept)?;
        OpenQuantumGraph::new(base, &self.leads)
    }
}

/// An edge subset of a host graph, encoded as a bit-vector over the host's
/// edge indices. Bit `j` set means edge `j` is retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgraphMask {
    bits: u64,
    len: usize,
}

impl SubgraphMask {
    pub fn new(bits: u64, len: usize) -> Result<Self, GraphError> {
        if len > MAX_MASK_EDGES {
            return Err(GraphError::TooManyEdges(len));
        }
        if len < MAX_MASK_EDGES && bits >> len != 0 {
            return Err(GraphError::MaskBitsOutOfRange { bits, len });
        }
        Ok(Self { bits, len })
    }

    /// The mask retaining every edge of a host with `len` edges.
    pub fn full(len: usize) -> Result<Self, GraphError> {
        if len > MAX_MASK_EDGES {
            return Err(GraphError::TooManyEdges(len));
        }
        let bits = if len == MAX_MASK_EDGES {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        Ok(Self { bits, len })
    }

    pub fn empty(len: usize) -> Result<Self, GraphError> {
        Self::new(0, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Number of mask positions (the host's edge count).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Number of retained edges.
    pub fn edge_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(&self, edge_index: usize) -> bool {
        edge_index < self.len && self.bits >> edge_index & 1 == 1
    }

    /// Indices of retained edges, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&j| self.contains(j))
    }

    pub fn to_hex(&self) -> String {
        format!("{:#x}", self.bits)
    }

    /// Parses `"0x1f"` or `"1f"` against a host with `len` edges.
    pub fn from_hex(text: &str, len: usize) -> Result<Self, GraphError> {
        let digits = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .unwrap_or(text);
        let bits = u64::from_str_radix(digits, 16)
            .map_err(|_| GraphError::BadMaskText(text.to_string()))?;
        Self::new(bits, len)
    }
}

impl std::fmt::Display for SubgraphMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

/// All masks of `len` positions with exactly `edge_count` bits set, in
/// ascending numeric order.
pub fn masks_with_edge_count(
    len: usize,
    edge_count: usize,
) -> Result<impl Iterator<Item = SubgraphMask>, GraphError> {
    if len > MAX_MASK_EDGES {
        return Err(GraphError::TooManyEdges(len));
    }
    if edge_count > len {
        return Err(GraphError::TargetAboveEdgeCount {
            target: edge_count,
            available: len,
        });
    }
    Ok(FixedPopcountMasks::new(len, edge_count))
}

/// Gosper's hack: from one bit pattern to the next-larger one with the same
/// popcount. `edge_count == 0` yields the single empty mask.
struct FixedPopcountMasks {
    len: usize,
    next: Option<u64>,
    limit: u64,
}

impl FixedPopcountMasks {
    fn new(len: usize, edge_count: usize) -> Self {
        let limit = if len == MAX_MASK_EDGES {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        let first = if edge_count == 0 {
            0
        } else {
            (1u64 << edge_count) - 1
        };
        Self {
            len,
            next: Some(first),
            limit,
        }
    }
}

impl Iterator for FixedPopcountMasks {
    type Item = SubgraphMask;

    fn next(&mut self) -> Option<SubgraphMask> {
        let bits = self.next?;
        if bits > self.limit {
            self.next = None;
            return None;
        }
        let mask = SubgraphMask {
            bits,
            len: self.len,
        };
        self.next = if bits == 0 {
            None
        } else {
            // checked_add overflowing means that pattern was the last one.
            let low = bits & bits.wrapping_neg();
            bits.checked_add(low).map(|ripple| {
                let ones = (bits ^ ripple) >> (2 + low.trailing_zeros());
                ripple | ones
            })
        };
        Some(mask)
    }
}

/// Reflection and transmission amplitudes of a single Neumann–Kirchhoff
/// vertex of the given total degree. Both are real for these conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexAmplitudes {
    pub reflection: f64,
    pub transmission: f64,
    pub degree: usize,
}

/// Amplitudes for a Neumann–Kirchhoff vertex of total degree `degree`:
/// an incoming wave is reflected with `2/d - 1` and sent down each other
/// incident bond with `2/d`. Degree zero carries no waves and is rejected.
pub fn nk_amplitudes(degree: usize) -> Result<VertexAmplitudes, GraphError> {
    if degree == 0 {
        return Err(GraphError::ZeroDegree);
    }
    let d = degree as f64;
    Ok(VertexAmplitudes {
        reflection: 2.0 / d - 1.0,
        transmission: 2.0 / d,
        degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> OpenQuantumGraph {
        let base = MetricGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        OpenQuantumGraph::new(base, &[0, 2]).unwrap()
    }

    #[test]
    fn builds_a_path_with_end_leads() {
        let g = path3();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.total_degree(0).unwrap(), 2);
        assert_eq!(g.total_degree(1).unwrap(), 2);
        assert_eq!(g.total_degree(2).unwrap(), 2);
    }

    #[test]
    fn counts_leads_into_total_degree() {
        let base = MetricGraph::new(4, &[]).unwrap();
        let g = OpenQuantumGraph::new(base, &[0, 3]).unwrap();
        assert_eq!(g.total_degree(0).unwrap(), 1);
        assert_eq!(g.total_degree(1).unwrap(), 0);
        assert_eq!(g.total_degree(3).unwrap(), 1);
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(MetricGraph::new(0, &[]), Err(GraphError::NoVertices));
        assert_eq!(
            MetricGraph::new(2, &[(0, 0, 1.0)]),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            MetricGraph::new(2, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            MetricGraph::new(3, &[(0, 5, 1.0)]),
            Err(GraphError::VertexOutOfRange {
                vertex: 5,
                vertex_count: 3
            })
        );
        assert!(matches!(
            MetricGraph::new(2, &[(0, 1, 0.0)]),
            Err(GraphError::BadLength { .. })
        ));
        assert!(matches!(
            MetricGraph::new(2, &[(0, 1, -2.0)]),
            Err(GraphError::BadLength { .. })
        ));
    }

    #[test]
    fn rejects_malformed_lead_sets() {
        let base = MetricGraph::new(3, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(
            OpenQuantumGraph::new(base.clone(), &[]),
            Err(GraphError::NoLeads)
        );
        assert_eq!(
            OpenQuantumGraph::new(base.clone(), &[0, 0]),
            Err(GraphError::DuplicateLead(0))
        );
        assert_eq!(
            OpenQuantumGraph::new(base, &[7]),
            Err(GraphError::VertexOutOfRange {
                vertex: 7,
                vertex_count: 3
            })
        );
    }

    #[test]
    fn degree_rejects_unknown_vertices() {
        let g = path3();
        assert!(matches!(
            g.total_degree(9),
            Err(GraphError::VertexOutOfRange { vertex: 9, .. })
        ));
    }

    #[test]
    fn mask_validation() {
        assert!(SubgraphMask::new(0b101, 3).is_ok());
        assert_eq!(
            SubgraphMask::new(0b1000, 3),
            Err(GraphError::MaskBitsOutOfRange { bits: 8, len: 3 })
        );
        assert_eq!(SubgraphMask::new(0, 65), Err(GraphError::TooManyEdges(65)));
        let full = SubgraphMask::full(5).unwrap();
        assert_eq!(full.bits(), 0b11111);
        assert_eq!(full.edge_count(), 5);
        assert_eq!(SubgraphMask::empty(5).unwrap().edge_count(), 0);
    }

    #[test]
    fn mask_hex_round_trip() {
        let m = SubgraphMask::new(0x1f, 14).unwrap();
        assert_eq!(m.to_hex(), "0x1f");
        assert_eq!(SubgraphMask::from_hex("0x1f", 14).unwrap(), m);
        assert_eq!(SubgraphMask::from_hex("1F", 14).unwrap(), m);
        assert!(SubgraphMask::from_hex("zz", 14).is_err());
        assert!(SubgraphMask::from_hex("0x1f", 3).is_err());
    }

    #[test]
    fn apply_full_mask_is_identity() {
        let g = path3();
        let full = SubgraphMask::full(2).unwrap();
        assert_eq!(g.apply_mask(full).unwrap(), g);
    }

    #[test]
    fn apply_empty_mask_keeps_vertices_and_leads() {
        let g = path3();
        let sub = g.apply_mask(SubgraphMask::empty(2).unwrap()).unwrap();
        assert_eq!(sub.vertex_count(), 3);
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.leads(), &[0, 2]);
        assert_eq!(sub.total_degree(0).unwrap(), 1);
        assert_eq!(sub.total_degree(1).unwrap(), 0);
    }

    #[test]
    fn apply_mask_checks_length() {
        let g = path3();
        let wrong = SubgraphMask::full(3).unwrap();
        assert_eq!(
            g.apply_mask(wrong),
            Err(GraphError::MaskLengthMismatch {
                mask_len: 3,
                edge_count: 2
            })
        );
    }

    #[test]
    fn fixed_popcount_counts() {
        let count = |len, l| masks_with_edge_count(len, l).unwrap().count();
        assert_eq!(count(5, 0), 1);
        assert_eq!(count(5, 3), 10);
        assert_eq!(count(5, 5), 1);
        assert_eq!(count(14, 7), 3432);
        let total: usize = (0..=14).map(|l| count(14, l)).sum();
        assert_eq!(total, 1 << 14);
        assert!(masks_with_edge_count(5, 6).is_err());
    }

    #[test]
    fn fixed_popcount_is_ascending_and_exact() {
        for l in 0..=5 {
            let masks: Vec<u64> = masks_with_edge_count(5, l)
                .unwrap()
                .map(|m| m.bits())
                .collect();
            assert!(masks.windows(2).all(|w| w[0] < w[1]));
            assert!(masks
                .iter()
                .all(|b| b.count_ones() as usize == l && *b < 32));
        }
    }

    #[test]
    fn nk_amplitude_values() {
        let a = nk_amplitudes(2).unwrap();
        assert_eq!((a.reflection, a.transmission), (0.0, 1.0));
        let a = nk_amplitudes(1).unwrap();
        assert_eq!((a.reflection, a.transmission), (1.0, 2.0));
        let a = nk_amplitudes(5).unwrap();
        assert_eq!(a.reflection, 2.0 / 5.0 - 1.0);
        assert_eq!(a.transmission, 2.0 / 5.0);
        assert_eq!(nk_amplitudes(0), Err(GraphError::ZeroDegree));
    }

    proptest! {
        #[test]
        fn nk_amplitudes_unitary(d in 1usize..10_000) {
            let a = nk_amplitudes(d).unwrap();
            let row = a.reflection * a.reflection
                + (d as f64 - 1.0) * a.transmission * a.transmission;
            prop_assert!((row - 1.0).abs() < 1e-12);
        }

        #[test]
        fn masks_preserve_popcount(len in 1usize..=16, seed: u64) {
            let l = (seed as usize) % (len + 1);
            let masks: Vec<SubgraphMask> =
                masks_with_edge_count(len, l).unwrap().collect();
            prop_assert!(masks.iter().all(|m| m.edge_count() == l));
            let mut sorted = masks.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), masks.len());
        }
    }
}
