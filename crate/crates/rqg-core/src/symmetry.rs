//! Lead-preserving automorphisms and isomorphism classes of edge subsets.
//!
//! Two subgraphs count as isomorphic when some symmetry of the HOST maps one
//! edge set onto the other while fixing the lead-vertex set setwise. This is
//! deliberately narrower than general graph isomorphism: it is the notion
//! under which the known class counts of the two-lead complete-minus-edge
//! hosts come out right, and it needs no canonical-labeling machinery.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::GraphError;
use crate::graph::{masks_with_edge_count, OpenQuantumGraph, SubgraphMask};

/// One isomorphism class of edge subsets with a fixed edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoClass {
    /// Lexicographically smallest mask in the orbit.
    pub representative: SubgraphMask,
    /// Number of masks in the orbit.
    pub orbit_size: usize,
    pub edge_count: usize,
}

/// All vertex permutations that map the host's edge set onto itself
/// (lengths included) and its lead set onto itself setwise. Contains the
/// identity and is closed under composition. Brute force over all
/// permutations; intended for hosts of at most ~10 vertices.
pub fn lead_preserving_automorphisms(host: &OpenQuantumGraph) -> Vec<Vec<usize>> {
    let n = host.vertex_count();
    let edge_lookup: HashMap<(usize, usize), f64> = host
        .edges()
        .iter()
        .map(|e| ((e.u, e.v), e.length))
        .collect();
    let leads: BTreeSet<usize> = host.leads().iter().copied().collect();

    let mut found = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, n, &mut |candidate| {
        let leads_match = candidate_leads(candidate, &leads) == leads;
        if leads_match && preserves_edges(candidate, host, &edge_lookup) {
            found.push(candidate.to_vec());
        }
    });
    found.sort();
    found
}

fn candidate_leads(perm: &[usize], leads: &BTreeSet<usize>) -> BTreeSet<usize> {
    leads.iter().map(|&v| perm[v]).collect()
}

fn preserves_edges(
    perm: &[usize],
    host: &OpenQuantumGraph,
    lookup: &HashMap<(usize, usize), f64>,
) -> bool {
    host.edges().iter().all(|e| {
        let (a, b) = (perm[e.u], perm[e.v]);
        let key = (a.min(b), a.max(b));
        lookup.get(&key) == Some(&e.length)
    })
}

/// Heap's algorithm, visiting each permutation of `0..n` exactly once.
fn permute(perm: &mut Vec<usize>, n: usize, visit: &mut impl FnMut(&[usize])) {
    if n <= 1 {
        visit(perm);
        return;
    }
    for i in 0..n {
        permute(perm, n - 1, visit);
        if n % 2 == 0 {
            perm.swap(i, n - 1);
        } else {
            perm.swap(0, n - 1);
        }
    }
}

/// How each automorphism permutes edge indices. Every image edge exists by
/// construction, so the maps are total.
fn edge_index_permutations(host: &OpenQuantumGraph, autos: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let index_of: HashMap<(usize, usize), usize> = host
        .edges()
        .iter()
        .enumerate()
        .map(|(j, e)| ((e.u, e.v), j))
        .collect();
    autos
        .iter()
        .map(|perm| {
            host.edges()
                .iter()
                .map(|e| {
                    let (a, b) = (perm[e.u], perm[e.v]);
                    index_of[&(a.min(b), a.max(b))]
                })
                .collect()
        })
        .collect()
}

fn apply_edge_perm(mask: SubgraphMask, edge_perm: &[usize]) -> SubgraphMask {
    let mut bits = 0u64;
    for j in mask.iter() {
        bits |= 1 << edge_perm[j];
    }
    SubgraphMask::new(bits, mask.len()).expect("permuting bit positions preserves the mask length")
}

/// Partitions all masks with `edge_count` retained edges into orbits under
/// the lead-preserving automorphisms, sorted by representative.
pub fn classify_subgraphs(
    host: &OpenQuantumGraph,
    edge_count: usize,
) -> Result<Vec<IsoClass>, GraphError> {
    let autos = lead_preserving_automorphisms(host);
    let edge_perms = edge_index_permutations(host, &autos);
    classify_with_perms(host, edge_count, &edge_perms)
}

/// Classes for every edge count 0..=L, ascending, computing the
/// automorphism group once.
pub fn classify_all(host: &OpenQuantumGraph) -> Result<Vec<IsoClass>, GraphError> {
    let autos = lead_preserving_automorphisms(host);
    let edge_perms = edge_index_permutations(host, &autos);
    let mut classes = Vec::new();
    for l in 0..=host.edge_count() {
        classes.extend(classify_with_perms(host, l, &edge_perms)?);
    }
    Ok(classes)
}

fn classify_with_perms(
    host: &OpenQuantumGraph,
    edge_count: usize,
    edge_perms: &[Vec<usize>],
) -> Result<Vec<IsoClass>, GraphError> {
    let mut classes = Vec::new();
    let mut visited: HashSet<u64> = HashSet::new();
    for mask in masks_with_edge_count(host.edge_count(), edge_count)? {
        if visited.contains(&mask.bits()) {
            continue;
        }
        // Ascending enumeration makes every first-seen mask its orbit's
        // lexicographic minimum.
        let orbit: BTreeSet<u64> = edge_perms
            .iter()
            .map(|p| apply_edge_perm(mask, p).bits())
            .collect();
        visited.extend(orbit.iter().copied());
        classes.push(IsoClass {
            representative: mask,
            orbit_size: orbit.len(),
            edge_count,
        });
    }
    Ok(classes)
}
