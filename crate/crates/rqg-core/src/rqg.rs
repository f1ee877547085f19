//! Transmission statistics of randomized edge-deletion ensembles.
//!
//! Randomizing a two-lead host with edge retention probability p weights
//! every edge subset by p^l (1−p)^(L−l). Grouping subsets by edge count l
//! turns the ensemble transmission into a binomially weighted sum of per-l
//! mean transmissions, so one enumeration (or sampling) pass covers every p.
//! The exact pipeline enumerates all 2^L subsets; the Monte Carlo pipeline
//! draws up to `cap` subsets per l without replacement. When every ensemble
//! saturates, the two pipelines agree bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{RqgError, ScatterError};
use crate::graph::{masks_with_edge_count, OpenQuantumGraph, SubgraphMask};
use crate::scattering::transmission_amplitude;

/// Largest host edge count accepted by the exact pipeline by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// Largest tolerated fraction of singular-flagged subgraphs at any single
/// edge count before a profile aborts; silent exclusion at scale would bias
/// the averages.
pub const MAX_FLAGGED_FRACTION: f64 = 0.01;

/// Largest allowed step for the maximizing-p grid scan.
pub const MAX_SCAN_STEP: f64 = 0.001;

/// Masks per work unit during parallel sweeps. Fixed so that the chunked
/// summation tree, and therefore every floating-point result, is identical
/// for every thread count.
const SOLVE_CHUNK: usize = 64;

/// How a profile's per-l ensembles were populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Exact,
    MonteCarlo { cap: usize, seed: u64 },
}

/// Transmission statistics over the (sampled or full) ensemble at one edge
/// count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCountStats {
    /// Subgraphs whose transmission entered the mean.
    pub sample_count: usize,
    /// Mean of |σ|² over those subgraphs; 0 when none were solvable.
    pub mean_transmission: f64,
    /// Subgraphs skipped because their system was singular at this k.
    pub flagged: usize,
}

/// Per-edge-count transmission means of one host at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCountProfile {
    pub host_edge_count: usize,
    pub k: f64,
    pub mode: ProfileMode,
    /// Indexed by edge count l = 0..=host_edge_count.
    pub per_edge_count: Vec<EdgeCountStats>,
}

/// A transmission-vs-p slice derived from one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RqgEstimate {
    pub profile: EdgeCountProfile,
    pub p_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Probability of one particular subgraph with `subgraph_edges` retained
/// edges under retention probability `p` (the binomial count over subgraphs
/// of equal edge count enters separately).
pub fn subgraph_weight(
    host_edges: usize,
    subgraph_edges: usize,
    p: f64,
) -> Result<f64, RqgError> {
    if subgraph_edges > host_edges {
        return Err(RqgError::Graph(
            crate::error::GraphError::TargetAboveEdgeCount {
                target: subgraph_edges,
                available: host_edges,
            },
        ));
    }
    check_probability(p)?;
    Ok(p.powi(subgraph_edges as i32) * (1.0 - p).powi((host_edges - subgraph_edges) as i32))
}

/// Exact per-l profile by full enumeration of all 2^L subgraphs, with the
/// default enumeration ceiling.
pub fn exact_profile(host: &OpenQuantumGraph, k: f64) -> Result<EdgeCountProfile, RqgError> {
    exact_profile_with_limit(host, k, DEFAULT_ENUMERATION_LIMIT)
}

/// Exact per-l profile with an explicit enumeration ceiling.
pub fn exact_profile_with_limit(
    host: &OpenQuantumGraph,
    k: f64,
    limit: usize,
) -> Result<EdgeCountProfile, RqgError> {
    let edges = host.edge_count();
    if edges > limit {
        return Err(RqgError::EnumerationTooLarge { edges, limit });
    }
    let (entrance, exit) = channels(host)?;
    let mut per_edge_count = Vec::with_capacity(edges + 1);
    for l in 0..=edges {
        let masks: Vec<SubgraphMask> = masks_with_edge_count(edges, l)?.collect();
        per_edge_count.push(ensemble_stats(host, k, entrance, exit, &masks, l)?);
    }
    Ok(EdgeCountProfile {
        host_edge_count: edges,
        k,
        mode: ProfileMode::Exact,
        per_edge_count,
    })
}

/// Exact ensemble transmission over a p grid: per-l means weighted by
/// binomial(L,l) p^l (1−p)^(L−l), identical to summing over every subgraph
/// individually.
pub fn exact_transmission(
    host: &OpenQuantumGraph,
    k: f64,
    p_grid: &[f64],
) -> Result<RqgEstimate, RqgError> {
    let profile = exact_profile(host, k)?;
    approx_transmission(&profile, p_grid)
}

/// All masks with `edge_count` of `len` edges when there are at most `cap`
/// of them; otherwise `cap` distinct masks drawn uniformly, deterministic in
/// `seed`. Output ascending.
pub fn sample_ensemble(
    len: usize,
    edge_count: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<SubgraphMask>, RqgError> {
    if cap == 0 {
        return Err(RqgError::ZeroCap);
    }
    let everything = masks_with_edge_count(len, edge_count)?;
    let total = binomial(len, edge_count);
    if total <= cap as u128 {
        return Ok(everything.collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if total <= 4 * cap as u128 {
        // Dense regime: shuffle the full enumeration and keep a prefix.
        let mut all: Vec<SubgraphMask> = everything.collect();
        all.shuffle(&mut rng);
        all.truncate(cap);
        all.sort();
        Ok(all)
    } else {
        // Sparse regime: draw l-subsets and reject repeats.
        let mut chosen = std::collections::BTreeSet::new();
        while chosen.len() < cap {
            chosen.insert(floyd_subset(&mut rng, len, edge_count));
        }
        Ok(chosen
            .into_iter()
            .map(|bits| {
                SubgraphMask::new(bits, len).expect("sampled bits fit the mask length")
            })
            .collect())
    }
}

/// Monte Carlo per-l profile: up to `cap` subgraphs per edge count, each
/// ensemble seeded independently from (seed, l).
pub fn mc_profile(
    host: &OpenQuantumGraph,
    k: f64,
    cap: usize,
    seed: u64,
) -> Result<EdgeCountProfile, RqgError> {
    if cap == 0 {
        return Err(RqgError::ZeroCap);
    }
    let edges = host.edge_count();
    let (entrance, exit) = channels(host)?;
    let mut per_edge_count = Vec::with_capacity(edges + 1);
    for l in 0..=edges {
        let ensemble = sample_ensemble(edges, l, cap, ensemble_seed(seed, l))?;
        per_edge_count.push(ensemble_stats(host, k, entrance, exit, &ensemble, l)?);
    }
    Ok(EdgeCountProfile {
        host_edge_count: edges,
        k,
        mode: ProfileMode::MonteCarlo { cap, seed },
    per_edge_count,
    })
}

/// Ensemble transmission over a p grid from an existing profile.
pub fn approx_transmission(
    profile: &EdgeCountProfile,
    p_grid: &[f64],
) -> Result<RqgEstimate, RqgError> {
    for &p in p_grid {
        check_probability(p)?;
    }
    let values = p_grid
        .iter()
        .map(|&p| weighted_transmission(profile, p))
        .collect();
    Ok(RqgEstimate {
        profile: profile.clone(),
        p_grid: p_grid.to_vec(),
        values,
    })
}

/// The retention probability maximizing the ensemble transmission at one
/// wavenumber, located by a grid scan at resolution `p_step` over a Monte
/// Carlo profile. Ties resolve toward smaller p.
pub fn argmax_over_p(
    host: &OpenQuantumGraph,
    k: f64,
    cap: usize,
    seed: u64,
    p_step: f64,
) -> Result<(f64, f64), RqgError> {
    if !(p_step > 0.0 && p_step <= MAX_SCAN_STEP) {
        return Err(RqgError::BadScanStep {
            got: p_step,
            max: MAX_SCAN_STEP,
        });
    }
    let profile = mc_profile(host, k, cap, seed)?;
    let steps = (1.0 / p_step).ceil() as usize;
    let mut best_p = 0.0;
    let mut best_value = f64::NEG_INFINITY;
    for j in 0..=steps {
        let p = (j as f64 * p_step).min(1.0);
        let value = weighted_transmission(&profile, p);
        if value > best_value {
            best_p = p;
            best_value = value;
        }
    }
    Ok((best_p, best_value))
}

/// Largest pointwise |T_exact − T_approx| over two surfaces sampled on
/// identical (k, p) grids, one estimate per wavenumber.
pub fn max_abs_error(exact: &[RqgEstimate], approx: &[RqgEstimate]) -> Result<f64, RqgError> {
    if exact.len() != approx.len() {
        return Err(RqgError::GridMismatch(format!(
            "{} vs {} wavenumber slices",
            exact.len(),
            approx.len()
        )));
    }
    let mut worst = 0.0f64;
    for (e, a) in exact.iter().zip(approx) {
        if e.profile.k != a.profile.k {
            return Err(RqgError::GridMismatch(format!(
                "wavenumbers {} vs {}",
                e.profile.k, a.profile.k
            )));
        }
        if e.p_grid != a.p_grid {
            return Err(RqgError::GridMismatch(
                "retention probability grids differ".to_string(),
            ));
        }
        for (x, y) in e.values.iter().zip(&a.values) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Entrance and exit channels of a randomized host: its first two leads.
fn channels(host: &OpenQuantumGraph) -> Result<(usize, usize), RqgError> {
    match host.leads() {
        [entrance, exit, ..] => Ok((*entrance, *exit)),
        _ => Err(RqgError::NeedsTwoChannels),
    }
}

/// Solves every mask in fixed 64-mask chunks (parallelizable across chunks,
/// sequential within, merged in chunk order) so the accumulated sums do not
/// depend on the thread count.
fn ensemble_stats(
    host: &OpenQuantumGraph,
    k: f64,
    entrance: usize,
    exit: usize,
    masks: &[SubgraphMask],
    edge_count: usize,
) -> Result<EdgeCountStats, RqgError> {
    let chunks: Vec<Result<(f64, usize), RqgError>> = masks
        .par_chunks(SOLVE_CHUNK)
        .map(|chunk| {
            let mut sum = 0.0;
            let mut flagged = 0usize;
            for &mask in chunk {
                let sub = host.apply_mask(mask)?;
                match transmission_amplitude(&sub, k, entrance, exit) {
                    Ok(amplitude) => sum += amplitude.norm_sqr(),
                    Err(ScatterError::SingularAtK { .. }) => flagged += 1,
                    Err(other) => return Err(other.into()),
                }
            }
            Ok((sum, flagged))
        })
        .collect();

    let mut sum = 0.0;
    let mut flagged = 0usize;
    for chunk in chunks {
        let (s, f) = chunk?;
        sum += s;
        flagged += f;
    }
    if flagged as f64 > MAX_FLAGGED_FRACTION * masks.len() as f64 {
        return Err(RqgError::TooManyFlagged {
            edge_count,
            flagged,
            total: masks.len(),
        });
    }
    let sample_count = masks.len() - flagged;
    let mean_transmission = if sample_count == 0 {
        0.0
    } else {
        sum / sample_count as f64
    };
    Ok(EdgeCountStats {
        sample_count,
        mean_transmission,
        flagged,
    })
}

fn weighted_transmission(profile: &EdgeCountProfile, p: f64) -> f64 {
    let edges = profile.host_edge_count;
    (0..=edges)
        .map(|l| {
            binomial(edges, l) as f64
                * p.powi(l as i32)
                * (1.0 - p).powi((edges - l) as i32)
                * profile.per_edge_count[l].mean_transmission
        })
        .sum()
}

fn check_probability(p: f64) -> Result<(), RqgError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(RqgError::ProbabilityOutOfRange(p))
    }
}

/// Exact binomial coefficient; intermediate products stay integral.
fn binomial(n: usize, r: usize) -> u128 {
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = acc * (n - r + i) as u128 / i as u128;
    }
    acc
}

/// Integer mix of (seed, edge count) for independent per-l ensembles.
fn ensemble_seed(seed: u64, edge_count: usize) -> u64 {
    let mut x = seed ^ (edge_count as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// One uniform `edge_count`-subset of `0..len` as a bit pattern.
fn floyd_subset(rng: &mut impl Rng, len: usize, edge_count: usize) -> u64 {
    let mut bits = 0u64;
    for j in (len - edge_count)..len {
        let t = rng.random_range(0..=j);
        if bits >> t & 1 == 1 {
            bits |= 1 << j;
        } else {
            bits |= 1 << t;
        }
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::open_kne;
    use crate::graph::MetricGraph;
    use crate::scattering::scatter;

    fn two_edge_host() -> OpenQuantumGraph {
        let base = MetricGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        OpenQuantumGraph::new(base, &[0, 2]).unwrap()
    }

    #[test]
    fn subgraph_weight_formulas() {
        let p = 0.3f64;
        assert!((subgraph_weight(5, 5, p).unwrap() - 0.00243).abs() < 1e-15);
        assert!((subgraph_weight(5, 0, p).unwrap() - 0.7f64.powi(5)).abs() < 1e-15);
        assert_eq!(subgraph_weight(14, 7, 0.5).unwrap(), 6.103515625e-5);
        assert!(matches!(
            subgraph_weight(5, 6, 0.5),
            Err(RqgError::Graph(_))
        ));
        assert!(matches!(
            subgraph_weight(5, 2, 1.5),
            Err(RqgError::ProbabilityOutOfRange(_))
        ));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(14, 7), 3432);
        assert_eq!(binomial(27, 13), 20_058_300);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }

    #[test]
    fn exact_profile_group_sizes() {
        let host = open_kne(4, 1.0).unwrap();
        let profile = exact_profile(&host, 0.9).unwrap();
        let counts: Vec<usize> = profile
            .per_edge_count
            .iter()
            .map(|s| s.sample_count)
            .collect();
        assert_eq!(counts, vec![1, 5, 10, 10, 5, 1]);
        assert_eq!(profile.per_edge_count[0].mean_transmission, 0.0);
        assert_eq!(profile.per_edge_count[1].mean_transmission, 0.0);
        let full = scatter(&host, 0.9, 0, 3).unwrap().transmission;
        assert_eq!(profile.per_edge_count[5].mean_transmission, full);
    }

    #[test]
    fn exact_profile_rejects_large_hosts() {
        let host = open_kne(8, 1.0).unwrap();
        assert!(matches!(
            exact_profile(&host, 1.0),
            Err(RqgError::EnumerationTooLarge { edges: 27, limit: 24 })
        ));
        // The ceiling itself moves with the limit argument.
        let small = open_kne(5, 1.0).unwrap();
        assert!(matches!(
            exact_profile_with_limit(&small, 1.0, 5),
            Err(RqgError::EnumerationTooLarge { edges: 9, limit: 5 })
        ));
        assert!(exact_profile_with_limit(&small, 1.0, 9).is_ok());
    }

    #[test]
    fn needs_two_channels() {
        let base = MetricGraph::new(2, &[(0, 1, 1.0)]).unwrap();
        let host = OpenQuantumGraph::new(base, &[0]).unwrap();
        assert!(matches!(
            exact_profile(&host, 1.0),
            Err(RqgError::NeedsTwoChannels)
        ));
    }

    #[test]
    fn estimate_endpoints_are_exact() {
        let host = open_kne(4, 1.0).unwrap();
        let est = exact_transmission(&host, 1.7, &[0.0, 0.37, 1.0]).unwrap();
        assert_eq!(est.values[0], 0.0);
        let full = scatter(&host, 1.7, 0, 3).unwrap().transmission;
        assert_eq!(est.values[2], full);
        assert!(est.values.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }

    #[test]
    fn estimate_matches_per_mask_sum() {
        // Independent route: weight every subgraph individually.
        let host = open_kne(4, 1.0).unwrap();
        let (k, p) = (1.234, 0.41);
        let mut direct = 0.0;
        for bits in 0..32u64 {
            let mask = SubgraphMask::new(bits, 5).unwrap();
            let sub = host.apply_mask(mask).unwrap();
            let t = transmission_amplitude(&sub, k, 0, 3).unwrap().norm_sqr();
            direct += subgraph_weight(5, mask.edge_count(), p).unwrap() * t;
        }
        let est = exact_transmission(&host, k, &[p]).unwrap();
        assert!((est.values[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn ensembles_saturate_below_cap() {
        let all = sample_ensemble(14, 1, 250, 7).unwrap();
        assert_eq!(all.len(), 14);
        let all = sample_ensemble(5, 3, 250, 7).unwrap();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn sampled_ensembles_are_sorted_distinct_and_deterministic() {
        for (len, l, cap) in [(14, 7, 250), (14, 2, 25), (27, 13, 250)] {
            let a = sample_ensemble(len, l, cap, 42).unwrap();
            let b = sample_ensemble(len, l, cap, 42).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), cap);
            assert!(a.windows(2).all(|w| w[0] < w[1]));
            assert!(a.iter().all(|m| m.edge_count() == l));
            let other = sample_ensemble(len, l, cap, 43).unwrap();
            assert_ne!(a, other, "different seeds should draw differently");
        }
        assert!(matches!(
            sample_ensemble(14, 7, 0, 42),
            Err(RqgError::ZeroCap)
        ));
    }

    #[test]
    fn saturated_monte_carlo_reproduces_exact_bitwise() {
        let host = open_kne(4, 1.0).unwrap();
        let k = 2.31;
        let exact = exact_profile(&host, k).unwrap();
        let mc = mc_profile(&host, k, 10, 99).unwrap();
        assert_eq!(exact.per_edge_count, mc.per_edge_count);

        let grid: Vec<f64> = (0..=50).map(|j| j as f64 / 50.0).collect();
        let e = approx_transmission(&exact, &grid).unwrap();
        let a = approx_transmission(&mc, &grid).unwrap();
        assert_eq!(e.values, a.values);
        assert_eq!(max_abs_error(&[e], &[a]).unwrap(), 0.0);
    }

    #[test]
    fn monte_carlo_profiles_are_seed_deterministic() {
        let host = open_kne(6, 1.0).unwrap();
        let a = mc_profile(&host, 0.7, 40, 42).unwrap();
        let b = mc_profile(&host, 0.7, 40, 42).unwrap();
        assert_eq!(a, b);
        let c = mc_profile(&host, 0.7, 40, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn profiles_do_not_depend_on_thread_count() {
        let host = open_kne(6, 1.0).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_profile(&host, 1.1, 60, 42))
            .unwrap();
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| mc_profile(&host, 1.1, 60, 42))
            .unwrap();
        assert_eq!(single, several);
    }

    #[test]
    fn argmax_finds_the_monotone_maximum() {
        // Two-edge path: only the full subgraph transmits, so T(p) = p².
        let host = two_edge_host();
        let (p_m, t_m) = argmax_over_p(&host, 0.8, 16, 42, 0.001).unwrap();
        assert_eq!(p_m, 1.0);
        assert!((t_m - 1.0).abs() < 1e-12);
        assert!(matches!(
            argmax_over_p(&host, 0.8, 16, 42, 0.01),
            Err(RqgError::BadScanStep { .. })
        ));
    }

    #[test]
    fn argmax_ties_break_toward_smaller_p() {
        // Edgeless host: T(p) ≡ 0, so the scan must return p = 0.
        let base = MetricGraph::new(2, &[]).unwrap();
        let host = OpenQuantumGraph::new(base, &[0, 1]).unwrap();
        let (p_m, t_m) = argmax_over_p(&host, 0.8, 16, 42, 0.001).unwrap();
        assert_eq!((p_m, t_m), (0.0, 0.0));
    }

    #[test]
    fn grid_mismatches_are_rejected() {
        let host = open_kne(4, 1.0).unwrap();
        let e1 = exact_transmission(&host, 1.0, &[0.0, 0.5, 1.0]).unwrap();
        let e2 = exact_transmission(&host, 1.0, &[0.0, 0.6, 1.0]).unwrap();
        let e3 = exact_transmission(&host, 1.5, &[0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(
            max_abs_error(&[e1.clone()], &[e2]),
            Err(RqgError::GridMismatch(_))
        ));
        assert!(matches!(
            max_abs_error(&[e1.clone()], &[e3]),
            Err(RqgError::GridMismatch(_))
        ));
        assert!(matches!(
            max_abs_error(&[e1], &[]),
            Err(RqgError::GridMismatch(_))
        ));
    }

    #[test]
    fn per_l_seeds_differ() {
        let seeds: std::collections::HashSet<u64> =
            (0..=14).map(|l| ensemble_seed(42, l)).collect();
        assert_eq!(seeds.len(), 15);
    }
}
