//! The directed-edge path-family linear system and the global scattering
//! amplitudes of a two-channel open graph.
//!
//! For each retained edge {u,v} there are two unknowns: the summed amplitude
//! of all paths entering the edge at u, and the reverse. The unknown for
//! a→b couples to the unknowns leaving b: the reversal picks up the vertex
//! reflection amplitude, every other continuation the vertex transmission
//! amplitude, and a source term fires where b is the designated exit
//! channel. The global transmission amplitude from entrance i is then the
//! entrance transmission amplitude times the sum of the unknowns leaving i.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::ScatterError;
use crate::graph::{nk_amplitudes, OpenQuantumGraph};
use crate::linalg::{Factorization, LinalgError};

/// One unknown of the path-family system: paths entering the edge at `tail`
/// and moving toward `head`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedEdge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

/// `e^{ikℓ}` with the phase reduced into [0, 2π) before exponentiation.
/// The reduction makes results at kℓ and kℓ + 2π identical bit for bit
/// whenever kℓ + 2π is computed exactly, instead of merely close.
fn edge_phase(k: f64, length: f64) -> Complex64 {
    Complex64::from_polar(1.0, (k * length).rem_euclid(TAU))
}

/// Matrix and per-unknown data for one graph at one wavenumber. The matrix
/// depends only on the graph and k; the right-hand side depends on the exit
/// choice, so one factorization serves both transmission and reflection.
struct System {
    unknowns: Vec<DirectedEdge>,
    matrix: Vec<Complex64>,
    phases: Vec<Complex64>,
    head_transmission: Vec<f64>,
}

impl System {
    /// Assembles the system over the edges listed in `kept` (host edge
    /// indices). Unknown order: kept edges in the given order, the low
    /// endpoint's orientation first.
    fn build(g: &OpenQuantumGraph, k: f64, kept: &[usize]) -> Result<System, ScatterError> {
        let n = g.vertex_count();
        let dim = 2 * kept.len();

        let mut degree = vec![0usize; n];
        let mut outgoing: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut unknowns = Vec::with_capacity(dim);
        for (slot, &j) in kept.iter().enumerate() {
            let e = g.edges()[j];
            degree[e.u] += 1;
            degree[e.v] += 1;
            outgoing[e.u].push((2 * slot, e.v));
            outgoing[e.v].push((2 * slot + 1, e.u));
            unknowns.push(DirectedEdge {
                tail: e.u,
                head: e.v,
                length: e.length,
            });
            unknowns.push(DirectedEdge {
                tail: e.v,
                head: e.u,
                length: e.length,
            });
        }
        for &lead in g.leads() {
            degree[lead] += 1;
        }

        let mut matrix = vec![Complex64::ZERO; dim * dim];
        let mut phases = Vec::with_capacity(dim);
        let mut head_transmission = Vec::with_capacity(dim);
        for (t, edge) in unknowns.iter().enumerate() {
            let amp = nk_amplitudes(degree[edge.head])?;
            let z = edge_phase(k, edge.length);
            phases.push(z);
            head_transmission.push(amp.transmission);
            let row = &mut matrix[t * dim..(t + 1) * dim];
            row[t] += Complex64::ONE;
            row[t ^ 1] -= z * amp.reflection;
            for &(out, _) in &outgoing[edge.head] {
                if out != (t ^ 1) {
                    row[out] -= z * amp.transmission;
                }
            }
        }
        Ok(System {
            unknowns,
            matrix,
            phases,
            head_transmission,
        })
    }

    fn dim(&self) -> usize {
        self.unknowns.len()
    }

    /// Source vector for a given exit channel: rows whose head is the exit
    /// vertex receive z times the exit's transmission amplitude.
    fn rhs_for_exit(&self, exit: usize) -> Vec<Complex64> {
        self.unknowns
            .iter()
            .enumerate()
            .map(|(t, edge)| {
                if edge.head == exit {
                    self.phases[t] * self.head_transmission[t]
                } else {
                    Complex64::ZERO
                }
            })
            .collect()
    }

    /// Sum of the solved unknowns leaving `vertex`, in unknown order.
    fn departing_sum(&self, solution: &[Complex64], vertex: usize) -> Complex64 {
        self.unknowns
            .iter()
            .zip(solution)
            .filter(|(edge, _)| edge.tail == vertex)
            .map(|(_, p)| p)
            .sum()
    }
}

/// The assembled path-family system for one graph, wavenumber, and exit
/// channel: one equation per directed retained edge.
pub struct PathFamilySystem {
    system: System,
    rhs: Vec<Complex64>,
    k: f64,
    exit_vertex: usize,
}

impl PathFamilySystem {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn unknowns(&self) -> &[DirectedEdge] {
        &self.system.unknowns
    }

    /// Row-major `dim() × dim()` coefficient matrix.
    pub fn matrix(&self) -> &[Complex64] {
        &self.system.matrix
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn exit_vertex(&self) -> usize {
        self.exit_vertex
    }
}

/// Builds the full path-family system of `g` with the source at
/// `exit_vertex`, covering every retained edge of the graph.
pub fn assemble(
    g: &OpenQuantumGraph,
    k: f64,
    exit_vertex: usize,
) -> Result<PathFamilySystem, ScatterError> {
    check_wavenumber(k)?;
    require_lead(g, exit_vertex)?;
    let all: Vec<usize> = (0..g.edge_count()).collect();
    let system = System::build(g, k, &all)?;
    let rhs = system.rhs_for_exit(exit_vertex);
    Ok(PathFamilySystem {
        system,
        rhs,
        k,
        exit_vertex,
    })
}

/// Solves an assembled system. A genuinely non-invertible system (the
/// right-hand side excites a deficient direction) is reported as singular at
/// that wavenumber; a consistent singular system still solves, with the
/// undetermined components set to zero.
pub fn solve_path_families(sys: &PathFamilySystem) -> Result<Vec<Complex64>, ScatterError> {
    let factors = Factorization::new(sys.dim(), sys.matrix());
    factors
        .solve(sys.rhs())
        .map_err(|LinalgError::Singular { pivot }| ScatterError::SingularAtK { k: sys.k, pivot })
}

/// Transmission, reflection, and flux bookkeeping at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringResult {
    pub k: f64,
    pub transmission_amplitude: Complex64,
    pub reflection_amplitude: Complex64,
    /// |transmission_amplitude|²
    pub transmission: f64,
    /// |reflection_amplitude|²
    pub reflection: f64,
    /// |T + R − 1|
    pub flux_defect: f64,
}

/// One entry of a transmission curve; `None` marks a wavenumber where the
/// system was singular and no value is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub k: f64,
    pub result: Option<ScatteringResult>,
}

/// Global transmission amplitude from the lead at `entrance` to the lead at
/// `exit`. Zero whenever the exit is unreachable from the entrance through
/// retained edges.
pub fn transmission_amplitude(
    g: &OpenQuantumGraph,
    k: f64,
    entrance: usize,
    exit: usize,
) -> Result<Complex64, ScatterError> {
    check_wavenumber(k)?;
    check_channels(g, entrance, exit)?;
    let part = EntrancePart::build(g, k, entrance)?;
    part.transmission_toward(exit)
}

/// Global reflection amplitude back into the lead at `entrance`.
pub fn reflection_amplitude(
    g: &OpenQuantumGraph,
    k: f64,
    entrance: usize,
) -> Result<Complex64, ScatterError> {
    check_wavenumber(k)?;
    require_lead(g, entrance)?;
    let part = EntrancePart::build(g, k, entrance)?;
    part.reflection()
}

/// Both amplitudes and the derived probabilities, from one factorization.
pub fn scatter(
    g: &OpenQuantumGraph,
    k: f64,
    entrance: usize,
    exit: usize,
) -> Result<ScatteringResult, ScatterError> {
    check_wavenumber(k)?;
    check_channels(g, entrance, exit)?;
    let part = EntrancePart::build(g, k, entrance)?;
    let sigma = part.transmission_toward(exit)?;
    let rho = part.reflection()?;
    let transmission = sigma.norm_sqr();
    let reflection = rho.norm_sqr();
    Ok(ScatteringResult {
        k,
        transmission_amplitude: sigma,
        reflection_amplitude: rho,
        transmission,
        reflection,
        flux_defect: (transmission + reflection - 1.0).abs(),
    })
}

/// Transmission over an ascending wavenumber grid. Singular points are
/// flagged (`result: None`), never interpolated.
pub fn transmission_curve(
    g: &OpenQuantumGraph,
    k_grid: &[f64],
    entrance: usize,
    exit: usize,
) -> Result<Vec<CurvePoint>, ScatterError> {
    if k_grid.is_empty() || k_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ScatterError::BadGrid);
    }
    for &k in k_grid {
        check_wavenumber(k)?;
    }
    check_channels(g, entrance, exit)?;
    let mut curve = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let result = match scatter(g, k, entrance, exit) {
            Ok(r) => Some(r),
            Err(ScatterError::SingularAtK { .. }) => None,
            Err(other) => return Err(other),
        };
        curve.push(CurvePoint { k, result });
    }
    Ok(curve)
}

/// The entrance's connected part of the graph, assembled and factorized
/// once. Edges unreachable from the entrance cannot influence either
/// amplitude, and leaving them out keeps bound states of detached pieces
/// from rendering the system singular.
struct EntrancePart {
    entrance: usize,
    entrance_reflection: f64,
    entrance_transmission: f64,
    k: f64,
    /// None when no retained edge touches the entrance.
    core: Option<PartCore>,
}

struct PartCore {
    system: System,
    factors: Factorization,
    vertex_reached: Vec<bool>,
}

impl EntrancePart {
    fn build(g: &OpenQuantumGraph, k: f64, entrance: usize) -> Result<EntrancePart, ScatterError> {
        let amp = nk_amplitudes(total_degree_with_leads(g, entrance))?;
        let (kept, vertex_reached) = component_edges(g, entrance);
        let core = if kept.is_empty() {
            None
        } else {
            let system = System::build(g, k, &kept)?;
            let factors = Factorization::new(system.dim(), &system.matrix);
            Some(PartCore {
                system,
                factors,
                vertex_reached,
            })
        };
        Ok(EntrancePart {
            entrance,
            entrance_reflection: amp.reflection,
            entrance_transmission: amp.transmission,
            k,
            core,
        })
    }

    fn transmission_toward(&self, exit: usize) -> Result<Complex64, ScatterError> {
        let Some(core) = &self.core else {
            return Ok(Complex64::ZERO);
        };
        if !core.vertex_reached[exit] {
            return Ok(Complex64::ZERO);
        }
        let rhs = core.system.rhs_for_exit(exit);
        let solution = self.solve(core, &rhs)?;
        Ok(self.entrance_transmission * core.system.departing_sum(&solution, self.entrance))
    }

    fn reflection(&self) -> Result<Complex64, ScatterError> {
        let base = Complex64::from(self.entrance_reflection);
        let Some(core) = &self.core else {
            return Ok(base);
        };
        let rhs = core.system.rhs_for_exit(self.entrance);
        let solution = self.solve(core, &rhs)?;
        Ok(base + self.entrance_transmission * core.system.departing_sum(&solution, self.entrance))
    }

    fn solve(&self, core: &PartCore, rhs: &[Complex64]) -> Result<Vec<Complex64>, ScatterError> {
        core.factors
            .solve(rhs)
            .map_err(|LinalgError::Singular { pivot }| ScatterError::SingularAtK {
                k: self.k,
                pivot,
            })
    }
}

/// Edge indices reachable from `start` plus a vertex membership table.
fn component_edges(g: &OpenQuantumGraph, start: usize) -> (Vec<usize>, Vec<bool>) {
    let n = g.vertex_count();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        neighbors[e.u].push(e.v);
        neighbors[e.v].push(e.u);
    }
    let mut reached = vec![false; n];
    reached[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &neighbors[v] {
            if !reached[w] {
                reached[w] = true;
                stack.push(w);
            }
        }
    }
    let kept = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| reached[e.u])
        .map(|(j, _)| j)
        .collect();
    (kept, reached)
}

fn total_degree_with_leads(g: &OpenQuantumGraph, vertex: usize) -> usize {
    g.total_degree(vertex)
        .expect("channel vertices are validated before use")
}

fn check_wavenumber(k: f64) -> Result<(), ScatterError> {
    if k.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::BadWavenumber(k))
    }
}

fn require_lead(g: &OpenQuantumGraph, vertex: usize) -> Result<(), ScatterError> {
    if vertex >= g.vertex_count() {
        return Err(ScatterError::Graph(crate::error::GraphError::VertexOutOfRange {
            vertex,
            vertex_count: g.vertex_count(),
        }));
    }
    if g.has_lead(vertex) {
        Ok(())
    } else {
        Err(ScatterError::NoLeadAt(vertex))
    }
}

fn check_channels(g: &OpenQuantumGraph, entrance: usize, exit: usize) -> Result<(), ScatterError> {
    require_lead(g, entrance)?;
    require_lead(g, exit)?;
    if entrance == exit {
        return Err(ScatterError::SameChannel(entrance));
    }
    Ok(())
}
