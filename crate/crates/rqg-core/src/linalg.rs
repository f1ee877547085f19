//! Dense complex linear solves for the path-family systems.
//!
//! Systems are small (≤ ~60×60), so everything is direct. The fast path is
//! LU with row pivoting. When a pivot falls below the relative threshold the
//! matrix is (numerically) rank-deficient; instead of giving up immediately,
//! a complete-pivoting elimination recovers a solution whenever the
//! right-hand side is consistent, with free variables set to zero. That case
//! is not academic: equal-length graphs hit exact bound states at special
//! wavenumbers (e.g. kℓ = π with an even cycle present), where the system is
//! singular but the scattering amplitudes still have well-defined values.
//! Only an inconsistent right-hand side is reported as singular.

use num_complex::Complex64;

use thiserror::Error;

/// Relative pivot threshold: entries below `PIVOT_RTOL * max|a_ij|` are
/// treated as zero during elimination.
pub const PIVOT_RTOL: f64 = 1e-12;

/// A solve must reproduce its right-hand side to this relative residual.
pub const RESIDUAL_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("singular system: relative pivot {pivot:.3e} with inconsistent right-hand side")]
    Singular { pivot: f64 },
}

/// Row-major dense factorization of a square complex matrix.
pub struct Factorization {
    dim: usize,
    scale: f64,
    kind: Kind,
}

enum Kind {
    /// Row-pivoted LU, full rank. `perm[s]` is the original row brought to
    /// position `s`; multipliers live below the diagonal.
    Full { lu: Vec<Complex64>, perm: Vec<usize> },
    /// Complete-pivoting elimination stopped at `rank`. Solves succeed only
    /// for consistent right-hand sides; unknowns in the dropped columns are
    /// returned as zero.
    Deficient {
        lu: Vec<Complex64>,
        row_perm: Vec<usize>,
        col_perm: Vec<usize>,
        rank: usize,
        rejected_pivot: f64,
    },
}

impl Factorization {
    /// Factorizes `a` (row-major, `dim * dim` entries). Never fails: a
    /// rank-deficient matrix yields a factorization whose solves check
    /// right-hand-side consistency.
    pub fn new(dim: usize, a: &[Complex64]) -> Self {
        assert_eq!(a.len(), dim * dim, "matrix shape mismatch");
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dim == 0 {
            return Self {
                dim,
                scale,
                kind: Kind::Full {
                    lu: Vec::new(),
                    perm: Vec::new(),
                },
            };
        }
        let threshold = PIVOT_RTOL * scale;
        if let Some(kind) = partial_pivot_lu(dim, a, threshold) {
            Self { dim, scale, kind }
        } else {
            Self {
                dim,
                scale,
                kind: complete_pivot_lu(dim, a, threshold),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank detected during elimination (`dim` on the fast path).
    pub fn rank(&self) -> usize {
        match &self.kind {
            Kind::Full { .. } => self.dim,
            Kind::Deficient { rank, .. } => *rank,
        }
    }

    /// Solves for one right-hand side.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        assert_eq!(rhs.len(), self.dim, "rhs length mismatch");
        match &self.kind {
            Kind::Full { lu, perm } => Ok(solve_full(self.dim, lu, perm, rhs)),
            Kind::Deficient {
                lu,
                row_perm,
                col_perm,
                rank,
                rejected_pivot,
            } => solve_deficient(
                self.dim,
                lu,
                row_perm,
                col_perm,
                *rank,
                rhs,
                *rejected_pivot / self.scale.max(f64::MIN_POSITIVE),
            ),
        }
    }
}

/// Row-pivoted LU in place. Returns None when any pivot falls below
/// `threshold`, signalling the caller to retry with complete pivoting.
fn partial_pivot_lu(dim: usize, a: &[Complex64], threshold: f64) -> Option<Kind> {
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..dim).collect();
    for s in 0..dim {
        let (best_row, best) = (s..dim)
            .map(|i| (i, lu[i * dim + s].norm()))
            .fold((s, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if !(best > threshold) {
            return None;
        }
        if best_row != s {
            perm.swap(s, best_row);
            for j in 0..dim {
                lu.swap(s * dim + j, best_row * dim + j);
            }
        }
        let pivot = lu[s * dim + s];
        for i in s + 1..dim {
            let factor = lu[i * dim + s] / pivot;
            lu[i * dim + s] = factor;
            for j in s + 1..dim {
                let sub = factor * lu[s * dim + j];
                lu[i * dim + j] -= sub;
            }
        }
    }
    Some(Kind::Full { lu, perm })
}

/// Complete-pivoting elimination; stops when the largest remaining entry
/// drops below `threshold` and records the achieved rank.
fn complete_pivot_lu(dim: usize, a: &[Complex64], threshold: f64) -> Kind {
    let mut lu = a.to_vec();
    let mut row_perm: Vec<usize> = (0..dim).collect();
    let mut col_perm: Vec<usize> = (0..dim).collect();
    let mut rank = dim;
    let mut rejected = 0.0;
    for s in 0..dim {
        let mut best = -1.0;
        let (mut bi, mut bj) = (s, s);
        for i in s..dim {
            for j in s..dim {
                let mag = lu[i * dim + j].norm();
                if mag > best {
                    best = mag;
                    bi = i;
                    bj = j;
                }
            }
        }
        if !(best > threshold) {
            rank = s;
            rejected = best.max(0.0);
            break;
        }
        if bi != s {
            row_perm.swap(s, bi);
            for j in 0..dim {
                lu.swap(s * dim + j, bi * dim + j);
            }
        }
        if bj != s {
            col_perm.swap(s, bj);
            for i in 0..dim {
                lu.swap(i * dim + s, i * dim + bj);
            }
        }
        let pivot = lu[s * dim + s];
        for i in s + 1..dim {
            let factor = lu[i * dim + s] / pivot;
            lu[i * dim + s] = factor;
            for j in s + 1..dim {
                let sub = factor * lu[s * dim + j];
                lu[i * dim + j] -= sub;
            }
        }
    }
    Kind::Deficient {
        lu,
        row_perm,
        col_perm,
        rank,
        rejected_pivot: rejected,
    }
}

fn solve_full(dim: usize, lu: &[Complex64], perm: &[usize], rhs: &[Complex64]) -> Vec<Complex64> {
    let mut y: Vec<Complex64> = perm.iter().map(|&r| rhs[r]).collect();
    for s in 0..dim {
        for i in s + 1..dim {
            let sub = lu[i * dim + s] * y[s];
            y[i] -= sub;
        }
    }
    for s in (0..dim).rev() {
        let mut acc = y[s];
        for j in s + 1..dim {
            acc -= lu[s * dim + j] * y[j];
        }
        y[s] = acc / lu[s * dim + s];
    }
    y
}

fn solve_deficient(
    dim: usize,
    lu: &[Complex64],
    row_perm: &[usize],
    col_perm: &[usize],
    rank: usize,
    rhs: &[Complex64],
    relative_pivot: f64,
) -> Result<Vec<Complex64>, LinalgError> {
    let rhs_norm = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut y: Vec<Complex64> = row_perm.iter().map(|&r| rhs[r]).collect();
    for s in 0..rank {
        for i in s + 1..dim {
            let sub = lu[i * dim + s] * y[s];
            y[i] -= sub;
        }
    }
    // Eliminated rows below the rank must have vanished for the system to be
    // consistent; otherwise the right-hand side excites the deficient
    // directions and there is no solution to report.
    let tail = y[rank..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if tail > RESIDUAL_RTOL * (1.0 + rhs_norm) {
        return Err(LinalgError::Singular {
            pivot: relative_pivot,
        });
    }
    let mut x = vec![Complex64::ZERO; dim];
    for s in (0..rank).rev() {
        let mut acc = y[s];
        for j in s + 1..rank {
            acc -= lu[s * dim + j] * x[j];
        }
        x[s] = acc / lu[s * dim + s];
    }
    let mut out = vec![Complex64::ZERO; dim];
    for s in 0..rank {
        out[col_perm[s]] = x[s];
    }
    Ok(out)
}

/// Max-norm residual ‖a·x − b‖_∞, used by tests to check the solve contract.
pub fn residual_inf(dim: usize, a: &[Complex64], x: &[Complex64], b: &[Complex64]) -> f64 {
    (0..dim)
        .map(|i| {
            let mut acc = -b[i];
            for j in 0..dim {
                acc += a[i * dim + j] * x[j];
            }
            acc.norm()
        })
        .fold(0.0, f64::max)
}
