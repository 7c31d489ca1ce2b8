//! Self-adjoint eigenvalue solvers and spectral statistics.
//!
//! Complex Hermitian matrices are solved through the real symmetric embedding
//! `[[Re M, -Im M], [Im M, Re M]]`, whose spectrum is that of `M` with every
//! eigenvalue doubled.

mod lanczos;
mod tridiagonal;

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::Interval;
use crate::ensemble::{EnsembleConfig, MatrixSample};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, RealMatrix, SelfAdjoint};
use crate::stats::compensated_sum;

pub use tridiagonal::{tridiagonalize, Tridiagonal, QL_MAX_SWEEPS};

/// Relative tolerance for pairing the doubled eigenvalues of the embedding.
pub const EMBEDDING_PAIR_TOL: f64 = 1e-8;
/// Relative bisection tolerance for extreme eigenvalues.
pub const BISECTION_TOL: f64 = 1e-13;

/// Ordered spectrum of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    /// `lambda_1 >= ... >= lambda_N`.
    pub eigenvalues: Vec<f64>,
    pub config: Option<EnsembleConfig>,
    pub replication_index: u64,
    pub derived_seed: u64,
    pub wall_seconds: f64,
}

impl SpectralSample {
    /// Solves the full spectrum of a sampled matrix.
    pub fn from_matrix_sample(sample: &MatrixSample, config: Option<&EnsembleConfig>) -> Result<Self> {
        let start = Instant::now();
        let eigenvalues = eigvals(&sample.matrix)?;
        Ok(Self {
            eigenvalues,
            config: config.cloned(),
            replication_index: sample.replication_index,
            derived_seed: sample.derived_seed,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Wraps an already sorted (descending) spectrum.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Self {
        Self {
            eigenvalues,
            config: None,
            replication_index: 0,
            derived_seed: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `lambda_i` with a one-based index.
    pub fn lambda(&self, i: usize) -> f64 {
        self.eigenvalues[i - 1]
    }
}

/// All eigenvalues of a real symmetric matrix, descending.
pub fn eigvals_sym(matrix: &RealMatrix) -> Result<Vec<f64>> {
    tridiagonalize(matrix).eigenvalues_ql()
}

/// All eigenvalues of a real symmetric or complex Hermitian matrix, descending.
pub fn eigvals(matrix: &SelfAdjoint) -> Result<Vec<f64>> {
    match matrix {
        SelfAdjoint::Real(m) => eigvals_sym(m),
        SelfAdjoint::Complex(m) => {
            let doubled = eigvals_sym(&hermitian_embed(m))?;
            dedupe_pairs(&doubled)
        }
    }
}

/// Real symmetric `2N x 2N` embedding of a Hermitian matrix.
pub fn hermitian_embed(m: &ComplexMatrix) -> RealMatrix {
    let n = m.n();
    RealMatrix::from_fn(2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Collapses a descending spectrum in which every value appears twice.
pub fn dedupe_pairs(doubled: &[f64]) -> Result<Vec<f64>> {
    if !doubled.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "embedded spectrum has odd length {}",
            doubled.len()
        )));
    }
    let scale = doubled
        .first()
        .map(|a| a.abs())
        .unwrap_or(0.0)
        .max(doubled.last().map(|a| a.abs()).unwrap_or(0.0))
        .max(f64::MIN_POSITIVE);
    doubled
        .chunks_exact(2)
        .map(|pair| {
            if (pair[0] - pair[1]).abs() <= EMBEDDING_PAIR_TOL * scale {
                Ok(pair[1])
            } else {
                Err(Error::Domain(format!(
                    "embedding eigenvalues {} and {} do not pair up",
                    pair[0], pair[1]
                )))
            }
        })
        .collect()
}

/// The largest and smallest eigenvalues, descending within each list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeEigenvalues {
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
}

/// The `k_top` largest and `k_bottom` smallest eigenvalues by Sturm bisection
/// on the tridiagonal form.
pub fn eigvals_extreme(matrix: &SelfAdjoint, k_top: usize, k_bottom: usize) -> Result<ExtremeEigenvalues> {
    let n = matrix.n();
    if k_top + k_bottom > n {
        return Err(Error::Domain(format!(
            "requested {k_top} + {k_bottom} eigenvalues of a {n} x {n} matrix"
        )));
    }
    // embedding multiplicity: the k-th eigenvalue of M is the (2k - 1)-th of the embedding
    let (t, stride) = match matrix {
        SelfAdjoint::Real(m) => (tridiagonalize(m), 1),
        SelfAdjoint::Complex(m) => (tridiagonalize(&hermitian_embed(m)), 2),
    };
    let tol = BISECTION_TOL * t.norm_bound().max(f64::MIN_POSITIVE);
    let size = t.n();
    let top = (0..k_top)
        .map(|k| t.kth_smallest(size - 1 - stride * k, tol))
        .collect();
    let bottom = (0..k_bottom)
        .rev()
        .map(|k| t.kth_smallest(stride * k, tol))
        .collect();
    Ok(ExtremeEigenvalues { top, bottom })
}

/// `lambda_1`, by Lanczos iteration when it settles quickly and by bisection
/// on the full tridiagonal form otherwise.
pub fn largest_eigenvalue(matrix: &SelfAdjoint) -> Result<f64> {
    if matrix.n() == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    match lanczos::largest_eigenvalue(matrix) {
        Some(l) => Ok(l),
        None => Ok(eigvals_extreme(matrix, 1, 0)?.top[0]),
    }
}

/// Normalized resolvent trace at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventStats {
    pub z: Complex64,
    /// `(1/N) sum (z - lambda_i)^-1`.
    pub trace_gn: Complex64,
    /// `N * trace_gn`.
    pub trace_full: Complex64,
    /// `sum |z - lambda_i|^-2`, equal to `sum_ij |G_ij|^2`.
    pub hs_norm_sq: f64,
}

pub fn resolvent_trace(eigenvalues: &[f64], z: Complex64) -> Result<ResolventStats> {
    if eigenvalues.is_empty() {
        return Err(Error::Domain("empty spectrum".into()));
    }
    if z.im == 0.0 && eigenvalues.contains(&z.re) {
        return Err(Error::Singular { re: z.re, im: z.im });
    }
    let inv: Vec<Complex64> = eigenvalues.iter().map(|&l| (z - l).inv()).collect();
    let re = compensated_sum(inv.iter().map(|w| w.re));
    let im = compensated_sum(inv.iter().map(|w| w.im));
    let hs_norm_sq = compensated_sum(inv.iter().map(|w| w.norm_sqr()));
    let trace_full = Complex64::new(re, im);
    Ok(ResolventStats {
        z,
        trace_gn: trace_full / eigenvalues.len() as f64,
        trace_full,
        hs_norm_sq,
    })
}

/// Number of eigenvalues strictly inside each open interval.
pub fn gap_census(eigenvalues_desc: &[f64], gaps: &[Interval]) -> Vec<usize> {
    gaps.iter()
        .map(|g| {
            let above_lo = eigenvalues_desc.partition_point(|&x| x > g.lo);
            let at_or_above_hi = eigenvalues_desc.partition_point(|&x| x >= g.hi);
            above_lo.saturating_sub(at_or_above_hi)
        })
        .collect()
}
