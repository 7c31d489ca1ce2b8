use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Maximum implicit-shift QL sweeps spent on one eigenvalue.
pub const QL_MAX_SWEEPS: usize = 60;

/// Symmetric tridiagonal matrix: `diag` has length `n`, `offdiag` length `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        let expected = diag.len().saturating_sub(1);
        if offdiag.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Upper bound on the spectral norm, used to scale tolerances.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n() {
            let e2 = if i > 0 {
                self.offdiag[i - 1] * self.offdiag[i - 1]
            } else {
                0.0
            };
            q = self.diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to `tol`.
    pub fn kth_smallest(&self, k: usize, tol: f64) -> f64 {
        debug_assert!(k < self.n());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = tol.max(f64::EPSILON * hi.abs().max(lo.abs()));
        lo -= pad;
        hi += pad;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues, descending, by implicit-shift QL.
    pub fn eigenvalues_ql(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(0.0);
        for l in 0..n {
            let mut sweeps = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() + dd == dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::NoConvergence {
                        index: l,
                        iterations: QL_MAX_SWEEPS,
                    });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| b.total_cmp(a));
        Ok(d)
    }
}

/// Householder reduction of a real symmetric matrix to tridiagonal form.
///
/// Works on the lower triangle of a row-major copy: each step forms
/// `p = A v` with a row-wise symmetric product and applies the rank-2 update
/// `A - 2 (v w^T + w v^T)` with `w = p - (v^T p) v`.
pub fn tridiagonalize(a: &RealMatrix) -> Tridiagonal {
    let n = a.n();
    let mut w = a.as_slice().to_vec();
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let s = k + 1;
        let norm = (s..n).map(|i| w[i * n + k].powi(2)).sum::<f64>().sqrt();
        diag[k] = w[k * n + k];
        if norm == 0.0 {
            offdiag[k] = 0.0;
            continue;
        }
        let x0 = w[s * n + k];
        let alpha = -norm.copysign(x0);
        for i in s..n {
            v[i] = w[i * n + k];
        }
        v[s] -= alpha;
        let vnorm = (s..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            offdiag[k] = x0;
            continue;
        }
        for vi in &mut v[s..n] {
            *vi /= vnorm;
        }
        offdiag[k] = alpha;

        // p = A22 v from the lower triangle only
        p[s..n].iter_mut().for_each(|x| *x = 0.0);
        for i in s..n {
            let row = &w[i * n..i * n + i];
            let vi = v[i];
            let mut acc = w[i * n + i] * vi;
            for j in s..i {
                acc += row[j] * v[j];
                p[j] += row[j] * vi;
            }
            p[i] += acc;
        }
        let kk: f64 = (s..n).map(|i| v[i] * p[i]).sum();
        for i in s..n {
            p[i] -= kk * v[i];
        }
        for i in s..n {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut w[i * n..i * n + i + 1];
            for j in s..=i {
                row[j] -= 2.0 * (vi * p[j] + pi * v[j]);
            }
        }
    }
    if n > 0 {
        diag[n - 1] = w[(n - 1) * n + n - 1];
    }
    Tridiagonal { diag, offdiag }
}
