use std::ops::{AddAssign, Mul, SubAssign};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::tridiagonal::Tridiagonal;
use crate::matrix::{ComplexMatrix, RealMatrix, SelfAdjoint};

/// Fixed seed of the starting vector; the iteration must not consume the
/// replication streams.
const START_SEED: u64 = 0x5EED_1A9C_2050_0001;
/// Consecutive steps with a stationary top Ritz value required to stop.
const STALL_STEPS: usize = 3;
const MIN_STEPS: usize = 12;
const MAX_STEPS: usize = 400;

trait Scalar: Copy + AddAssign + SubAssign + Mul<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn random<R: Rng>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn random<R: Rng>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn random<R: Rng>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * *y;
    }
    s
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue by Lanczos with full reorthogonalization.
///
/// Returns `None` when the top Ritz value has not settled within the step cap;
/// callers then fall back to the dense solver.
pub(super) fn largest_eigenvalue(matrix: &SelfAdjoint) -> Option<f64> {
    match matrix {
        SelfAdjoint::Real(m) => lanczos_top(m.n(), |x: &[f64], y: &mut [f64]| RealMatrix::matvec(m, x, y)),
        SelfAdjoint::Complex(m) => lanczos_top(m.n(), |x: &[Complex64], y: &mut [Complex64]| {
            ComplexMatrix::matvec(m, x, y)
        }),
    }
}

fn lanczos_top<T: Scalar, F: Fn(&[T], &mut [T])>(n: usize, apply: F) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut q: Vec<T> = (0..n).map(|_| T::random(&mut rng)).collect();
    let q_norm = norm(&q);
    q.iter_mut().for_each(|x| *x = *x * (1.0 / q_norm));

    let cap = n.min(MAX_STEPS);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(cap);
    let mut alpha = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![T::zero(); n];
    let mut previous_top = f64::NEG_INFINITY;
    let mut stalled = 0;
    basis.push(q);
    for step in 0..cap {
        apply(&basis[step], &mut w);
        alpha.push(dot(&basis[step], &w).re());
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= *bi * c;
                }
            }
        }
        let b_next = norm(&w);
        let t = Tridiagonal::new(alpha.clone(), beta.clone()).ok()?;
        let scale = t.norm_bound().max(f64::MIN_POSITIVE);
        let top = t.kth_smallest(t.n() - 1, 1e-15 * scale);
        if step + 1 == n || b_next <= 1e-14 * scale {
            return Some(top);
        }
        if step + 1 >= MIN_STEPS && (top - previous_top).abs() <= 1e-14 * scale {
            stalled += 1;
            if stalled >= STALL_STEPS {
                return Some(top);
            }
        } else {
            stalled = 0;
        }
        previous_top = top;
        beta.push(b_next);
        basis.push(w.iter().map(|x| *x * (1.0 / b_next)).collect());
    }
    None
}
