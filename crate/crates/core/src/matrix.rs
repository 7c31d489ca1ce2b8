//! Dense square matrices stored row-major.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RealMatrix = DenseMatrix<f64>;
pub type ComplexMatrix = DenseMatrix<Complex64>;

impl<T: Copy + Default> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::default(); n * n],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl RealMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Exact (bitwise) symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.n)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl ComplexMatrix {
    /// Exact (bitwise) Hermitian symmetry, with a real diagonal.
    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)].re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.n)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// A real symmetric or complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "matrix", rename_all = "lowercase")]
pub enum SelfAdjoint {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

impl SelfAdjoint {
    pub fn n(&self) -> usize {
        match self {
            SelfAdjoint::Real(m) => m.n(),
            SelfAdjoint::Complex(m) => m.n(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            SelfAdjoint::Real(m) => m.trace(),
            SelfAdjoint::Complex(m) => m.trace(),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        match self {
            SelfAdjoint::Real(m) => m.frobenius_sq(),
            SelfAdjoint::Complex(m) => m.frobenius_sq(),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        match self {
            SelfAdjoint::Real(m) => m.is_symmetric(),
            SelfAdjoint::Complex(m) => m.is_hermitian(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let m = RealMatrix::from_row_major(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.trace(), 5.0);
        assert!(!m.is_symmetric());
        assert!(RealMatrix::from_row_major(2, vec![1.0]).is_err());
    }

    #[test]
    fn hermitian_check() {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let m = ComplexMatrix::from_row_major(2, vec![z, i, -i, z]).unwrap();
        assert!(m.is_hermitian());
        let bad = ComplexMatrix::from_row_major(2, vec![i, z, z, z]).unwrap();
        assert!(!bad.is_hermitian());
        assert_eq!(m.frobenius_sq(), 2.0);
    }
}
