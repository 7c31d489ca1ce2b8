//! Seeded samplers for deformed Wigner matrices `M_N = W_N / sqrt(N) + A_N`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analytic::{DeformationSpec, EntryLaw, Field};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, RealMatrix, SelfAdjoint};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Stafford's variant 13), a bijection on `u64`
/// with full avalanche.
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `master_seed`.
///
/// The master seed is finalized before the index offset is added, so nearby
/// master seeds do not produce shifted copies of each other's streams.
pub fn mix64(master_seed: u64, index: u64) -> u64 {
    let base = splitmix_finalize(master_seed ^ GOLDEN_GAMMA);
    splitmix_finalize(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Generator owned by one replication.
pub fn replication_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(master_seed, index))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub field: Field,
    pub n: usize,
    pub law: EntryLaw,
    pub deformation: Option<DeformationSpec>,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn new(
        field: Field,
        n: usize,
        law: EntryLaw,
        deformation: Option<DeformationSpec>,
        master_seed: u64,
    ) -> Result<Self> {
        let config = Self {
            field,
            n,
            law,
            deformation,
            master_seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("matrix size N must be at least 1".into()));
        }
        if let Some(spec) = &self.deformation {
            spec.validate()?;
            spec.check_rank(self.n)?;
        }
        Ok(())
    }
}

/// One realization of `M_N` together with its undeformed corner entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSample {
    pub matrix: SelfAdjoint,
    /// `(W_N)_11`, i.e. `sqrt(N)` times the undeformed `(1, 1)` entry.
    pub w11: f64,
    pub replication_index: u64,
    pub derived_seed: u64,
}

/// Draws the scaled Wigner matrix and adds the configured deformation.
///
/// Entries are drawn row by row over the upper triangle and mirrored, so the
/// result is exactly self-adjoint and depends only on `(master_seed, index)`.
pub fn sample_wigner(config: &EnsembleConfig, replication_index: u64) -> Result<MatrixSample> {
    config.validate()?;
    let derived_seed = mix64(config.master_seed, replication_index);
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed);
    let n = config.n;
    let sqrt_n = (n as f64).sqrt();
    let (mut matrix, w11) = match config.field {
        Field::Real => {
            let m = wigner_real(&config.law, n, &mut rng);
            let w11 = m[(0, 0)] * sqrt_n;
            (SelfAdjoint::Real(m), w11)
        }
        Field::Complex => {
            let m = wigner_complex(&config.law, n, &mut rng);
            let w11 = m[(0, 0)].re * sqrt_n;
            (SelfAdjoint::Complex(m), w11)
        }
    };
    if let Some(spec) = &config.deformation {
        apply_deformation(&mut matrix, spec)?;
    }
    Ok(MatrixSample {
        matrix,
        w11,
        replication_index,
        derived_seed,
    })
}

fn wigner_real<R: Rng + ?Sized>(law: &EntryLaw, n: usize, rng: &mut R) -> RealMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let diag_scale = std::f64::consts::SQRT_2 * scale;
    let mut m = RealMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = diag_scale * law.sample(rng);
        for j in i + 1..n {
            let x = scale * law.sample(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn wigner_complex<R: Rng + ?Sized>(law: &EntryLaw, n: usize, rng: &mut R) -> ComplexMatrix {
    let diag_scale = 1.0 / (n as f64).sqrt();
    let off_scale = 1.0 / (2.0 * n as f64).sqrt();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(diag_scale * law.sample(rng), 0.0);
        for j in i + 1..n {
            let re = law.sample(rng);
            let im = law.sample(rng);
            let x = Complex64::new(off_scale * re, off_scale * im);
            m[(i, j)] = x;
            m[(j, i)] = x.conj();
        }
    }
    m
}

/// Adds the deformation `A_N` described by `spec` to `matrix` in place.
pub fn apply_deformation(matrix: &mut SelfAdjoint, spec: &DeformationSpec) -> Result<()> {
    let n = matrix.n();
    spec.validate()?;
    spec.check_rank(n)?;
    match spec {
        DeformationSpec::Diagonal { .. } => {
            let d = spec.diagonal_entries(n)?;
            match matrix {
                SelfAdjoint::Real(m) => d.iter().enumerate().for_each(|(i, &x)| m[(i, i)] += x),
                SelfAdjoint::Complex(m) => d.iter().enumerate().for_each(|(i, &x)| m[(i, i)] += x),
            }
        }
        DeformationSpec::Full { theta } => {
            let v = theta / n as f64;
            match matrix {
                SelfAdjoint::Real(m) => (0..n).for_each(|i| (0..n).for_each(|j| m[(i, j)] += v)),
                SelfAdjoint::Complex(m) => (0..n).for_each(|i| (0..n).for_each(|j| m[(i, j)] += v)),
            }
        }
        DeformationSpec::Rotated { rotation_seed, .. } => {
            let d = spec.diagonal_entries(n)?;
            let support: Vec<(usize, f64)> = d
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, x)| x != 0.0)
                .collect();
            let r = support.len();
            let mut rng = ChaCha8Rng::seed_from_u64(*rotation_seed);
            match matrix {
                SelfAdjoint::Real(m) => {
                    let reflectors: Vec<Vec<f64>> =
                        (0..r).map(|_| unit_vector_real(n, &mut rng)).collect();
                    for &(p, theta) in &support {
                        let q = rotate_basis_real(&reflectors, n, p);
                        add_rank_one_real(m, &q, theta);
                    }
                }
                SelfAdjoint::Complex(m) => {
                    let reflectors: Vec<Vec<Complex64>> =
                        (0..r).map(|_| unit_vector_complex(n, &mut rng)).collect();
                    for &(p, theta) in &support {
                        let q = rotate_basis_complex(&reflectors, n, p);
                        add_rank_one_complex(m, &q, theta);
                    }
                }
            }
        }
    }
    Ok(())
}

fn unit_vector_real<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn unit_vector_complex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Column `p` of `H_1 H_2 ... H_r` with `H_k = I - 2 v_k v_k^T`.
fn rotate_basis_real(reflectors: &[Vec<f64>], n: usize, p: usize) -> Vec<f64> {
    let mut q = vec![0.0; n];
    q[p] = 1.0;
    for v in reflectors.iter().rev() {
        let dot: f64 = v.iter().zip(&q).map(|(a, b)| a * b).sum();
        q.iter_mut().zip(v).for_each(|(qi, vi)| *qi -= 2.0 * dot * vi);
    }
    q
}

/// Column `p` of `H_1 H_2 ... H_r` with `H_k = I - 2 v_k v_k^*`.
fn rotate_basis_complex(reflectors: &[Vec<Complex64>], n: usize, p: usize) -> Vec<Complex64> {
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    q[p] = Complex64::new(1.0, 0.0);
    for v in reflectors.iter().rev() {
        let dot: Complex64 = v.iter().zip(&q).map(|(a, b)| a.conj() * b).sum();
        q.iter_mut().zip(v).for_each(|(qi, vi)| *qi -= 2.0 * dot * vi);
    }
    q
}

fn add_rank_one_real(m: &mut RealMatrix, q: &[f64], theta: f64) {
    let n = q.len();
    for i in 0..n {
        m[(i, i)] += theta * q[i] * q[i];
        for j in i + 1..n {
            let x = theta * q[i] * q[j];
            m[(i, j)] += x;
            m[(j, i)] += x;
        }
    }
}

fn add_rank_one_complex(m: &mut ComplexMatrix, q: &[Complex64], theta: f64) {
    let n = q.len();
    for i in 0..n {
        m[(i, i)] += theta * q[i].norm_sqr();
        for j in i + 1..n {
            let x = theta * q[i] * q[j].conj();
            m[(i, j)] += x;
            m[(j, i)] += x.conj();
        }
    }
}

/// A real or complex vector, matching the field of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "values", rename_all = "lowercase")]
pub enum FieldVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl FieldVector {
    pub fn len(&self) -> usize {
        match self {
            FieldVector::Real(v) => v.len(),
            FieldVector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Vector of i.i.d. entries with mean 0 and `E|y|^2 = 1`.
///
/// Complex entries are `(xi_1 + i xi_2)/sqrt 2`, so that `E y^2 = 0`.
pub fn sample_standardized_vector(law: &EntryLaw, n: usize, field: Field, seed: u64) -> FieldVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    standardized_vector_with(law, n, field, &mut rng)
}

pub fn standardized_vector_with<R: Rng + ?Sized>(
    law: &EntryLaw,
    n: usize,
    field: Field,
    rng: &mut R,
) -> FieldVector {
    let inv_sigma = 1.0 / law.sigma();
    match field {
        Field::Real => FieldVector::Real((0..n).map(|_| law.sample(rng) * inv_sigma).collect()),
        Field::Complex => {
            let s = inv_sigma / std::f64::consts::SQRT_2;
            FieldVector::Complex(
                (0..n)
                    .map(|_| {
                        let re = law.sample(rng);
                        let im = law.sample(rng);
                        Complex64::new(re * s, im * s)
                    })
                    .collect(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> EntryLaw {
        EntryLaw::gaussian(1.0).unwrap()
    }

    #[test]
    fn one_by_one_real_matrix_is_scaled_diagonal() {
        let cfg = EnsembleConfig::new(Field::Real, 1, gaussian(), None, 5).unwrap();
        let s = sample_wigner(&cfg, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(s.derived_seed);
        let xi = gaussian().sample(&mut rng);
        let SelfAdjoint::Real(m) = &s.matrix else {
            panic!("expected a real matrix")
        };
        assert_eq!(m[(0, 0)], std::f64::consts::SQRT_2 * xi);
        assert_eq!(s.w11, std::f64::consts::SQRT_2 * xi);
    }

    #[test]
    fn sampling_is_deterministic_and_self_adjoint() {
        for field in [Field::Real, Field::Complex] {
            let cfg = EnsembleConfig::new(field, 30, gaussian(), None, 11).unwrap();
            let a = sample_wigner(&cfg, 3).unwrap();
            let b = sample_wigner(&cfg, 3).unwrap();
            assert_eq!(a, b);
            assert!(a.matrix.is_self_adjoint());
            assert_ne!(a.matrix, sample_wigner(&cfg, 4).unwrap().matrix);
        }
    }

    #[test]
    fn mix64_spreads_neighbouring_inputs() {
        let a = mix64(1, 0);
        assert_ne!(a, mix64(1, 1));
        assert_ne!(a, mix64(2, 0));
        // roughly half the bits flip between neighbouring indices
        let flips = (mix64(7, 100) ^ mix64(7, 101)).count_ones();
        assert!((16..=48).contains(&flips));
    }

    #[test]
    fn deformation_forms() {
        let mut x = SelfAdjoint::Real(RealMatrix::zeros(3));
        apply_deformation(&mut x, &DeformationSpec::diagonal(&[(2.0, 1)]).unwrap()).unwrap();
        assert_eq!(x, SelfAdjoint::Real(RealMatrix::from_diagonal(&[2.0, 0.0, 0.0])));

        let mut x = SelfAdjoint::Real(RealMatrix::zeros(3));
        apply_deformation(&mut x, &DeformationSpec::full(3.0).unwrap()).unwrap();
        let SelfAdjoint::Real(m) = &x else { unreachable!() };
        assert!(m.as_slice().iter().all(|&v| v == 1.0));

        let mut x = SelfAdjoint::Real(RealMatrix::zeros(2));
        let too_big = DeformationSpec::diagonal(&[(2.0, 3)]).unwrap();
        assert!(apply_deformation(&mut x, &too_big).is_err());
    }

    #[test]
    fn rotated_deformation_preserves_trace_and_frobenius() {
        let spec = DeformationSpec::rotated(&[(2.0, 1), (-1.5, 2)], 9).unwrap();
        for field in [Field::Real, Field::Complex] {
            let mut x = match field {
                Field::Real => SelfAdjoint::Real(RealMatrix::zeros(12)),
                Field::Complex => SelfAdjoint::Complex(ComplexMatrix::zeros(12)),
            };
            apply_deformation(&mut x, &spec).unwrap();
            assert!((x.trace() - (2.0 - 3.0)).abs() < 1e-12);
            assert!((x.frobenius_sq() - (4.0 + 2.0 * 2.25)).abs() < 1e-12);
            assert!(x.is_self_adjoint());
        }
    }

    #[test]
    fn standardized_vectors() {
        let rad = EntryLaw::rademacher(2.0).unwrap();
        let FieldVector::Real(v) = sample_standardized_vector(&rad, 100, Field::Real, 1) else {
            panic!("expected a real vector")
        };
        assert!(v.iter().all(|&x| x == 1.0 || x == -1.0));
        let c = sample_standardized_vector(&gaussian(), 10, Field::Complex, 1);
        assert_eq!(c.len(), 10);
    }
}
