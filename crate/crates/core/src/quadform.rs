//! Centered quadratic forms `(Y* B Y - Tr B)/sqrt(N)` with structured test matrices.
//!
//! The test matrices are diagonal or symmetric circulant, so the limits
//! `a1^2 = lim (1/N) sum b_ii^2` and `a2 = lim (1/N) Tr B^2` are exact at
//! every size and no dense product is ever formed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{EntryLaw, Field};
use crate::ensemble::{replication_rng, standardized_vector_with, FieldVector};
use crate::error::{Error, Result};
use crate::matrix::SelfAdjoint;
use crate::stats::{compensated_sum, ks_verdict, normal_cdf, summarize, Direction, EmpiricalSample, TestVerdict};

/// Smallest replication count accepted by the Monte Carlo routines.
pub const MIN_REPS: usize = 1000;

/// Diagonal symbol `f(u) = u^exponent` on (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSymbol {
    pub exponent: f64,
}

impl PowerSymbol {
    pub fn eval(&self, u: f64) -> f64 {
        u.powf(self.exponent)
    }

    /// `int_0^1 f(u)^2 du`.
    pub fn square_integral(&self) -> f64 {
        1.0 / (2.0 * self.exponent + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixKind {
    Identity,
    /// `b_ii = f(i/N)`.
    Diagonal { symbol: PowerSymbol },
    /// Symmetric circulant with `B_ij = c_d`, `d = min(|i-j|, N-|i-j|)`, and
    /// zero beyond the listed coefficients `c_0..c_m`.
    Circulant { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadFormSpec {
    pub matrix: MatrixKind,
    pub n: usize,
    pub law: EntryLaw,
    pub field: Field,
}

impl QuadFormSpec {
    pub fn new(matrix: MatrixKind, n: usize, law: EntryLaw, field: Field) -> Result<Self> {
        let spec = Self { matrix, n, law, field };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.matrix.clone(), n, self.law.clone(), self.field)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("quadratic form needs N >= 1".into()));
        }
        match &self.matrix {
            MatrixKind::Identity => {}
            MatrixKind::Diagonal { symbol } => {
                if !(symbol.exponent >= 0.0 && symbol.exponent.is_finite()) {
                    return Err(Error::Config(format!(
                        "symbol exponent must be finite and >= 0 for a bounded matrix, got {}",
                        symbol.exponent
                    )));
                }
            }
            MatrixKind::Circulant { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config("circulant needs finite coefficients c_0..c_m".into()));
                }
                let m = coeffs.len() - 1;
                if 2 * m >= self.n {
                    return Err(Error::Config(format!(
                        "circulant bandwidth {m} needs N > {}, got {}",
                        2 * m,
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// `lim (1/N) sum b_ii^2`.
    pub fn a1_sq(&self) -> f64 {
        match &self.matrix {
            MatrixKind::Identity => 1.0,
            MatrixKind::Diagonal { symbol } => symbol.square_integral(),
            MatrixKind::Circulant { coeffs } => coeffs[0] * coeffs[0],
        }
    }

    /// `lim (1/N) Tr B^2`.
    pub fn a2(&self) -> f64 {
        match &self.matrix {
            MatrixKind::Identity => 1.0,
            MatrixKind::Diagonal { symbol } => symbol.square_integral(),
            MatrixKind::Circulant { coeffs } => circulant_row_energy(coeffs),
        }
    }

    /// `t = 4` for real and `2` for complex entries.
    pub fn t(&self) -> f64 {
        self.field.t()
    }

    /// `E|y|^4` of one standardized entry.
    pub fn abs4_moment(&self) -> f64 {
        let m4 = self.law.m4() / self.law.sigma().powi(4);
        match self.field {
            Field::Real => m4,
            // |y|^4 = (xi_1^2 + xi_2^2)^2 / 4 with independent standardized xi
            Field::Complex => 0.5 * (m4 + 1.0),
        }
    }

    /// `Tr B` at size `N`.
    pub fn trace(&self) -> f64 {
        match &self.matrix {
            MatrixKind::Identity => self.n as f64,
            MatrixKind::Diagonal { symbol } => compensated_sum(self.diagonal_entries(symbol)),
            MatrixKind::Circulant { coeffs } => self.n as f64 * coeffs[0],
        }
    }

    /// `Tr(B B*)` at size `N`, from the coefficients.
    pub fn trace_sq(&self) -> f64 {
        match &self.matrix {
            MatrixKind::Identity => self.n as f64,
            MatrixKind::Diagonal { symbol } => {
                compensated_sum(self.diagonal_entries(symbol).map(|b| b * b))
            }
            MatrixKind::Circulant { coeffs } => self.n as f64 * circulant_row_energy(coeffs),
        }
    }

    fn diagonal_entries<'a>(&'a self, symbol: &'a PowerSymbol) -> impl Iterator<Item = f64> + 'a {
        let n = self.n as f64;
        (1..=self.n).map(move |i| symbol.eval(i as f64 / n))
    }

    /// `Y* B Y` evaluated from the structure of `B`.
    pub fn form(&self, y: &FieldVector) -> Result<f64> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        let abs2: Vec<f64> = match y {
            FieldVector::Real(v) => v.iter().map(|x| x * x).collect(),
            FieldVector::Complex(v) => v.iter().map(|x| x.norm_sqr()).collect(),
        };
        Ok(match &self.matrix {
            MatrixKind::Identity => compensated_sum(abs2),
            MatrixKind::Diagonal { symbol } => {
                compensated_sum(self.diagonal_entries(symbol).zip(abs2).map(|(b, a)| b * a))
            }
            MatrixKind::Circulant { coeffs } => {
                let n = self.n;
                let mut total = coeffs[0] * compensated_sum(abs2);
                for (d, &c) in coeffs.iter().enumerate().skip(1) {
                    if c == 0.0 {
                        continue;
                    }
                    // sum_i conj(y_i) y_{i+d} + conj(y_i) y_{i-d} = 2 Re sum_i conj(y_i) y_{i+d}
                    let lag = match y {
                        FieldVector::Real(v) => compensated_sum((0..n).map(|i| v[i] * v[(i + d) % n])),
                        FieldVector::Complex(v) => {
                            compensated_sum((0..n).map(|i| (v[i].conj() * v[(i + d) % n]).re))
                        }
                    };
                    total += 2.0 * c * lag;
                }
                total
            }
        })
    }
}

/// `c_0^2 + 2 sum_{k >= 1} c_k^2`: squared norm of one full circulant row.
fn circulant_row_energy(coeffs: &[f64]) -> f64 {
    coeffs[0] * coeffs[0] + 2.0 * coeffs[1..].iter().map(|c| c * c).sum::<f64>()
}

/// Limiting variance `(E|y|^4 - 1 - t/2) a1^2 + (t/2) a2` and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltVariancePrediction {
    pub v_sq: f64,
    pub a1_sq: f64,
    pub a2: f64,
    pub abs4_moment: f64,
    pub t: f64,
}

pub fn clt_variance(spec: &QuadFormSpec) -> Result<CltVariancePrediction> {
    spec.validate()?;
    let a1_sq = spec.a1_sq();
    let a2 = spec.a2();
    let t = spec.t();
    let abs4_moment = spec.abs4_moment();
    let v_sq = (abs4_moment - 1.0 - t / 2.0) * a1_sq + t / 2.0 * a2;
    // round-off around an exact zero is tolerated, genuine negatives are not
    if v_sq < -1e-12 {
        return Err(Error::Config(format!("predicted variance {v_sq} is negative")));
    }
    Ok(CltVariancePrediction {
        v_sq: v_sq.max(0.0),
        a1_sq,
        a2,
        abs4_moment,
        t,
    })
}

/// `(Y* B Y - Tr B)/sqrt(N)` for a dense self-adjoint `B`.
pub fn quadform_stat(y: &FieldVector, b: &SelfAdjoint) -> Result<f64> {
    let n = b.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let form = match (y, b) {
        (FieldVector::Real(v), SelfAdjoint::Real(m)) => {
            let mut by = vec![0.0; n];
            m.matvec(v, &mut by);
            compensated_sum(v.iter().zip(&by).map(|(a, b)| a * b))
        }
        (FieldVector::Real(v), SelfAdjoint::Complex(m)) => {
            let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            hermitian_form(&vc, m)
        }
        (FieldVector::Complex(v), SelfAdjoint::Complex(m)) => hermitian_form(v, m),
        (FieldVector::Complex(v), SelfAdjoint::Real(m)) => {
            let mc = crate::matrix::ComplexMatrix::from_fn(n, |i, j| Complex64::new(m[(i, j)], 0.0));
            hermitian_form(v, &mc)
        }
    };
    Ok((form - b.trace()) / (n as f64).sqrt())
}

fn hermitian_form(v: &[Complex64], m: &crate::matrix::ComplexMatrix) -> f64 {
    let mut by = vec![Complex64::new(0.0, 0.0); v.len()];
    m.matvec(v, &mut by);
    // Y* B Y is real for Hermitian B; the imaginary part is round-off
    compensated_sum(v.iter().zip(&by).map(|(a, b)| (a.conj() * b).re))
}

/// Structured counterpart of [`quadform_stat`].
pub fn quadform_stat_structured(y: &FieldVector, spec: &QuadFormSpec) -> Result<f64> {
    Ok((spec.form(y)? - spec.trace()) / (spec.n as f64).sqrt())
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::Config(format!(
            "quadratic-form Monte Carlo needs at least {MIN_REPS} replications, got {reps}"
        )));
    }
    Ok(())
}

/// Replicated values of the centered quadratic form, in replication order.
pub fn sample_quadform(spec: &QuadFormSpec, reps: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(seed, r);
            let y = standardized_vector_with(&spec.law, spec.n, spec.field, &mut rng);
            quadform_stat_structured(&y, spec)
        })
        .collect()
}

/// Monte Carlo summary of the quadratic-form CLT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadFormMc {
    pub prediction: CltVariancePrediction,
    pub sample_variance: f64,
    pub sample_mean: f64,
    /// KS test against `N(0, v^2)`; absent when the predicted variance is zero.
    pub ks_vs_gaussian: Option<TestVerdict>,
    pub values: Vec<f64>,
}

pub fn mc_quadform(spec: &QuadFormSpec, reps: usize, seed: u64, ks_threshold: f64) -> Result<QuadFormMc> {
    check_reps(reps)?;
    let prediction = clt_variance(spec)?;
    let values = sample_quadform(spec, reps, seed)?;
    let summary = summarize(&values)?;
    let ks_vs_gaussian = if prediction.v_sq > 0.0 {
        let sd = prediction.v_sq.sqrt();
        let sample = EmpiricalSample::new(values.clone())?;
        Some(ks_verdict(
            "ks_vs_gaussian",
            &sample,
            |x| normal_cdf(x / sd),
            ks_threshold,
            Direction::AtMost,
        ))
    } else {
        None
    };
    Ok(QuadFormMc {
        prediction,
        sample_variance: summary.variance,
        sample_mean: summary.mean,
        ks_vs_gaussian,
        values,
    })
}

/// Monte Carlo estimate of `E|Y* B Y - Tr B|^2 / Tr(B B*)`.
pub fn bai_silverstein_ratio(spec: &QuadFormSpec, reps: usize, seed: u64) -> Result<f64> {
    check_reps(reps)?;
    let values = sample_quadform(spec, reps, seed)?;
    let n = spec.n as f64;
    // values carry a 1/sqrt(N) factor
    let second = compensated_sum(values.iter().map(|v| v * v * n)) / reps as f64;
    Ok(second / spec.trace_sq())
}
