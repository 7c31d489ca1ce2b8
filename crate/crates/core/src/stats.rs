//! Empirical distributions, goodness-of-fit statistics and summaries.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::analytic::semicircle_cdf;
use crate::error::{Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Neumaier-compensated sum; the result depends only on the input order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sorted, finite, non-empty sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empirical sample is empty".into()));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample value {x}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of sample values `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Left-continuous quantile `x_(ceil(n u))` for `u` in (0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.len();
        let k = ((n as f64 * u).ceil() as usize).clamp(1, n);
        self.values[k - 1]
    }
}

/// Kolmogorov–Smirnov distance between the sample and `cdf`.
pub fn ks_stat<F: Fn(f64) -> f64>(sample: &EmpiricalSample, cdf: F) -> f64 {
    let n = sample.len() as f64;
    sample
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let upper = (i + 1) as f64 / n - f;
            let lower = f - i as f64 / n;
            upper.max(lower)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Asymptotic Kolmogorov p-value `2 sum (-1)^(k-1) exp(-2 k^2 n d^2)`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let lambda2 = n as f64 * d * d;
    // P(K > 0.3) exceeds 1 - 1e-6; the alternating series converges slowly there.
    if lambda2 < 0.09 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda2).exp();
        p += if k as usize % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// Quantile of the semicircle law by bisection on its distribution function.
pub fn semicircle_quantile(p: f64, sigma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    let mut lo = -2.0 * sigma;
    let mut hi = 2.0 * sigma;
    semicircle_cdf(0.0, sigma)?;
    while hi - lo > 1e-13 * sigma {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid, sigma)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Wasserstein-1 distance to the semicircle, `(1/n) sum |x_(i) - q((i - 1/2)/n)|`.
pub fn wasserstein1_semicircle(sample: &EmpiricalSample, sigma: f64) -> Result<f64> {
    wasserstein1_semicircle_on_grid(sample, sigma, sample.len())
}

/// Midpoint-quantile Wasserstein-1 estimate on an `m`-point grid `(k - 1/2)/m`.
///
/// With `m = n` this is the usual order-statistic formula. Evaluating two
/// samples on the same grid makes the estimate invariant under duplicating
/// every sample point.
pub fn wasserstein1_semicircle_on_grid(
    sample: &EmpiricalSample,
    sigma: f64,
    m: usize,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("quantile grid must be non-empty".into()));
    }
    let n = sample.len();
    let terms = (1..=m)
        .map(|k| {
            let u = (k as f64 - 0.5) / m as f64;
            // ceil(n (2k - 1) / (2m)) in exact integer arithmetic
            let idx = (n * (2 * k - 1)).div_ceil(2 * m);
            let x = sample.values()[idx.clamp(1, n) - 1];
            semicircle_quantile(u, sigma).map(|q| (x - q).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms) / m as f64)
}

/// Least-squares slope of `ln err` against `ln n`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, e)) = points.iter().find(|(n, e)| !(*n > 0.0 && *e > 0.0)) {
        return Err(Error::Domain(format!("non-positive point ({n}, {e})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("slope fit needs distinct sizes".into()));
    }
    Ok(sxy / sxx)
}

/// Moment summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Zero when the variance vanishes.
    pub skewness: f64,
    /// Zero when the variance vanishes.
    pub excess_kurtosis: f64,
    pub se_mean: f64,
    /// `s^2 sqrt(2/(n-1))`, accurate for near-normal data.
    pub se_variance: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Domain(format!("summary needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let mean = compensated_sum(values.iter().copied()) / nf;
    let m2 = compensated_sum(values.iter().map(|x| (x - mean).powi(2))) / nf;
    let m3 = compensated_sum(values.iter().map(|x| (x - mean).powi(3))) / nf;
    let m4 = compensated_sum(values.iter().map(|x| (x - mean).powi(4))) / nf;
    let variance = m2 * nf / (nf - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Summary {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
        se_mean: (variance / nf).sqrt(),
        se_variance: variance * (2.0 / (nf - 1.0)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Passes when `statistic <= threshold`.
    AtMost,
    /// Passes when `statistic >= threshold`.
    AtLeast,
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub direction: Direction,
    pub pass: bool,
}

impl TestVerdict {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, direction: Direction) -> Self {
        let pass = match direction {
            Direction::AtMost => statistic <= threshold,
            Direction::AtLeast => statistic >= threshold,
        };
        Self {
            name: name.into(),
            statistic,
            p_value: None,
            threshold,
            direction,
            pass,
        }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, threshold, Direction::AtMost)
    }

    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, threshold, Direction::AtLeast)
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }
}

/// KS verdict against `cdf`, with the asymptotic p-value attached for `n >= 100`.
pub fn ks_verdict<F: Fn(f64) -> f64>(
    name: impl Into<String>,
    sample: &EmpiricalSample,
    cdf: F,
    threshold: f64,
    direction: Direction,
) -> TestVerdict {
    let d = ks_stat(sample, cdf);
    let v = TestVerdict::new(name, d, threshold, direction);
    if sample.len() >= 100 {
        v.with_p_value(ks_pvalue(d, sample.len()))
    } else {
        v
    }
}
