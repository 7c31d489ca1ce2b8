//! Closed-form semicircle and spike calculus.
//!
//! Everything here is a pure function of its arguments. Complex arguments use
//! [`Complex64`]; real evaluations outside the bulk go through the same code
//! with a zero imaginary part.

mod deformation;
mod law;
mod target;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::semicircle_expectation;

pub use deformation::{DeformationSpec, Spike};
pub use law::{EntryLaw, Field, LawKind};
pub use target::FluctuationTarget;

/// Absolute tolerance used for semicircle quadratures.
pub const QUADRATURE_TOL: f64 = 1e-12;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be positive, got {sigma}")))
    }
}

/// Density of the semicircle law of variance `sigma^2`.
pub fn semicircle_pdf(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let r2 = 4.0 * sigma * sigma - x * x;
    if r2 <= 0.0 {
        return Ok(0.0);
    }
    Ok(r2.sqrt() / (2.0 * PI * sigma * sigma))
}

/// Distribution function of the semicircle law, in closed form.
pub fn semicircle_cdf(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let edge = 2.0 * sigma;
    if x <= -edge {
        return Ok(0.0);
    }
    if x >= edge {
        return Ok(1.0);
    }
    let s2 = sigma * sigma;
    let v = 0.5 + x * (4.0 * s2 - x * x).sqrt() / (4.0 * PI * s2) + (x / edge).asin() / PI;
    Ok(v.clamp(0.0, 1.0))
}

/// Stieltjes transform of the semicircle law.
///
/// Returns the root of `sigma^2 g^2 - z g + 1 = 0` with `Im g * Im z < 0`,
/// or the real branch that decays like `1/x` for real `|x| > 2 sigma`.
pub fn g_sc(z: Complex64, sigma: f64) -> Result<Complex64> {
    check_sigma(sigma)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite z = {z}")));
    }
    if z.im == 0.0 && z.re.abs() <= 2.0 * sigma {
        return Err(Error::Domain(format!(
            "real z = {} lies in the bulk [-2 sigma, 2 sigma]",
            z.re
        )));
    }
    let two_sigma = 2.0 * sigma;
    // sqrt(z - 2s) sqrt(z + 2s) has its cut on the bulk and behaves like z at infinity.
    let s = (z - two_sigma).sqrt() * (z + two_sigma).sqrt();
    // (z - s) / (2 sigma^2) rewritten to avoid cancellation for large |z|.
    Ok(2.0 / (z + s))
}

/// Real-axis evaluation of [`g_sc`] for `|x| > 2 sigma`.
pub fn g_sc_real(x: f64, sigma: f64) -> Result<f64> {
    g_sc(Complex64::new(x, 0.0), sigma).map(|g| g.re)
}

/// Derivative of the Stieltjes transform, `g' = g / (2 sigma^2 g - z)`.
pub fn g_sc_derivative(z: Complex64, sigma: f64) -> Result<Complex64> {
    let g = g_sc(z, sigma)?;
    Ok(g / (2.0 * sigma * sigma * g - z))
}

/// Functional inverse of `g_sc` on its image: `1/g + sigma^2 g`.
pub fn z_sigma(g: Complex64, sigma: f64) -> Result<Complex64> {
    check_sigma(sigma)?;
    if g == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("z_sigma is undefined at g = 0".into()));
    }
    Ok(g.inv() + sigma * sigma * g)
}

fn check_outlier_regime(theta: f64, sigma: f64) -> Result<()> {
    check_sigma(sigma)?;
    if theta.abs() > sigma {
        Ok(())
    } else {
        Err(Error::OutsideOutlierRegime { theta, sigma })
    }
}

/// Outlier location `theta + sigma^2 / theta` for a super-critical spike.
pub fn rho(theta: f64, sigma: f64) -> Result<f64> {
    check_outlier_regime(theta, sigma)?;
    Ok(theta + sigma * sigma / theta)
}

/// Gaussian fluctuation scale `sigma sqrt(1 - sigma^2/theta^2)`.
pub fn sigma_theta(theta: f64, sigma: f64) -> Result<f64> {
    check_outlier_regime(theta, sigma)?;
    Ok(sigma * (1.0 - sigma * sigma / (theta * theta)).sqrt())
}

/// Variance of the Gaussian component of the largest-eigenvalue limit law.
pub fn v_theta(law: &EntryLaw, theta: f64, field: Field) -> Result<f64> {
    let sigma = law.sigma();
    check_outlier_regime(theta, sigma)?;
    let t = field.t();
    let th2 = theta * theta;
    let s4 = sigma.powi(4);
    Ok(t / 4.0 * (law.m4() - 3.0 * s4) / th2 + t / 2.0 * s4 / (th2 - sigma * sigma))
}

/// Closed interval on the real line; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo.partial_cmp(&self.hi) != Some(std::cmp::Ordering::Less)
    }
}

/// Limiting support of the spectrum: the bulk plus isolated outlier points,
/// each widened by `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub bottom_outliers: Vec<f64>,
    pub bulk: Interval,
    pub top_outliers: Vec<f64>,
    pub epsilon: f64,
}

impl SupportSet {
    /// Components in increasing order, enlarged by `epsilon`.
    pub fn components(&self) -> Vec<Interval> {
        let e = self.epsilon;
        let mut out: Vec<Interval> = self
            .bottom_outliers
            .iter()
            .map(|&x| Interval::new(x - e, x + e))
            .collect();
        out.push(Interval::new(self.bulk.lo - e, self.bulk.hi + e));
        out.extend(self.top_outliers.iter().map(|&x| Interval::new(x - e, x + e)));
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        self.components().iter().any(|c| c.lo <= x && x <= c.hi)
    }

    pub fn intersects(&self, interval: &Interval) -> bool {
        self.components().iter().any(|c| c.intersects(interval))
    }

    /// Open intervals of the complement, including the two unbounded tails.
    ///
    /// Fails when `epsilon` is so large that neighbouring components touch,
    /// since the union is then not made of non-empty disjoint intervals.
    pub fn forbidden_gaps(&self) -> Result<Vec<Interval>> {
        let comps = self.components();
        let mut gaps = Vec::with_capacity(comps.len() + 1);
        gaps.push(Interval::new(f64::NEG_INFINITY, comps[0].lo));
        for w in comps.windows(2) {
            let gap = Interval::new(w[0].hi, w[1].lo);
            if gap.is_empty() {
                return Err(Error::Config(format!(
                    "epsilon = {} is too large: components around {} and {} overlap",
                    self.epsilon, w[0].hi, w[1].lo
                )));
            }
            gaps.push(gap);
        }
        gaps.push(Interval::new(comps[comps.len() - 1].hi, f64::INFINITY));
        Ok(gaps)
    }
}

/// Support of the limiting spectral configuration, widened by `epsilon`.
pub fn support_set(spec: &DeformationSpec, sigma: f64, epsilon: f64) -> Result<SupportSet> {
    check_sigma(sigma)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut bottom = Vec::new();
    let mut top = Vec::new();
    for s in spec.spikes() {
        if s.theta > sigma {
            top.push(rho(s.theta, sigma)?);
        } else if s.theta < -sigma {
            bottom.push(rho(s.theta, sigma)?);
        }
    }
    bottom.sort_by(f64::total_cmp);
    top.sort_by(f64::total_cmp);
    Ok(SupportSet {
        bottom_outliers: bottom,
        bulk: Interval::new(-2.0 * sigma, 2.0 * sigma),
        top_outliers: top,
        epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    TopOutlier,
    TopEdge,
    BottomEdge,
    BottomOutlier,
}

/// One-based inclusive range of eigenvalue indices (descending order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub first: usize,
    pub last: usize,
}

impl IndexRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEntry {
    pub indices: IndexRange,
    pub limit: f64,
    pub kind: LimitKind,
}

/// Almost-sure limits of the extreme eigenvalues, by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikePrediction {
    pub entries: Vec<LimitEntry>,
    /// Spikes sitting exactly at `|theta| = sigma`; they produce no outlier.
    pub threshold_spikes: Vec<f64>,
}

impl SpikePrediction {
    pub fn limit_at(&self, index: usize) -> Option<&LimitEntry> {
        self.entries
            .iter()
            .find(|e| e.indices.first <= index && index <= e.indices.last)
    }
}

/// Index-level limits of the spectrum of an `n x n` deformed matrix.
///
/// Top outliers occupy indices `1..=T` with `T` the number of spikes above
/// `sigma` (with multiplicity), index `T + 1` tends to `2 sigma`. At the bottom
/// the zero block of the deformation counts `n - r` indices, so the bottom
/// outliers take the last `B` indices and index `n - B` tends to `-2 sigma`.
pub fn predict_limits(spec: &DeformationSpec, sigma: f64, n: usize) -> Result<SpikePrediction> {
    check_sigma(sigma)?;
    spec.check_rank(n)?;
    let spikes = spec.spikes();
    let mut entries = Vec::new();
    let mut threshold_spikes = Vec::new();

    let mut next = 1;
    for s in spikes.iter().filter(|s| s.theta > sigma) {
        entries.push(LimitEntry {
            indices: IndexRange {
                first: next,
                last: next + s.multiplicity - 1,
            },
            limit: rho(s.theta, sigma)?,
            kind: LimitKind::TopOutlier,
        });
        next += s.multiplicity;
    }
    let top_edge = next;
    if top_edge <= n {
        entries.push(LimitEntry {
            indices: IndexRange {
                first: top_edge,
                last: top_edge,
            },
            limit: 2.0 * sigma,
            kind: LimitKind::TopEdge,
        });
    }

    let bottom_count: usize = spikes
        .iter()
        .filter(|s| s.theta < -sigma)
        .map(|s| s.multiplicity)
        .sum();
    let bottom_edge = n - bottom_count;
    if bottom_edge > top_edge {
        entries.push(LimitEntry {
            indices: IndexRange {
                first: bottom_edge,
                last: bottom_edge,
            },
            limit: -2.0 * sigma,
            kind: LimitKind::BottomEdge,
        });
    }
    let mut next = bottom_edge + 1;
    for s in spikes.iter().filter(|s| s.theta < -sigma) {
        entries.push(LimitEntry {
            indices: IndexRange {
                first: next,
                last: next + s.multiplicity - 1,
            },
            limit: rho(s.theta, sigma)?,
            kind: LimitKind::BottomOutlier,
        });
        next += s.multiplicity;
    }

    for s in &spikes {
        if s.theta.abs() == sigma {
            threshold_spikes.push(s.theta);
        }
    }
    Ok(SpikePrediction {
        entries,
        threshold_spikes,
    })
}

/// Index split guaranteed by exact separation for an interval in a forbidden gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationPlan {
    /// Number of eigenvalues of the deformation strictly above `b_prime`.
    pub i_n: usize,
    pub a_prime: f64,
    pub b_prime: f64,
}

/// Maps `[a, b]` outside the limiting support to the interval
/// `[1/g(a), 1/g(b)]` of the deformation's spectral axis and counts the
/// deformation eigenvalues above it.
pub fn separation_plan(
    a: f64,
    b: f64,
    spec: &DeformationSpec,
    sigma: f64,
    n: usize,
) -> Result<SeparationPlan> {
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Domain(format!("need a < b, got [{a}, {b}]")));
    }
    spec.check_rank(n)?;
    let support = support_set(spec, sigma, 0.0)?;
    if support.intersects(&Interval::new(a, b)) {
        return Err(Error::IntervalInsideSupport { a, b });
    }
    let a_prime = 1.0 / g_sc_real(a, sigma)?;
    let b_prime = 1.0 / g_sc_real(b, sigma)?;
    let i_n = count_split(a_prime, b_prime, spec, n)?;
    Ok(SeparationPlan {
        i_n,
        a_prime,
        b_prime,
    })
}

/// Number of deformation eigenvalues (zeros included) strictly above
/// `b_prime`, after checking that none falls inside `[a_prime, b_prime]`.
pub fn count_split(a_prime: f64, b_prime: f64, spec: &DeformationSpec, n: usize) -> Result<usize> {
    let eigs = spec.diagonal_entries(n)?;
    if let Some(&theta) = eigs.iter().find(|&&x| a_prime <= x && x <= b_prime) {
        return Err(Error::InvalidSplit {
            a_prime,
            b_prime,
            theta,
        });
    }
    Ok(eigs.iter().filter(|&&x| x > b_prime).count())
}

fn check_resolvent_point(z: Complex64, spec: &DeformationSpec, sigma: f64) -> Result<()> {
    if z.im == 0.0 && support_set(spec, sigma, 0.0)?.contains(z.re) {
        return Err(Error::Domain(format!(
            "real z = {} lies in the limiting support",
            z.re
        )));
    }
    Ok(())
}

/// `E[(z - s)^-2]` for `s` semicircular, by quadrature against the density.
pub fn mean_inverse_square(z: Complex64, sigma: f64) -> Result<Complex64> {
    check_sigma(sigma)?;
    if z.im == 0.0 && z.re.abs() <= 2.0 * sigma {
        return Err(Error::Domain(format!("real z = {} lies in the bulk", z.re)));
    }
    Ok(semicircle_expectation(sigma, QUADRATURE_TOL, |t| {
        let d = z - t;
        (d * d).inv()
    }))
}

/// First-order term `E_sigma(z)` of the approximate master equation.
///
/// Complex field: `sum_j k_j theta_j / (1/g - theta_j) + (kappa4/2) g^4`.
/// The real field adds `sigma^2 E[(z - s)^-2]`.
pub fn e_sigma(
    z: Complex64,
    spec: Option<&DeformationSpec>,
    law: &EntryLaw,
    field: Field,
) -> Result<Complex64> {
    let sigma = law.sigma();
    let empty = DeformationSpec::Diagonal { spikes: Vec::new() };
    let spec = spec.unwrap_or(&empty);
    check_resolvent_point(z, spec, sigma)?;
    let g = g_sc(z, sigma)?;
    // z - sigma^2 g(z) = 1/g(z)
    let inv_g = g.inv();
    let mut e: Complex64 = spec
        .spikes()
        .iter()
        .map(|s| s.multiplicity as f64 * s.theta / (inv_g - s.theta))
        .sum();
    e += 0.5 * law.kappa4() * g.powi(4);
    if field == Field::Real {
        e += sigma * sigma * mean_inverse_square(z, sigma)?;
    }
    Ok(e)
}

/// The `1/N` coefficient `L_sigma(z) = g(z)^-1 E[(z - s)^-2] E_sigma(z)` of
/// the expected resolvent trace: `g_N(z) ~ g(z) + L_sigma(z)/N`.
pub fn l_sigma(
    z: Complex64,
    spec: Option<&DeformationSpec>,
    law: &EntryLaw,
    field: Field,
) -> Result<Complex64> {
    let sigma = law.sigma();
    let e = e_sigma(z, spec, law, field)?;
    let g = g_sc(z, sigma)?;
    Ok(g.inv() * mean_inverse_square(z, sigma)? * e)
}

/// Limit law of `sqrt(N) (lambda_1 - rho_theta)` for a rank-one diagonal spike.
pub fn fluctuation_target(law: &EntryLaw, theta: f64, field: Field) -> Result<FluctuationTarget> {
    FluctuationTarget::new(law, theta, field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pdf_examples() {
        assert!((semicircle_pdf(0.0, 1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(semicircle_pdf(2.0, 1.0).unwrap(), 0.0);
        assert!((semicircle_pdf(1.0, 1.0).unwrap() - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
        assert!(semicircle_pdf(0.0, 0.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        assert!((semicircle_cdf(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(semicircle_cdf(-2.0, 1.0).unwrap(), 0.0);
        // adaptive quadrature of the density (scipy.integrate.quad): 0.8044988905221149
        assert!((semicircle_cdf(1.0, 1.0).unwrap() - 0.804_498_890_522_114_9).abs() < 1e-12);
        assert!(semicircle_cdf(0.0, -1.0).is_err());
    }

    #[test]
    fn g_examples() {
        assert!((g_sc_real(2.5, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((g_sc_real(-2.5, 1.0).unwrap() + 0.5).abs() < 1e-15);
        let g = g_sc(c(0.0, 1.0), 1.0).unwrap();
        // roots of g^2 - i g + 1 = 0 are i(1 ± sqrt 5)/2; the branch with Im g < 0
        let expected = c(0.0, (1.0 - 5f64.sqrt()) / 2.0);
        assert!((g - expected).norm() < 1e-15);
        assert!(g_sc(c(1.0, 0.0), 1.0).is_err());
        assert!(g_sc(c(2.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = g_sc_derivative(c(3.0, 0.0), 1.0).unwrap();
        assert!((d.re + 0.170_820_393_249_936_9).abs() < 1e-12);
        let d = g_sc_derivative(c(100.0, 0.0), 1.0).unwrap();
        // series g = 1/z + 1/z^3 + 2/z^5 gives g' = -1/z^2 - 3/z^4 - ...
        assert!((d.re + 1.0003e-4).abs() < 1e-9);
        assert!(g_sc_derivative(c(0.0, 1.0), 1.0).unwrap().norm() <= 1.0);
    }

    #[test]
    fn z_sigma_examples() {
        assert!((z_sigma(c(0.5, 0.0), 1.0).unwrap().re - 2.5).abs() < 1e-15);
        assert!((z_sigma(c(1.0, 0.0), 1.0).unwrap().re - 2.0).abs() < 1e-15);
        let g = g_sc(c(3.0, 0.0), 1.0).unwrap();
        assert!((z_sigma(g, 1.0).unwrap().re - 3.0).abs() < 1e-14);
        assert!(z_sigma(c(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn rho_and_sigma_theta() {
        assert_eq!(rho(2.0, 1.0).unwrap(), 2.5);
        assert!((rho(3.0, 1.0).unwrap() - 10.0 / 3.0).abs() < 1e-15);
        assert!((rho(-2.5, 1.0).unwrap() + 2.9).abs() < 1e-15);
        assert!(matches!(
            rho(1.0, 1.0),
            Err(Error::OutsideOutlierRegime { .. })
        ));
        assert!((sigma_theta(2.0, 1.0).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((sigma_theta(1.25, 1.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((sigma_theta(1e8, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(sigma_theta(0.5, 1.0).is_err());
    }

    #[test]
    fn v_theta_examples() {
        let g = EntryLaw::gaussian(1.0).unwrap();
        let r = EntryLaw::rademacher(1.0).unwrap();
        assert!((v_theta(&g, 2.0, Field::Real).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((v_theta(&g, 2.0, Field::Complex).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((v_theta(&r, 2.0, Field::Real).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(v_theta(&r, 1.0, Field::Real).is_err());
    }

    #[test]
    fn support_examples() {
        let spec = DeformationSpec::diagonal(&[(3.0, 1), (-2.5, 1)]).unwrap();
        let s = support_set(&spec, 1.0, 0.0).unwrap();
        assert_eq!(s.bottom_outliers, vec![-2.9]);
        assert_eq!(s.top_outliers.len(), 1);
        assert!((s.top_outliers[0] - 10.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.bulk, Interval::new(-2.0, 2.0));

        let empty = DeformationSpec::diagonal(&[]).unwrap();
        let s = support_set(&empty, 1.0, 0.0).unwrap();
        assert_eq!(s.components(), vec![Interval::new(-2.0, 2.0)]);

        let sub = DeformationSpec::diagonal(&[(0.5, 1)]).unwrap();
        let s = support_set(&sub, 1.0, 0.1).unwrap();
        assert_eq!(s.components(), vec![Interval::new(-2.1, 2.1)]);
    }

    #[test]
    fn forbidden_gaps_and_large_epsilon() {
        let spec = DeformationSpec::diagonal(&[(2.0, 1)]).unwrap();
        let gaps = support_set(&spec, 1.0, 0.1).unwrap().forbidden_gaps().unwrap();
        assert_eq!(gaps.len(), 3);
        assert_eq!(gaps[0].hi, -2.1);
        assert!((gaps[1].lo - 2.1).abs() < 1e-15 && (gaps[1].hi - 2.4).abs() < 1e-15);
        assert!((gaps[2].lo - 2.6).abs() < 1e-15 && gaps[2].hi.is_infinite());
        assert!(support_set(&spec, 1.0, 10.0).unwrap().forbidden_gaps().is_err());
    }

    #[test]
    fn predict_limits_examples() {
        let spec = DeformationSpec::diagonal(&[(3.0, 2), (0.5, 1), (-2.5, 1)]).unwrap();
        let p = predict_limits(&spec, 1.0, 500).unwrap();
        let e1 = p.limit_at(1).unwrap();
        assert_eq!(e1.kind, LimitKind::TopOutlier);
        assert_eq!(e1.indices, IndexRange { first: 1, last: 2 });
        assert!((e1.limit - 10.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.limit_at(3).unwrap().limit, 2.0);
        assert_eq!(p.limit_at(499).unwrap().limit, -2.0);
        assert_eq!(p.limit_at(499).unwrap().kind, LimitKind::BottomEdge);
        assert!((p.limit_at(500).unwrap().limit + 2.9).abs() < 1e-15);
        assert!(p.limit_at(4).is_none());

        let none = DeformationSpec::diagonal(&[]).unwrap();
        let p = predict_limits(&none, 1.0, 100).unwrap();
        assert_eq!(p.limit_at(1).unwrap().limit, 2.0);
        assert_eq!(p.limit_at(100).unwrap().limit, -2.0);
        assert_eq!(p.entries.len(), 2);

        let threshold = DeformationSpec::diagonal(&[(1.0, 1)]).unwrap();
        let p = predict_limits(&threshold, 1.0, 10).unwrap();
        assert_eq!(p.limit_at(1).unwrap().limit, 2.0);
        assert_eq!(p.limit_at(1).unwrap().kind, LimitKind::TopEdge);
        assert!(p.entries.iter().all(|e| !matches!(
            e.kind,
            LimitKind::TopOutlier | LimitKind::BottomOutlier
        )));
        assert_eq!(p.threshold_spikes, vec![1.0]);

        let big = DeformationSpec::diagonal(&[(3.0, 5)]).unwrap();
        assert!(predict_limits(&big, 1.0, 4).is_err());
    }

    #[test]
    fn separation_examples() {
        let spec = DeformationSpec::diagonal(&[(3.0, 2), (0.5, 1), (-2.5, 1)]).unwrap();
        let plan = separation_plan(2.2, 3.0, &spec, 1.0, 500).unwrap();
        assert_eq!(plan.i_n, 2);
        // a' solves theta + 1/theta = 2.2
        assert!((plan.a_prime - (2.2 + 0.84f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((plan.b_prime - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);

        let plan = separation_plan(3.5, 4.0, &spec, 1.0, 500).unwrap();
        assert_eq!(plan.i_n, 0);

        // [-2.7, -2.2] sits between -2.9 and the bulk; its image avoids -2.5
        let spec2 = DeformationSpec::diagonal(&[(3.0, 1), (-2.5, 1)]).unwrap();
        let plan = separation_plan(-2.7, -2.2, &spec2, 1.0, 100).unwrap();
        assert_eq!(plan.i_n, 99);
        assert!(plan.a_prime < -2.5 || plan.b_prime > -2.5);

        assert!(matches!(
            separation_plan(-2.1, -1.9, &spec, 1.0, 500),
            Err(Error::IntervalInsideSupport { .. })
        ));
        // [-2.2, -2.1] lies in the gap between -2.9 and the bulk
        let plan = separation_plan(-2.2, -2.1, &spec, 1.0, 500).unwrap();
        assert_eq!(plan.i_n, 499);
        assert!(matches!(
            count_split(2.0, 3.5, &spec, 500),
            Err(Error::InvalidSplit { theta, .. }) if theta == 3.0
        ));
    }

    #[test]
    fn e_sigma_examples() {
        let g = EntryLaw::gaussian(1.0).unwrap();
        let e = e_sigma(c(1.0, 1.0), None, &g, Field::Complex).unwrap();
        assert_eq!(e, c(0.0, 0.0));
        let spike = DeformationSpec::diagonal(&[(2.0, 1)]).unwrap();
        let e = e_sigma(c(3.0, 0.0), Some(&spike), &g, Field::Complex).unwrap();
        let inv_g = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((e.re - 2.0 / (inv_g - 2.0)).abs() < 1e-12);
        assert!((e.re - 3.236_067_977_499_79).abs() < 1e-12);
        let e = e_sigma(c(3.0, 0.0), None, &g, Field::Real).unwrap();
        assert!((e.re - 0.170_820_393_249_936_9).abs() < 1e-10);
        assert!(e_sigma(c(1.0, 0.0), None, &g, Field::Complex).is_err());
        assert!(e_sigma(c(2.5, 0.0), Some(&spike), &g, Field::Complex).is_err());
    }

    #[test]
    fn l_sigma_vanishes_without_spikes_and_reflects() {
        let g = EntryLaw::gaussian(1.0).unwrap();
        assert_eq!(l_sigma(c(1.0, 1.0), None, &g, Field::Complex).unwrap(), c(0.0, 0.0));
        let spike = DeformationSpec::diagonal(&[(2.0, 1)]).unwrap();
        let z = c(1.0, 1.0);
        let l = l_sigma(z, Some(&spike), &g, Field::Complex).unwrap();
        let lc = l_sigma(z.conj(), Some(&spike), &g, Field::Complex).unwrap();
        assert!((lc - l.conj()).norm() < 1e-12);
    }

    #[test]
    fn mean_inverse_square_matches_minus_derivative() {
        for z in [c(3.0, 0.0), c(1.0, 1.0), c(-0.5, 0.5), c(0.0, 2.0)] {
            let q = mean_inverse_square(z, 1.0).unwrap();
            let d = g_sc_derivative(z, 1.0).unwrap();
            assert!((q + d).norm() < 1e-10, "z = {z}: {q} vs {}", -d);
        }
    }
}
