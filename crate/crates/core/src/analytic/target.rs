use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::law::{EntryLaw, Field, LawKind};
use crate::error::Result;
use crate::quadrature::GaussLegendre;
use crate::stats::{normal_cdf, normal_pdf};

/// Nodes for convolution CDFs with a continuous base law (target accuracy 1e-9).
const CONVOLUTION_RULE_POINTS: usize = 64;

fn convolution_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(CONVOLUTION_RULE_POINTS))
}

/// Limit law `c * (W11 + N(0, v))` of the rescaled largest eigenvalue.
///
/// `base_law` is the law of the undeformed corner entry `W11`: the entry law
/// itself for the complex model and the entry law scaled by `sqrt 2` for the
/// real model, whose diagonal entries carry twice the off-diagonal variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationTarget {
    pub theta: f64,
    pub scale_c: f64,
    pub base_law: EntryLaw,
    pub gaussian_variance: f64,
    pub field: Field,
}

impl FluctuationTarget {
    pub fn new(law: &EntryLaw, theta: f64, field: Field) -> Result<Self> {
        let sigma = law.sigma();
        let gaussian_variance = super::v_theta(law, theta, field)?;
        let base_law = match field {
            Field::Complex => law.clone(),
            Field::Real => law.scaled(std::f64::consts::SQRT_2)?,
        };
        Ok(Self {
            theta,
            scale_c: 1.0 - sigma * sigma / (theta * theta),
            base_law,
            gaussian_variance,
            field,
        })
    }

    /// Total variance `c^2 (Var W11 + v)`.
    pub fn variance(&self) -> f64 {
        self.scale_c * self.scale_c * (self.base_law.variance() + self.gaussian_variance)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let y = x / self.scale_c;
        let sd = self.gaussian_variance.sqrt();
        match self.base_law.kind() {
            LawKind::Gaussian => {
                let total = (self.base_law.variance() + self.gaussian_variance).sqrt();
                normal_cdf(y / total)
            }
            LawKind::Rademacher | LawKind::Discrete { .. } => self
                .base_law
                .atoms()
                .unwrap_or(&[])
                .iter()
                .map(|&(a, p)| p * normal_cdf((y - a) / sd))
                .sum::<f64>()
                .clamp(0.0, 1.0),
            LawKind::Uniform => {
                let h = 3f64.sqrt() * self.base_law.sigma();
                let v = convolution_rule().integrate(-h, h, |w| normal_cdf((y - w) / sd));
                (v / (2.0 * h)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let c = self.scale_c;
        let y = x / c;
        let sd = self.gaussian_variance.sqrt();
        match self.base_law.kind() {
            LawKind::Gaussian => {
                let total = (self.base_law.variance() + self.gaussian_variance).sqrt();
                normal_pdf(y / total) / (total * c)
            }
            LawKind::Rademacher | LawKind::Discrete { .. } => self
                .base_law
                .atoms()
                .unwrap_or(&[])
                .iter()
                .map(|&(a, p)| p * normal_pdf((y - a) / sd) / (sd * c))
                .sum(),
            LawKind::Uniform => {
                let h = 3f64.sqrt() * self.base_law.sigma();
                (normal_cdf((y + h) / sd) - normal_cdf((y - h) / sd)) / (2.0 * h * c)
            }
        }
    }

    /// One draw of `c * (W11 + sqrt(v) Z)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.scale_c * (self.base_law.sample(rng) + self.gaussian_variance.sqrt() * z)
    }
}
