use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-zero deformation eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, usize)", into = "(f64, usize)")]
pub struct Spike {
    pub theta: f64,
    pub multiplicity: usize,
}

impl Spike {
    pub fn new(theta: f64, multiplicity: usize) -> Self {
        Self {
            theta,
            multiplicity,
        }
    }
}

impl From<(f64, usize)> for Spike {
    fn from((theta, multiplicity): (f64, usize)) -> Self {
        Self::new(theta, multiplicity)
    }
}

impl From<Spike> for (f64, usize) {
    fn from(s: Spike) -> Self {
        (s.theta, s.multiplicity)
    }
}

/// The finite-rank perturbation added to the scaled Wigner matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeformationSpec {
    /// Spikes placed on the diagonal: positive spikes first, then the zero
    /// block, negative spikes last.
    Diagonal { spikes: Vec<Spike> },
    /// Every entry equal to `theta / N`: rank one with eigenvalue `theta`.
    Full {
        #[serde(alias = "full_theta")]
        theta: f64,
    },
    /// The diagonal form conjugated by a seeded product of Householder reflectors.
    Rotated {
        spikes: Vec<Spike>,
        rotation_seed: u64,
    },
}

impl DeformationSpec {
    pub fn diagonal(spikes: &[(f64, usize)]) -> Result<Self> {
        let spec = DeformationSpec::Diagonal {
            spikes: spikes.iter().map(|&s| s.into()).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn full(theta: f64) -> Result<Self> {
        let spec = DeformationSpec::Full { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rotated(spikes: &[(f64, usize)], rotation_seed: u64) -> Result<Self> {
        let spec = DeformationSpec::Rotated {
            spikes: spikes.iter().map(|&s| s.into()).collect(),
            rotation_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Distinct non-zero eigenvalues with multiplicities, strictly decreasing.
    pub fn spikes(&self) -> Vec<Spike> {
        match self {
            DeformationSpec::Diagonal { spikes } | DeformationSpec::Rotated { spikes, .. } => {
                spikes.clone()
            }
            DeformationSpec::Full { theta } => vec![Spike::new(*theta, 1)],
        }
    }

    pub fn rank(&self) -> usize {
        self.spikes().iter().map(|s| s.multiplicity).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let spikes = self.spikes();
        for s in &spikes {
            if !s.theta.is_finite() || s.theta == 0.0 {
                return Err(Error::InvalidDeformation(format!(
                    "spike values must be finite and non-zero, got {}",
                    s.theta
                )));
            }
            if s.multiplicity == 0 {
                return Err(Error::InvalidDeformation(format!(
                    "spike {} has zero multiplicity",
                    s.theta
                )));
            }
        }
        if spikes.windows(2).any(|w| w[0].theta <= w[1].theta) {
            return Err(Error::InvalidDeformation(
                "spikes must be strictly decreasing in theta".into(),
            ));
        }
        Ok(())
    }

    pub fn check_rank(&self, n: usize) -> Result<()> {
        let rank = self.rank();
        if rank > n {
            return Err(Error::RankExceedsDimension { rank, n });
        }
        Ok(())
    }

    /// Eigenvalues of the `n x n` deformation in the diagonal order:
    /// positive spikes, `n - r` zeros, negative spikes.
    pub fn diagonal_entries(&self, n: usize) -> Result<Vec<f64>> {
        self.check_rank(n)?;
        let spikes = self.spikes();
        let mut d = Vec::with_capacity(n);
        for s in spikes.iter().filter(|s| s.theta > 0.0) {
            d.extend(std::iter::repeat_n(s.theta, s.multiplicity));
        }
        let neg: usize = spikes
            .iter()
            .filter(|s| s.theta < 0.0)
            .map(|s| s.multiplicity)
            .sum();
        d.resize(n - neg, 0.0);
        for s in spikes.iter().filter(|s| s.theta < 0.0) {
            d.extend(std::iter::repeat_n(s.theta, s.multiplicity));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        let d: DeformationSpec =
            serde_json::from_str(r#"{"kind": "diagonal", "spikes": [[2.0, 1]]}"#).unwrap();
        assert_eq!(d, DeformationSpec::diagonal(&[(2.0, 1)]).unwrap());
        let f: DeformationSpec = serde_json::from_str(r#"{"kind": "full", "full_theta": 2.0}"#).unwrap();
        assert_eq!(f.rank(), 1);
        let r: DeformationSpec =
            serde_json::from_str(r#"{"kind": "rotated", "spikes": [[2.0, 2]], "rotation_seed": 7}"#)
                .unwrap();
        assert_eq!(r.rank(), 2);
    }

    #[test]
    fn rejects_unsorted_or_zero_spikes() {
        assert!(DeformationSpec::diagonal(&[(1.0, 1), (2.0, 1)]).is_err());
        assert!(DeformationSpec::diagonal(&[(2.0, 1), (2.0, 1)]).is_err());
        assert!(DeformationSpec::diagonal(&[(0.0, 1)]).is_err());
        assert!(DeformationSpec::diagonal(&[(1.0, 0)]).is_err());
    }

    #[test]
    fn diagonal_order_places_negative_spikes_last() {
        let spec = DeformationSpec::diagonal(&[(3.0, 2), (0.5, 1), (-2.5, 1)]).unwrap();
        let d = spec.diagonal_entries(7).unwrap();
        assert_eq!(d, vec![3.0, 3.0, 0.5, 0.0, 0.0, 0.0, -2.5]);
        assert!(matches!(
            spec.diagonal_entries(3),
            Err(Error::RankExceedsDimension { rank: 4, n: 3 })
        ));
    }
}
