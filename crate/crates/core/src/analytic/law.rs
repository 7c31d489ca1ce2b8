use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::normal_cdf;

/// Real symmetric or complex Hermitian model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The `t` parameter of the fluctuation variance: 4 for real, 2 for complex.
    pub fn t(self) -> f64 {
        match self {
            Field::Real => 4.0,
            Field::Complex => 2.0,
        }
    }
}

/// Shape of a symmetric entry distribution. The scale lives in [`EntryLaw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LawKind {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt(3) sigma, sqrt(3) sigma]`.
    Uniform,
    /// Symmetric discrete law: each `[a, w]` puts mass `w/2` on `+a` and on `-a`.
    /// Atoms are rescaled so that the variance is exactly `sigma^2`.
    Discrete { atoms: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntryLawRepr {
    #[serde(flatten)]
    kind: LawKind,
    sigma: f64,
}

/// A centred symmetric entry distribution with standard deviation `sigma`.
///
/// Rademacher and uniform laws do not satisfy every technical hypothesis of
/// the fluctuation theory (they are compactly supported, the Rademacher law has
/// no Poincaré inequality); they are kept because their first four moments
/// are what the predictions depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EntryLawRepr", into = "EntryLawRepr")]
pub struct EntryLaw {
    kind: LawKind,
    sigma: f64,
    /// Symmetric atoms `(value, probability)` after rescaling; empty for
    /// continuous laws.
    #[serde(skip)]
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<EntryLawRepr> for EntryLaw {
    type Error = Error;

    fn try_from(r: EntryLawRepr) -> Result<Self> {
        EntryLaw::new(r.kind, r.sigma)
    }
}

impl From<EntryLaw> for EntryLawRepr {
    fn from(l: EntryLaw) -> Self {
        EntryLawRepr {
            kind: l.kind,
            sigma: l.sigma,
        }
    }
}

impl EntryLaw {
    pub fn new(kind: LawKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidLaw(format!("sigma must be positive, got {sigma}")));
        }
        let atoms = match &kind {
            LawKind::Gaussian | LawKind::Uniform => Vec::new(),
            LawKind::Rademacher => vec![(sigma, 0.5), (-sigma, 0.5)],
            LawKind::Discrete { atoms } => symmetric_atoms(atoms, sigma)?,
        };
        Ok(Self { kind, sigma, atoms })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(LawKind::Gaussian, sigma)
    }

    pub fn rademacher(sigma: f64) -> Result<Self> {
        Self::new(LawKind::Rademacher, sigma)
    }

    pub fn uniform(sigma: f64) -> Result<Self> {
        Self::new(LawKind::Uniform, sigma)
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Fourth moment `m4`.
    pub fn m4(&self) -> f64 {
        let s4 = self.sigma.powi(4);
        match self.kind {
            LawKind::Gaussian => 3.0 * s4,
            LawKind::Uniform => 1.8 * s4,
            LawKind::Rademacher | LawKind::Discrete { .. } => {
                self.atoms.iter().map(|(a, p)| p * a.powi(4)).sum()
            }
        }
    }

    /// Fourth cumulant `m4 - 3 sigma^4`.
    pub fn kappa4(&self) -> f64 {
        self.m4() - 3.0 * self.sigma.powi(4)
    }

    /// Same shape, scaled by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.kind.clone(), self.sigma * factor)
    }

    /// Symmetric atoms `(value, probability)` for discrete laws.
    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        if self.atoms.is_empty() {
            None
        } else {
            Some(&self.atoms)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            LawKind::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                self.sigma * z
            }
            LawKind::Rademacher => {
                if rng.random::<bool>() {
                    self.sigma
                } else {
                    -self.sigma
                }
            }
            LawKind::Uniform => {
                let half_width = 3f64.sqrt() * self.sigma;
                rng.random_range(-half_width..half_width)
            }
            LawKind::Discrete { .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(a, p) in &self.atoms {
                    acc += p;
                    if u < acc {
                        return a;
                    }
                }
                self.atoms[self.atoms.len() - 1].0
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian => normal_cdf(x / self.sigma),
            LawKind::Uniform => {
                let h = 3f64.sqrt() * self.sigma;
                ((x + h) / (2.0 * h)).clamp(0.0, 1.0)
            }
            LawKind::Rademacher | LawKind::Discrete { .. } => self
                .atoms
                .iter()
                .filter(|(a, _)| *a <= x)
                .map(|(_, p)| p)
                .sum::<f64>()
                .min(1.0),
        }
    }
}

fn symmetric_atoms(raw: &[[f64; 2]], sigma: f64) -> Result<Vec<(f64, f64)>> {
    if raw.is_empty() {
        return Err(Error::InvalidLaw("discrete law needs at least one atom".into()));
    }
    let mut total = 0.0;
    let mut second = 0.0;
    for &[a, w] in raw {
        if !(a.is_finite() && w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidLaw(format!("bad atom [{a}, {w}]")));
        }
        total += w;
        second += w * a * a;
    }
    if total <= 0.0 || second <= 0.0 {
        return Err(Error::InvalidLaw("discrete law has zero variance".into()));
    }
    let scale = sigma / (second / total).sqrt();
    let mut atoms = Vec::with_capacity(2 * raw.len());
    for &[a, w] in raw {
        let p = 0.5 * w / total;
        if p == 0.0 {
            continue;
        }
        let v = a.abs() * scale;
        atoms.push((-v, p));
        atoms.push((v, p));
    }
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_by_kind() {
        let g = EntryLaw::gaussian(2.0).unwrap();
        assert_eq!(g.m4(), 48.0);
        assert_eq!(g.kappa4(), 0.0);
        let r = EntryLaw::rademacher(1.0).unwrap();
        assert_eq!(r.m4(), 1.0);
        assert_eq!(r.kappa4(), -2.0);
        let u = EntryLaw::uniform(1.0).unwrap();
        assert!((u.m4() - 1.8).abs() < 1e-15);
    }

    #[test]
    fn discrete_atoms_are_rescaled_to_sigma() {
        let law = EntryLaw::new(
            LawKind::Discrete {
                atoms: vec![[1.0, 1.0], [3.0, 1.0]],
            },
            1.0,
        )
        .unwrap();
        let atoms = law.atoms().unwrap();
        let var: f64 = atoms.iter().map(|(a, p)| p * a * a).sum();
        let mean: f64 = atoms.iter().map(|(a, p)| p * a).sum();
        assert!((var - 1.0).abs() < 1e-14);
        assert!(mean.abs() < 1e-15);
        assert!(law.m4() >= 1.0);
    }

    #[test]
    fn rejects_nonpositive_sigma() {
        assert!(EntryLaw::gaussian(0.0).is_err());
        assert!(EntryLaw::rademacher(-1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let law: EntryLaw = serde_json::from_str(r#"{"kind": "rademacher", "sigma": 1.0}"#).unwrap();
        assert_eq!(law, EntryLaw::rademacher(1.0).unwrap());
        let s = serde_json::to_string(&law).unwrap();
        assert_eq!(s, r#"{"kind":"rademacher","sigma":1.0}"#);
        let d: EntryLaw =
            serde_json::from_str(r#"{"kind": "discrete", "sigma": 1.0, "atoms": [[1.0, 0.5], [2.0, 0.5]]}"#)
                .unwrap();
        assert_eq!(d.atoms().unwrap().len(), 4);
        assert!(serde_json::from_str::<EntryLaw>(r#"{"kind": "gaussian", "sigma": -1}"#).is_err());
    }

    #[test]
    fn cdf_is_symmetric() {
        for law in [
            EntryLaw::gaussian(1.3).unwrap(),
            EntryLaw::uniform(0.7).unwrap(),
        ] {
            for x in [0.1, 0.5, 1.0, 2.5] {
                assert!((law.cdf(-x) - (1.0 - law.cdf(x))).abs() < 1e-14);
            }
        }
    }
}
