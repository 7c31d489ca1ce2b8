use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analytic::{DeformationSpec, EntryLaw, Field};
use crate::ensemble::EnsembleConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Outliers,
    Fluct,
    Correction,
    Separation,
    Esd,
    Quadform,
    Gaps,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Outliers,
        Experiment::Fluct,
        Experiment::Correction,
        Experiment::Separation,
        Experiment::Esd,
        Experiment::Quadform,
        Experiment::Gaps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Outliers => "outliers",
            Experiment::Fluct => "fluct",
            Experiment::Correction => "correction",
            Experiment::Separation => "separation",
            Experiment::Esd => "esd",
            Experiment::Quadform => "quadform",
            Experiment::Gaps => "gaps",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional overrides of the verdict thresholds; unset keys take the
/// per-experiment defaults of [`ResolvedTolerances`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_inward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_outward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_rel: Option<f64>,
    /// Lower bound on the KS distance to the universal Gaussian; adds a verdict when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_gauss_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_var_growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_k: Option<f64>,
}

/// Thresholds after applying the per-experiment defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTolerances {
    pub mean: f64,
    pub edge_inward: f64,
    pub edge_outward: f64,
    pub ks: f64,
    pub var_rel: f64,
    pub ks_gauss_min: Option<f64>,
    pub bias_rel: f64,
    pub slope: f64,
    pub trace_var_growth: f64,
    pub fraction: f64,
    pub w1: f64,
    pub bs_k: f64,
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mean", self.mean),
            ("edge_inward", self.edge_inward),
            ("edge_outward", self.edge_outward),
            ("ks", self.ks),
            ("var_rel", self.var_rel),
            ("ks_gauss_min", self.ks_gauss_min),
            ("bias_rel", self.bias_rel),
            ("trace_var_growth", self.trace_var_growth),
            ("fraction", self.fraction),
            ("w1", self.w1),
            ("bs_k", self.bs_k),
        ];
        for (name, value) in positive {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!("tolerance '{name}' must be positive, got {v}")));
                }
            }
        }
        if let Some(f) = self.fraction {
            if f > 1.0 {
                return Err(Error::Config(format!("tolerance 'fraction' must be <= 1, got {f}")));
            }
        }
        if let Some(s) = self.slope {
            if !(s.is_finite() && s < 0.0) {
                return Err(Error::Config(format!("tolerance 'slope' must be negative, got {s}")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, experiment: Experiment, deformation: Option<&DeformationSpec>) -> ResolvedTolerances {
        let full = matches!(deformation, Some(DeformationSpec::Full { .. }));
        let (ks_default, var_default) = match experiment {
            Experiment::Fluct if full => (0.08, 0.10),
            Experiment::Fluct => (0.06, 0.10),
            Experiment::Quadform => (0.03, 0.05),
            _ => (0.06, 0.10),
        };
        ResolvedTolerances {
            mean: self.mean.unwrap_or(0.05),
            edge_inward: self.edge_inward.unwrap_or(0.1),
            edge_outward: self.edge_outward.unwrap_or(0.05),
            ks: self.ks.unwrap_or(ks_default),
            var_rel: self.var_rel.unwrap_or(var_default),
            ks_gauss_min: self.ks_gauss_min,
            bias_rel: self.bias_rel.unwrap_or(0.2),
            slope: self.slope.unwrap_or(-1.3),
            trace_var_growth: self.trace_var_growth.unwrap_or(2.0),
            fraction: self.fraction.unwrap_or(0.99),
            w1: self.w1.unwrap_or(0.05),
            bs_k: self.bs_k.unwrap_or(4.0),
        }
    }
}

/// Output locations; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tsv: Option<PathBuf>,
}

impl OutputPaths {
    pub fn is_empty(&self) -> bool {
        self.report.is_none() && self.csv.is_none() && self.tsv.is_none()
    }
}

/// One experiment as read from its JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub field: Field,
    #[serde(rename = "N")]
    pub n: usize,
    pub reps: usize,
    pub entry_law: EntryLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Experiment-specific block, decoded by each runner.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub experiment_params: serde_json::Value,
    #[serde(default, skip_serializing_if = "OutputPaths::is_empty")]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if let Some(spec) = &self.deformation {
            spec.validate()?;
            spec.check_rank(self.n)?;
        }
        self.tolerances.validate()
    }

    pub fn ensemble(&self, n: usize, master_seed: u64) -> Result<EnsembleConfig> {
        EnsembleConfig::new(
            self.field,
            n,
            self.entry_law.clone(),
            self.deformation.clone(),
            master_seed,
        )
    }

    pub fn tolerances(&self) -> ResolvedTolerances {
        self.tolerances.resolve(self.experiment, self.deformation.as_ref())
    }

    /// Overrides the replication count. A per-size `reps_grid` would otherwise
    /// shadow the override, so it is dropped.
    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        if let Some(obj) = self.experiment_params.as_object_mut() {
            obj.remove("reps_grid");
        }
        self
    }

    /// Decodes `experiment_params`; a missing block decodes as `{}`.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        let value = if self.experiment_params.is_null() {
            serde_json::Value::Object(Default::default())
        } else {
            self.experiment_params.clone()
        };
        serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("experiment_params for {}: {e}", self.experiment)))
    }
}
