use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::report::{histogram, histogram_auto, Cell, CsvTable, ExperimentReport, PlotData, Record, RunOutput};
use crate::analytic::{
    e_sigma, fluctuation_target, g_sc, l_sigma, predict_limits, rho, separation_plan, sigma_theta, support_set,
    v_theta, DeformationSpec, LimitKind,
};
use crate::ensemble::{mix64, sample_wigner};
use crate::error::{Error, Result};
use crate::quadform::{bai_silverstein_ratio, mc_quadform, MatrixKind, QuadFormSpec, MIN_REPS};
use crate::spectra::{eigvals, eigvals_extreme, gap_census, largest_eigenvalue, resolvent_trace};
use crate::stats::{
    compensated_sum, ks_stat, ks_verdict, loglog_slope, normal_cdf, summarize, wasserstein1_semicircle, Direction,
    EmpiricalSample, TestVerdict,
};

/// Smallest `N` for which the ESD experiment renders a verdict.
pub const ESD_SIZE_FLOOR: usize = 100;

/// Runs `f` for every replication index on the current rayon pool and
/// returns the results in index order.
fn replicate<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

struct ReportBuilder<'a> {
    config: &'a ExperimentConfig,
    master_seed: u64,
    start: Instant,
    records: Vec<Record>,
    aggregates: BTreeMap<String, f64>,
    predictions: BTreeMap<String, Value>,
    verdicts: Vec<TestVerdict>,
    notes: Vec<String>,
}

impl<'a> ReportBuilder<'a> {
    fn new(config: &'a ExperimentConfig, master_seed: u64) -> Self {
        Self {
            config,
            master_seed,
            start: Instant::now(),
            records: Vec::new(),
            aggregates: BTreeMap::new(),
            predictions: BTreeMap::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn aggregate(&mut self, key: impl Into<String>, value: f64) {
        self.aggregates.insert(key.into(), value);
    }

    fn predict(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.predictions.insert(key.into(), value.into());
    }

    fn finish(self, csv: Option<CsvTable>, plot: Option<PlotData>) -> RunOutput {
        RunOutput {
            report: ExperimentReport {
                tool_version: crate::TOOL_VERSION.to_string(),
                experiment: self.config.experiment,
                master_seed: self.master_seed,
                config: self.config.clone(),
                records: self.records,
                aggregates: self.aggregates,
                predictions: self.predictions,
                verdicts: self.verdicts,
                notes: self.notes,
                wall_time_secs: self.start.elapsed().as_secs_f64(),
            },
            csv,
            plot,
        }
    }
}

fn record<const K: usize>(pairs: [(&str, Value); K]) -> Record {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn deformation_or_empty(config: &ExperimentConfig) -> DeformationSpec {
    config
        .deformation
        .clone()
        .unwrap_or(DeformationSpec::Diagonal { spikes: Vec::new() })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// Index-wise eigenvalue limits: means of the predicted indices against their limits.
pub fn run_outliers(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let _: NoParams = config.params()?;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let n = config.n;
    let sigma = config.entry_law.sigma();
    let spec = deformation_or_empty(config);
    let prediction = predict_limits(&spec, sigma, n)?;
    let is_top = |k: LimitKind| matches!(k, LimitKind::TopOutlier | LimitKind::TopEdge);
    let k_top = prediction
        .entries
        .iter()
        .filter(|e| is_top(e.kind))
        .map(|e| e.indices.last)
        .max()
        .unwrap_or(0);
    let k_bottom = prediction
        .entries
        .iter()
        .filter(|e| !is_top(e.kind))
        .map(|e| n + 1 - e.indices.first)
        .max()
        .unwrap_or(0);
    let indices: Vec<usize> = prediction.entries.iter().flat_map(|e| e.indices.iter()).collect();

    let ensemble = config.ensemble(n, master_seed)?;
    let rows = replicate(config.reps, |r| {
        let s = sample_wigner(&ensemble, r)?;
        let lambda: Vec<f64> = if k_top + k_bottom <= n {
            let x = eigvals_extreme(&s.matrix, k_top, k_bottom)?;
            indices
                .iter()
                .map(|&i| {
                    if i <= k_top {
                        x.top[i - 1]
                    } else {
                        x.bottom[i - (n + 1 - k_bottom)]
                    }
                })
                .collect()
        } else {
            let all = eigvals(&s.matrix)?;
            indices.iter().map(|&i| all[i - 1]).collect()
        };
        Ok((s.derived_seed, lambda))
    })?;

    for (r, (seed, lambda)) in rows.iter().enumerate() {
        let mut rec = record([("rep", json!(r)), ("seed", json!(seed))]);
        for (i, l) in indices.iter().zip(lambda) {
            rec.insert(format!("lambda_{i}"), json!(l));
        }
        b.records.push(rec);
    }
    let mut plot = PlotData::default();
    for (col, &i) in indices.iter().enumerate() {
        let values: Vec<f64> = rows.iter().map(|(_, l)| l[col]).collect();
        let m = mean(&values);
        plot.points.push((i as f64, m));
        b.aggregate(format!("lambda_{i}_mean"), m);
        if values.len() >= 2 {
            b.aggregate(format!("lambda_{i}_se"), summarize(&values)?.se_mean);
        }
        let entry = prediction.limit_at(i).ok_or_else(|| Error::Config(format!("no limit at index {i}")))?;
        let limit = entry.limit;
        match entry.kind {
            LimitKind::TopOutlier | LimitKind::BottomOutlier => {
                b.verdicts
                    .push(TestVerdict::at_most(format!("lambda_{i}_mean_error"), (m - limit).abs(), tol.mean));
            }
            LimitKind::TopEdge => {
                b.verdicts
                    .push(TestVerdict::at_most(format!("lambda_{i}_edge_inward"), limit - m, tol.edge_inward));
                b.verdicts
                    .push(TestVerdict::at_most(format!("lambda_{i}_edge_outward"), m - limit, tol.edge_outward));
            }
            LimitKind::BottomEdge => {
                b.verdicts
                    .push(TestVerdict::at_most(format!("lambda_{i}_edge_inward"), m - limit, tol.edge_inward));
                b.verdicts
                    .push(TestVerdict::at_most(format!("lambda_{i}_edge_outward"), limit - m, tol.edge_outward));
            }
        }
    }
    b.predict("limits", to_value(&prediction)?);
    b.predict("support", to_value(&support_set(&spec, sigma, 0.0)?)?);
    Ok(b.finish(None, Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluctParams {
    #[serde(default = "default_bins")]
    bins: usize,
}

fn default_bins() -> usize {
    60
}

/// Fluctuations of the largest eigenvalue around its outlier limit.
pub fn run_fluct(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: FluctParams = config.params()?;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let n = config.n;
    let law = &config.entry_law;
    let sigma = law.sigma();
    let spec = config
        .deformation
        .as_ref()
        .ok_or_else(|| Error::Config("fluct needs a deformation with one spike (theta, 1)".into()))?;
    let spikes = spec.spikes();
    if spikes.len() != 1 || spikes[0].multiplicity != 1 {
        return Err(Error::Config("fluct needs exactly one spike of multiplicity 1".into()));
    }
    if matches!(spec, DeformationSpec::Rotated { .. }) {
        return Err(Error::Config("fluct supports diagonal and full deformations only".into()));
    }
    let theta = spikes[0].theta;
    if theta <= sigma {
        return Err(Error::OutsideOutlierRegime { theta, sigma });
    }
    let rho_theta = rho(theta, sigma)?;
    let s_theta = sigma_theta(theta, sigma)?;
    let gaussian_var = config.field.t() / 2.0 * s_theta * s_theta;
    let target = fluctuation_target(law, theta, config.field)?;
    let full = matches!(spec, DeformationSpec::Full { .. });

    let ensemble = config.ensemble(n, master_seed)?;
    let sqrt_n = (n as f64).sqrt();
    let rows = replicate(config.reps, |r| {
        let s = sample_wigner(&ensemble, r)?;
        let l1 = largest_eigenvalue(&s.matrix)?;
        Ok((s.derived_seed, l1, sqrt_n * (l1 - rho_theta)))
    })?;

    let mut csv = CsvTable::new(&["rep", "seed", "N", "lambda1", "rescaled"]);
    for (r, &(seed, l1, x)) in rows.iter().enumerate() {
        csv.push(vec![Cell::Int(r as u64), Cell::Int(seed), Cell::Int(n as u64), Cell::Float(l1), Cell::Float(x)]);
        b.records.push(record([
            ("rep", json!(r)),
            ("seed", json!(seed)),
            ("lambda1", json!(l1)),
            ("rescaled", json!(x)),
        ]));
    }
    let rescaled: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let sample = EmpiricalSample::new(rescaled.clone())?;
    let gauss_sd = gaussian_var.sqrt();
    let gauss_cdf = |x: f64| normal_cdf(x / gauss_sd);
    let ks_target = ks_stat(&sample, |x| target.cdf(x));
    let ks_gauss = ks_stat(&sample, gauss_cdf);
    b.aggregate("ks_target", ks_target);
    b.aggregate("ks_gaussian", ks_gauss);
    if rescaled.len() >= 2 {
        let s = summarize(&rescaled)?;
        b.aggregate("mean", s.mean);
        b.aggregate("variance", s.variance);
        b.aggregate("skewness", s.skewness);
        b.aggregate("excess_kurtosis", s.excess_kurtosis);
        b.aggregate("se_mean", s.se_mean);
        b.aggregate("se_variance", s.se_variance);
        let reference_var = if full { gaussian_var } else { target.variance() };
        b.verdicts.push(TestVerdict::at_most(
            "var_rel",
            (s.variance - reference_var).abs() / reference_var,
            tol.var_rel,
        ));
    }
    if full {
        b.verdicts
            .push(ks_verdict("ks_gaussian", &sample, gauss_cdf, tol.ks, Direction::AtMost));
    } else {
        b.verdicts
            .push(ks_verdict("ks_target", &sample, |x| target.cdf(x), tol.ks, Direction::AtMost));
        if let Some(min) = tol.ks_gauss_min {
            b.verdicts
                .push(ks_verdict("ks_gaussian_min", &sample, gauss_cdf, min, Direction::AtLeast));
        }
    }
    b.predict("rho", rho_theta);
    b.predict("sigma_theta", s_theta);
    b.predict("v_theta", v_theta(law, theta, config.field)?);
    b.predict("scale_c", target.scale_c);
    b.predict("target_variance", target.variance());
    b.predict("gaussian_variance", gaussian_var);
    b.predict("reference", if full { "gaussian" } else { "target" });
    b.predict("target", to_value(&target)?);
    let plot = histogram_auto(&rescaled, params.bins);
    Ok(b.finish(Some(csv), Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrectionParams {
    #[serde(default = "default_z")]
    z: [f64; 2],
    #[serde(default)]
    n_grid: Vec<usize>,
    #[serde(default)]
    reps_grid: Option<Vec<usize>>,
}

fn default_z() -> [f64; 2] {
    [1.0, 1.0]
}

/// The `1/N` correction of the expected resolvent trace.
pub fn run_correction(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: CorrectionParams = config.params()?;
    let z = Complex64::new(params.z[0], params.z[1]);
    if z.im.is_nan() || z.im < 0.5 {
        return Err(Error::Config(format!("correction needs Im z >= 0.5, got {}", z.im)));
    }
    let grid = params.n_grid.clone();
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::Config(
            "correction needs an increasing n_grid of at least 3 positive sizes".into(),
        ));
    }
    let reps_grid = match &params.reps_grid {
        Some(r) if r.len() != grid.len() => {
            return Err(Error::Config("reps_grid must match n_grid in length".into()));
        }
        Some(r) if r.iter().any(|&k| k < 2) => {
            return Err(Error::Config("reps_grid entries must be at least 2".into()));
        }
        Some(r) => r.clone(),
        None if config.reps < 2 => return Err(Error::Config("correction needs reps >= 2".into())),
        None => vec![config.reps; grid.len()],
    };
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let law = &config.entry_law;
    let sigma = law.sigma();
    let g = g_sc(z, sigma)?;
    let l = l_sigma(z, config.deformation.as_ref(), law, config.field)?;
    let e = e_sigma(z, config.deformation.as_ref(), law, config.field)?;

    let mut csv = CsvTable::new(&["N", "reps", "gn_re", "gn_im", "se_re", "se_im"]);
    let mut residuals = Vec::with_capacity(grid.len());
    let mut trace_vars = Vec::with_capacity(grid.len());
    let mut last = None;
    for (&n, &reps) in grid.iter().zip(&reps_grid) {
        if let Some(spec) = &config.deformation {
            spec.check_rank(n)?;
        }
        let ensemble = config.ensemble(n, mix64(master_seed, n as u64))?;
        let traces = replicate(reps, |r| {
            let s = sample_wigner(&ensemble, r)?;
            let eig = eigvals(&s.matrix)?;
            Ok(resolvent_trace(&eig, z)?.trace_gn)
        })?;
        let re: Vec<f64> = traces.iter().map(|t| t.re).collect();
        let im: Vec<f64> = traces.iter().map(|t| t.im).collect();
        let (sre, sim) = (summarize(&re)?, summarize(&im)?);
        let gn = Complex64::new(sre.mean, sim.mean);
        let nf = n as f64;
        let c = (gn - g) * nf;
        let se_c = nf * sre.se_mean.hypot(sim.se_mean);
        let residual = (g - gn + l / nf).norm();
        // variance of the unnormalized trace N tr_N G
        let trace_var = nf * nf * (sre.variance + sim.variance);
        csv.push(vec![
            Cell::Int(n as u64),
            Cell::Int(reps as u64),
            Cell::Float(gn.re),
            Cell::Float(gn.im),
            Cell::Float(sre.se_mean),
            Cell::Float(sim.se_mean),
        ]);
        b.records.push(record([
            ("N", json!(n)),
            ("reps", json!(reps)),
            ("gn_re", json!(gn.re)),
            ("gn_im", json!(gn.im)),
            ("se_re", json!(sre.se_mean)),
            ("se_im", json!(sim.se_mean)),
            ("c_re", json!(c.re)),
            ("c_im", json!(c.im)),
            ("c_se", json!(se_c)),
            ("residual", json!(residual)),
            ("trace_variance", json!(trace_var)),
        ]));
        if l.norm() > 0.0 {
            let ratio = sre.se_mean.hypot(sim.se_mean) / (l.norm() / nf);
            b.aggregate(format!("se_over_l_n_{n}"), ratio);
            if ratio >= 0.05 {
                b.notes.push(format!(
                    "N = {n}: Monte Carlo SE is {ratio:.3} |L|/N, above the 0.05 calibration target"
                ));
            }
        }
        residuals.push((nf, residual));
        trace_vars.push(trace_var);
        last = Some((c, se_c));
    }
    let (c, se_c) = last.ok_or_else(|| Error::Config("empty n_grid".into()))?;
    b.aggregate("c_re", c.re);
    b.aggregate("c_im", c.im);
    b.aggregate("c_se", se_c);
    b.verdicts.push(TestVerdict::at_most(
        "bias_fit",
        (c - l).norm(),
        3.0 * se_c + tol.bias_rel * l.norm(),
    ));
    if l.norm() > 0.0 {
        if residuals.iter().all(|p| p.1 > 0.0) {
            b.verdicts
                .push(TestVerdict::at_most("residual_slope", loglog_slope(&residuals)?, tol.slope));
        }
        b.verdicts
            .push(TestVerdict::at_most("sign_test", (c - l).norm() - (c + l).norm(), 0.0));
    } else {
        b.notes.push("L_sigma(z) = 0: the residual slope and sign test are undefined and skipped".into());
    }
    let vmax = trace_vars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vmin = trace_vars.iter().copied().fold(f64::INFINITY, f64::min);
    if vmin > 0.0 {
        b.verdicts
            .push(TestVerdict::at_most("trace_var_growth", vmax / vmin, tol.trace_var_growth));
    }
    b.predict("z", json!([z.re, z.im]));
    b.predict("g", json!([g.re, g.im]));
    b.predict("l_sigma", json!([l.re, l.im]));
    b.predict("e_sigma", json!([e.re, e.im]));
    let plot = PlotData { points: residuals };
    Ok(b.finish(Some(csv), Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparationParams {
    interval: [f64; 2],
}

/// Exact separation of the spectrum across an interval outside the support.
pub fn run_separation(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: SeparationParams = config.params()?;
    let [a, bnd] = params.interval;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let n = config.n;
    let sigma = config.entry_law.sigma();
    let spec = deformation_or_empty(config);
    let plan = separation_plan(a, bnd, &spec, sigma, n)?;
    let i_n = plan.i_n;

    let ensemble = config.ensemble(n, master_seed)?;
    let rows = replicate(config.reps, |r| {
        let s = sample_wigner(&ensemble, r)?;
        let eig = eigvals(&s.matrix)?;
        let upper = (i_n >= 1).then(|| eig[i_n - 1]);
        let lower = (i_n < n).then(|| eig[i_n]);
        let ok = upper.is_none_or(|u| u > bnd) && lower.is_none_or(|l| l < a);
        Ok((s.derived_seed, upper, lower, ok))
    })?;
    let mut plot = PlotData::default();
    for (r, (seed, upper, lower, ok)) in rows.iter().enumerate() {
        let mut rec = record([("rep", json!(r)), ("seed", json!(seed)), ("separated", json!(u64::from(*ok)))]);
        if let Some(u) = upper {
            rec.insert("lambda_upper".into(), json!(u));
        }
        if let Some(l) = lower {
            rec.insert("lambda_lower".into(), json!(l));
        }
        b.records.push(rec);
        plot.points.push((r as f64, f64::from(u8::from(*ok))));
    }
    let fraction = rows.iter().filter(|r| r.3).count() as f64 / rows.len() as f64;
    b.aggregate("separated_fraction", fraction);
    b.verdicts
        .push(TestVerdict::at_least("separation_fraction", fraction, tol.fraction));
    b.predict("a", a);
    b.predict("b", bnd);
    b.predict("i_n", plan.i_n as u64);
    b.predict("a_prime", plan.a_prime);
    b.predict("b_prime", plan.b_prime);
    Ok(b.finish(None, Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GapParams {
    #[serde(default = "default_epsilon")]
    epsilon: f64,
}

fn default_epsilon() -> f64 {
    0.1
}

/// Counts eigenvalues in the forbidden gaps of the widened limiting support.
pub fn run_gaps(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: GapParams = config.params()?;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let n = config.n;
    let sigma = config.entry_law.sigma();
    let spec = deformation_or_empty(config);
    let support = support_set(&spec, sigma, params.epsilon)?;
    let mut gaps = support.forbidden_gaps().map_err(|e| {
        Error::Config(format!(
            "{e}; the widened support must stay a union of non-empty disjoint intervals"
        ))
    })?;
    let bound = 2.0 * sigma + spec.spikes().iter().map(|s| s.theta.abs()).sum::<f64>() + 4.0;
    let last = gaps.len() - 1;
    gaps[0].lo = -bound;
    gaps[last].hi = bound;

    let ensemble = config.ensemble(n, master_seed)?;
    let rows = replicate(config.reps, |r| {
        let s = sample_wigner(&ensemble, r)?;
        let eig = eigvals(&s.matrix)?;
        Ok((s.derived_seed, gap_census(&eig, &gaps)))
    })?;
    let mut plot = PlotData::default();
    for (r, (seed, counts)) in rows.iter().enumerate() {
        let mut rec = record([("rep", json!(r)), ("seed", json!(seed))]);
        for (k, c) in counts.iter().enumerate() {
            rec.insert(format!("count_{k}"), json!(c));
        }
        b.records.push(rec);
        plot.points.push((r as f64, counts.iter().sum::<usize>() as f64));
    }
    let reps = rows.len() as f64;
    for k in 0..gaps.len() {
        let empty = rows.iter().filter(|(_, c)| c[k] == 0).count() as f64 / reps;
        b.aggregate(format!("gap_{k}_empty_fraction"), empty);
        b.verdicts
            .push(TestVerdict::at_least(format!("gap_{k}_empty_fraction"), empty, tol.fraction));
    }
    let all_empty = rows.iter().filter(|(_, c)| c.iter().all(|&x| x == 0)).count() as f64 / reps;
    b.aggregate("all_gaps_empty_fraction", all_empty);
    b.verdicts
        .push(TestVerdict::at_least("all_gaps_empty_fraction", all_empty, tol.fraction));
    b.predict("support", to_value(&support)?);
    b.predict("gaps", to_value(&gaps)?);
    Ok(b.finish(None, Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EsdParams {
    #[serde(default = "default_esd_bins")]
    bins: usize,
}

fn default_esd_bins() -> usize {
    80
}

/// Wasserstein-1 distance of the empirical spectral distribution to the semicircle.
pub fn run_esd(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: EsdParams = config.params()?;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let n = config.n;
    let sigma = config.entry_law.sigma();
    let ensemble = config.ensemble(n, master_seed)?;
    let rows = replicate(config.reps, |r| {
        let s = sample_wigner(&ensemble, r)?;
        let eig = eigvals(&s.matrix)?;
        let w1 = wasserstein1_semicircle(&EmpiricalSample::new(eig.clone())?, sigma)?;
        Ok((s.derived_seed, w1, eig))
    })?;
    for (r, (seed, w1, _)) in rows.iter().enumerate() {
        b.records
            .push(record([("rep", json!(r)), ("seed", json!(seed)), ("w1", json!(w1))]));
    }
    let w: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let med = median(&w);
    b.aggregate("w1_median", med);
    b.aggregate("w1_mean", mean(&w));
    b.aggregate("w1_max", w.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    if n >= ESD_SIZE_FLOOR {
        b.verdicts.push(TestVerdict::at_most("w1_median", med, tol.w1));
    } else {
        b.notes.push(format!(
            "N = {n} is below the size floor {ESD_SIZE_FLOOR}; the report carries no verdict"
        ));
    }
    b.predict("sigma", sigma);
    b.predict("size_floor", ESD_SIZE_FLOOR as u64);
    let pooled: Vec<f64> = rows.iter().flat_map(|r| r.2.iter().copied()).collect();
    let lo = pooled.iter().copied().fold(-2.0 * sigma, f64::min);
    let hi = pooled.iter().copied().fold(2.0 * sigma, f64::max);
    let plot = histogram(&pooled, params.bins, lo, hi);
    Ok(b.finish(None, Some(plot)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadParams {
    matrix: MatrixKind,
    #[serde(default = "default_bs_grid")]
    bs_grid: Vec<usize>,
    #[serde(default)]
    bs_reps: Option<usize>,
    #[serde(default = "default_quad_bins")]
    bins: usize,
}

fn default_bs_grid() -> Vec<usize> {
    vec![50, 200, 800]
}

fn default_quad_bins() -> usize {
    60
}

/// Quadratic-form CLT and the second-moment bound.
pub fn run_quadform(config: &ExperimentConfig, master_seed: u64) -> Result<RunOutput> {
    let params: QuadParams = config.params()?;
    let mut b = ReportBuilder::new(config, master_seed);
    let tol = config.tolerances();
    let spec = QuadFormSpec::new(params.matrix.clone(), config.n, config.entry_law.clone(), config.field)?;
    let mc = mc_quadform(&spec, config.reps, mix64(master_seed, 0), tol.ks)?;
    let v_sq = mc.prediction.v_sq;
    for (r, x) in mc.values.iter().enumerate() {
        b.records.push(record([("rep", json!(r)), ("value", json!(x))]));
    }
    b.aggregate("sample_variance", mc.sample_variance);
    b.aggregate("sample_mean", mc.sample_mean);
    if v_sq > 0.0 {
        b.verdicts.push(TestVerdict::at_most(
            "var_rel",
            (mc.sample_variance - v_sq).abs() / v_sq,
            tol.var_rel,
        ));
        if let Some(ks) = mc.ks_vs_gaussian.clone() {
            b.aggregate("ks_vs_gaussian", ks.statistic);
            b.verdicts.push(ks);
        }
    } else {
        b.verdicts
            .push(TestVerdict::at_most("variance_exact_zero", mc.sample_variance, 0.0));
        b.notes
            .push("predicted variance is zero: KS against a Gaussian is skipped".into());
    }
    let bs_reps = params.bs_reps.unwrap_or(config.reps).max(MIN_REPS);
    let mut ratios = Vec::with_capacity(params.bs_grid.len());
    for &n in &params.bs_grid {
        let s = spec.with_n(n)?;
        let ratio = bai_silverstein_ratio(&s, bs_reps, mix64(master_seed, 1 + n as u64))?;
        b.aggregate(format!("bs_ratio_n_{n}"), ratio);
        ratios.push(ratio);
    }
    if !ratios.is_empty() {
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        b.verdicts.push(TestVerdict::at_most("bai_silverstein_max", max, tol.bs_k));
    }
    b.predict("clt", to_value(&mc.prediction)?);
    b.predict("bs_grid", to_value(&params.bs_grid)?);
    b.predict("bs_reps", bs_reps as u64);
    let plot = if v_sq > 0.0 {
        histogram_auto(&mc.values, params.bins)
    } else {
        PlotData {
            points: vec![(0.0, 1.0)],
        }
    };
    Ok(b.finish(None, Some(plot)))
}
