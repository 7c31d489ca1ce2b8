use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::stats::TestVerdict;

/// One replication (or one grid point) as a flat key/value map.
pub type Record = BTreeMap<String, Value>;

/// Self-contained evidence for one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub experiment: Experiment,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub aggregates: BTreeMap<String, f64>,
    /// Analytic quantities the verdicts were computed against.
    pub predictions: BTreeMap<String, Value>,
    pub verdicts: Vec<TestVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Excluded from determinism comparisons.
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&TestVerdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Copy with the wall-clock field zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }
}

/// A CSV cell: integers print exactly, floats with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Two-column plot data with a `# x<TAB>y` header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotData {
    pub points: Vec<(f64, f64)>,
}

impl PlotData {
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# x\ty")?;
        for (x, y) in &self.points {
            writeln!(out, "{x:.16e}\t{y:.16e}")?;
        }
        Ok(())
    }
}

/// Normalized histogram: `(bin centre, density)` pairs over `[lo, hi]`.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> PlotData {
    if values.is_empty() || bins == 0 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return PlotData::default();
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len() as f64 * width;
    PlotData {
        points: counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (lo + (k as f64 + 0.5) * width, c as f64 / total))
            .collect(),
    }
}

/// Histogram over the sample range.
pub fn histogram_auto(values: &[f64], bins: usize) -> PlotData {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return histogram(values, bins, lo - 0.5, hi + 0.5);
    }
    histogram(values, bins, lo, hi)
}

/// A report together with its optional raw-sample and plot outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub csv: Option<CsvTable>,
    pub plot: Option<PlotData>,
}

impl RunOutput {
    pub fn write_report(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.report.to_json()?)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
    }

    /// Writes the CSV table; experiments without one get their records flattened.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
        match &self.csv {
            Some(table) => table.write(std::io::BufWriter::new(file)),
            None => records_table(&self.report.records).write(std::io::BufWriter::new(file)),
        }
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
        let mut out = std::io::BufWriter::new(file);
        self.plot.clone().unwrap_or_default().write(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

fn records_table(records: &[Record]) -> CsvTable {
    let mut header: Vec<String> = records
        .first()
        .map(|r| r.keys().cloned().collect())
        .unwrap_or_default();
    header.sort_by_key(|k| column_order(k));
    let mut table = CsvTable {
        header: header.clone(),
        rows: Vec::new(),
    };
    for r in records {
        table.rows.push(
            header
                .iter()
                .map(|k| match r.get(k) {
                    Some(Value::Number(n)) if n.is_u64() => Cell::Int(n.as_u64().unwrap_or(0)),
                    Some(Value::Number(n)) => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
                    Some(Value::Bool(b)) => Cell::Int(u64::from(*b)),
                    _ => Cell::Float(f64::NAN),
                })
                .collect(),
        );
    }
    table
}

/// `rep` and `seed` lead; indexed columns such as `lambda_10` sort numerically.
fn column_order(key: &str) -> (u8, String, u64) {
    let rank = match key {
        "rep" => 0,
        "seed" => 1,
        _ => 2,
    };
    match key.rsplit_once('_').and_then(|(stem, i)| Some((stem, i.parse::<u64>().ok()?))) {
        Some((stem, i)) => (rank, stem.to_string(), i),
        None => (rank, key.to_string(), 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_17_digits() {
        let mut t = CsvTable::new(&["rep", "x"]);
        t.push(vec![Cell::Int(3), Cell::Float(0.1)]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "rep,x\n3,1.0000000000000001e-1\n");
        let parsed: f64 = s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 0.1);
    }

    #[test]
    fn histogram_integrates_to_one() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 / 999.0).powi(2)).collect();
        let h = histogram(&v, 20, 0.0, 1.0);
        let width = 1.0 / 20.0;
        let mass: f64 = h.points.iter().map(|p| p.1 * width).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tsv_header() {
        let mut buf = Vec::new();
        PlotData { points: vec![(1.0, 2.0)] }.write(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("# x\ty\n"));
    }
}
