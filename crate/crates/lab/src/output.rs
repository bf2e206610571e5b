use std::path::{Path, PathBuf};

use lpideal::bounds::decay_exponent_r;
use lpideal::functionals::{loglog_slope, DecayTable, FunctionalKind};
use lpideal::json::{self, fmt_f64};
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Slack allowed above the reference slope `−r·α` in plot summaries.
pub const SLOPE_SLACK: f64 = 0.15;

/// Writes result files into one directory and remembers their names.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    notes: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Output, LabError> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new(), notes: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// A line for the console summary.
    pub fn note(&mut self, line: String) {
        self.notes.push(line);
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let text = json::to_string(value).map_err(|e| LabError::Config(format!("serializing {name}: {e}")))?;
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
        self.record(name);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
        let path = self.path(name);
        write_csv(&path, header, rows)?;
        self.record(name);
        Ok(())
    }

    pub fn plot(&mut self, name: &str, table: &DecayTable) -> Result<PlotSummary, LabError> {
        let summary = emit_plot_data(table, &self.path(name))?;
        self.record(name);
        self.record(&slope_file_name(name));
        Ok(summary)
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
    let csv_err = |e: csv::Error| LabError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn f(v: f64) -> String {
    fmt_f64(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSummary {
    pub points: usize,
    /// Least-squares slope of `ln measured` against `ln n`; absent when
    /// fewer than two points are usable.
    pub slope: Option<f64>,
    pub slope_defined: bool,
    /// `−r·(2−u)/2` with `u = p` for `Φ` and `u = q′` for `Ψ`.
    pub reference_slope: Option<f64>,
    pub slack: f64,
    pub within_slack: Option<bool>,
}

fn slope_file_name(name: &str) -> String {
    let stem = name.strip_suffix(".csv").unwrap_or(name);
    format!("{stem}_slope.json")
}

fn reference_slope(table: &DecayTable) -> Option<f64> {
    let u = match table.kind {
        FunctionalKind::Phi => table.p.value(),
        FunctionalKind::Psi => table.q.dual().value(),
    };
    decay_exponent_r(2.0, u).ok().map(|r| -r * (2.0 - u) / 2.0)
}

/// Writes `(n, measured, bound)` with the per-`n` median of the measured
/// values, and a sidecar `<stem>_slope.json` with the fitted log–log slope.
pub fn emit_plot_data(table: &DecayTable, path: &Path) -> Result<PlotSummary, LabError> {
    if table.summary.is_empty() {
        return Err(LabError::Config("cannot plot an empty decay table".into()));
    }
    let rows: Vec<Vec<String>> = table.summary.iter().map(|s| vec![s.n.to_string(), f(s.median), f(s.bound)]).collect();
    write_csv(path, &["n", "measured", "bound"], &rows)?;
    let points: Vec<(f64, f64)> = table.summary.iter().map(|s| (s.n as f64, s.median)).collect();
    let slope = loglog_slope(&points);
    let reference = reference_slope(table);
    let summary = PlotSummary {
        points: points.len(),
        slope,
        slope_defined: slope.is_some(),
        reference_slope: reference,
        slack: SLOPE_SLACK,
        within_slack: slope.zip(reference).map(|(s, r)| s <= r + SLOPE_SLACK),
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("plot.csv");
    let side = path.with_file_name(slope_file_name(name));
    let text = json::to_string(&summary).map_err(|e| LabError::Config(e.to_string()))?;
    std::fs::write(&side, text).map_err(|e| LabError::io(&side, e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpideal::functionals::DecaySummary;
    use lpideal::Exponent;

    fn table(points: &[(usize, f64)]) -> DecayTable {
        DecayTable {
            kind: FunctionalKind::Phi,
            p: Exponent::new(1.5).unwrap(),
            q: Exponent::new(3.0).unwrap(),
            rows: Vec::new(),
            summary: points.iter().map(|&(n, v)| DecaySummary { n, c: 1.0, bound: 1.0, median: v, max: v }).collect(),
            slope: None,
            notes: Vec::new(),
        }
    }

    #[test]
    fn plot_slopes() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        assert!(emit_plot_data(&table(&[]), &dir.join("a.csv")).is_err());
        let one = emit_plot_data(&table(&[(3, 0.2)]), &dir.join("b.csv")).unwrap();
        assert!(!one.slope_defined && one.within_slack.is_none());
        let flat = emit_plot_data(&table(&[(1, 0.5), (2, 0.5), (4, 0.5)]), &dir.join("c.csv")).unwrap();
        assert!(flat.slope.unwrap().abs() < 1e-15);
        assert!(dir.join("c_slope.json").exists());
        let text = std::fs::read_to_string(dir.join("c.csv")).unwrap();
        assert!(text.starts_with("n,measured,bound\n1,5.0000000000000000e-1,"));
    }
}
