//! Report types shared by every study.

use serde::{Deserialize, Serialize};

/// Version of the report and CSV layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// A table cell. Non-finite numbers are stored as text so reports stay valid JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn num(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else if x.is_nan() {
            Cell::Text("nan".into())
        } else if x > 0.0 {
            Cell::Text("inf".into())
        } else {
            Cell::Text("-inf".into())
        }
    }

    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::num)
    }

    pub fn int(x: impl TryInto<i64>) -> Self {
        Cell::Int(x.try_into().unwrap_or(i64::MAX))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(t) => match t.as_str() {
                "inf" => Some(f64::INFINITY),
                "-inf" => Some(f64::NEG_INFINITY),
                "nan" => Some(f64::NAN),
                _ => None,
            },
            Cell::Missing => None,
        }
    }

    /// CSV rendering: floats in `%.16e`, text quoted when needed.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(t) => csv_escape(t),
            Cell::Missing => String::new(),
        }
    }
}

pub(crate) fn csv_escape(t: &str) -> String {
    if t.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells are skipped.
    pub fn column(&self, name: &str) -> Vec<f64> {
        match self.column_index(name) {
            Some(i) => self.rows.iter().filter_map(|r| r[i].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::to_csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reference: Option<f64>,
}

/// A plot-ready series: `(x, y, ci_low, ci_high, reference)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub reference_label: String,
    pub points: Vec<PlotPoint>,
}

impl Plot {
    pub fn new(name: &str, x_label: &str, y_label: &str, reference_label: &str) -> Self {
        Self {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            reference_label: reference_label.into(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64, ci: (f64, f64), reference: Option<f64>) {
        self.points.push(PlotPoint {
            x,
            y,
            ci_low: ci.0,
            ci_high: ci.1,
            reference: reference.filter(|r| r.is_finite()),
        });
    }

    pub fn to_csv(&self) -> String {
        let mut out = [
            self.x_label.as_str(),
            self.y_label.as_str(),
            "ci_low",
            "ci_high",
            self.reference_label.as_str(),
        ]
        .map(csv_escape)
        .join(",");
        out.push('\n');
        for p in &self.points {
            let row = [
                Cell::num(p.x),
                Cell::num(p.y),
                Cell::num(p.ci_low),
                Cell::num(p.ci_high),
                Cell::opt(p.reference),
            ];
            out.push_str(&row.iter().map(Cell::to_csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// A least-squares slope with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    /// Absent with fewer than three points.
    pub slope_se: Option<f64>,
    pub points: usize,
}

impl Fit {
    pub fn from_linear(name: &str, f: crate::stats::LinearFit) -> Self {
        Self {
            name: name.into(),
            slope: f.slope,
            intercept: f.intercept,
            slope_se: Some(f.slope_se).filter(|s| s.is_finite()),
            points: f.points,
        }
    }
}

/// A fitted or derived scalar, absent when the data do not determine it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub value: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A deterministic statement; failure means a bug or a false inequality.
    Invariant,
    /// A statistical expectation; failure is reported but is not an error.
    Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
}

/// Samples left out of a statistic, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub name: String,
    pub count: u64,
    pub total: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub fits: Vec<Fit>,
    pub constants: Vec<Constant>,
    pub exclusions: Vec<Exclusion>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config,
            tables: Vec::new(),
            plots: Vec::new(),
            fits: Vec::new(),
            constants: Vec::new(),
            exclusions: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn plot(&self, name: &str) -> Option<&Plot> {
        self.plots.iter().find(|p| p.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&Fit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).and_then(|c| c.value)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_invariants(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Invariant && !c.passed)
            .collect()
    }

    pub(crate) fn add_check(&mut self, name: &str, kind: CheckKind, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            kind,
            passed,
            detail: detail.into(),
        });
    }

    pub(crate) fn add_constant(&mut self, name: &str, value: Option<f64>, note: &str) {
        self.constants.push(Constant {
            name: name.into(),
            value: value.filter(|v| v.is_finite()),
            note: note.into(),
        });
    }

    pub(crate) fn add_exclusion(&mut self, name: &str, count: u64, total: u64, reason: &str) {
        self.exclusions.push(Exclusion {
            name: name.into(),
            count,
            total,
            reason: reason.into(),
        });
    }

    /// Constants and fits, the content of the plot sidecar file.
    pub fn fitted_summary(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "fits": self.fits,
            "constants": self.constants,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render_and_roundtrip() {
        assert_eq!(Cell::num(0.1).to_csv(), "1.0000000000000001e-1");
        assert_eq!(Cell::num(f64::INFINITY), Cell::Text("inf".into()));
        assert_eq!(Cell::text("a,b").to_csv(), "\"a,b\"");
        let row = vec![Cell::Int(3), Cell::Num(3.0), Cell::text("x"), Cell::Missing];
        let json = serde_json::to_string(&row).unwrap();
        assert_eq!(json, "[3,3.0,\"x\",null]");
        let back: Vec<Cell> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, row);
    }

    #[test]
    fn empty_plot_is_header_only() {
        let p = Plot::new("tail", "epsilon", "p_hat", "edelman_ref");
        assert_eq!(p.to_csv(), "epsilon,p_hat,ci_low,ci_high,edelman_ref\n");
    }
}
