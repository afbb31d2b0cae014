//! Experiment reports and their TSV / JSON / SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::stats::{StatsError, TestResult};

/// One table cell. Undefined reals print as `NA`.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Count(u64),
    Real(Option<f64>),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn real(x: f64) -> Self {
        Cell::Real(x.is_finite().then_some(x))
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Cell::Real(x) => *x,
            Cell::Count(n) => Some(*n as f64),
            Cell::Text(_) => None,
        }
    }

    fn tsv(&self) -> String {
        match self {
            Cell::Text(s) => s.replace(['\t', '\n'], " "),
            Cell::Count(n) => n.to_string(),
            Cell::Real(None) => "NA".to_string(),
            Cell::Real(Some(x)) => format_real(*x),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Real(x.filter(|v| v.is_finite()))
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Count(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Text(t) => s.serialize_str(t),
            Cell::Count(n) => s.serialize_u64(*n),
            Cell::Real(Some(x)) => s.serialize_f64(*x),
            Cell::Real(None) => s.serialize_none(),
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form for tiny or huge
/// magnitudes.
fn format_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell at `row` in column `name`.
    pub fn cell(&self, row: usize, name: &str) -> Option<&Cell> {
        self.rows.get(row).and_then(|r| r.get(self.column(name)?))
    }

    /// First row whose leading cells equal `key` as text.
    pub fn find(&self, key: &[&str]) -> Option<usize> {
        self.rows.iter().position(|r| {
            key.iter()
                .zip(r)
                .all(|(k, c)| matches!(c, Cell::Text(t) if t == k))
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::tsv).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(|c| serde_json::to_value(c).expect("cell")))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// A named test outcome; `error` is set when the test was not computable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledTest {
    pub label: String,
    #[serde(flatten)]
    pub result: Option<TestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LabeledTest {
    pub fn new(label: impl Into<String>, outcome: Result<TestResult, StatsError>) -> Self {
        let (result, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.code().to_string())),
        };
        LabeledTest {
            label: label.into(),
            result,
            error,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw an ordinary least-squares line.
    pub regression: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    /// Echo of the configuration that produced the report.
    pub config: Value,
    pub records: Table,
    pub tests: Vec<LabeledTest>,
    pub summary: BTreeMap<String, Cell>,
    pub skipped: BTreeMap<String, u64>,
    /// Secondary tables, written next to the main one.
    pub tables: BTreeMap<String, Table>,
    pub plots: Vec<Plot>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: Value, records: Table) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config,
            records,
            tests: Vec::new(),
            summary: BTreeMap::new(),
            skipped: BTreeMap::new(),
            tables: BTreeMap::new(),
            plots: Vec::new(),
        }
    }

    pub fn summarize(&mut self, key: &str, value: impl Into<Cell>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn summary_real(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Cell::as_real)
    }

    pub fn test(&self, label: &str) -> Option<&TestResult> {
        self.tests
            .iter()
            .find(|t| t.label == label)
            .and_then(|t| t.result.as_ref())
    }

    pub fn to_tsv(&self) -> String {
        self.records.to_tsv()
    }

    pub fn tests_tsv(&self) -> String {
        let mut t = Table::new(&["label", "statistic", "p_value", "method", "n", "error"]);
        for lt in &self.tests {
            let r = lt.result.as_ref();
            t.push(vec![
                Cell::text(&lt.label),
                r.map(|r| r.statistic).into(),
                r.map(|r| r.p_value).into(),
                Cell::text(r.map(|r| r.method.as_str()).unwrap_or("")),
                Cell::text(r.map(|r| r.n.as_str()).unwrap_or("")),
                Cell::text(lt.error.as_deref().unwrap_or("")),
            ]);
        }
        t.to_tsv()
    }

    pub fn to_json(&self) -> Value {
        let tables: serde_json::Map<String, Value> = self
            .tables
            .iter()
            .map(|(k, t)| (k.clone(), t.to_json()))
            .collect();
        json!({
            "name": self.name,
            "config": self.config,
            "records": self.records.to_json(),
            "tests": self.tests,
            "summary": self.summary,
            "skipped": self.skipped,
            "tables": tables,
        })
    }

    /// Writes `report.tsv`, `report.json`, `tests.tsv`, one TSV per secondary
    /// table and, with `plots`, one SVG per scatter plot.
    pub fn write_dir(&self, dir: &Path, plots: bool) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> io::Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("report.tsv".into(), self.to_tsv())?;
        let mut json = serde_json::to_string_pretty(&self.to_json()).map_err(io::Error::other)?;
        json.push('\n');
        put("report.json".into(), json)?;
        put("tests.tsv".into(), self.tests_tsv())?;
        for (name, table) in &self.tables {
            put(format!("{name}.tsv"), table.to_tsv())?;
        }
        if plots {
            for p in &self.plots {
                put(format!("{}.svg", p.name), scatter_svg(p))?;
            }
        }
        Ok(written)
    }
}

/// Least-squares slope and intercept; `None` for fewer than two distinct x.
pub fn ols(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn scatter_svg(p: &Plot) -> String {
    const W: f64 = 480.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = p.points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = p.points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = bounds(|q| q.0);
    let (y0, y1) = bounds(|q| q.1);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&p.title));
    let _ = writeln!(s, r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - M, W - M, H - M);
    let _ = writeln!(s, r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#, H - M);
    for (v, x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{v:.3}</text>"#, H - M + 16.0);
    }
    for (v, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{y:.1}" text-anchor="end">{v:.3}</text>"#, M - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(&p.x_label));
    let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, escape(&p.y_label));
    for &(x, y) in &p.points {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue" fill-opacity="0.7"/>"#, sx(x), sy(y));
    }
    if p.regression {
        if let Some((slope, icpt)) = ols(&p.points) {
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="crimson"/>"#,
                sx(x0),
                sy(slope * x0 + icpt),
                sx(x1),
                sy(slope * x1 + icpt)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
