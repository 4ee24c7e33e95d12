//! CSV tables and summary files.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// One CSV field. Reals print with 17 significant digits.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) if v.is_finite() => write!(f, "{v:.16e}"),
            Cell::Real(v) if v.is_nan() => f.write_str("nan"),
            Cell::Real(v) => f.write_str(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Text(v) => f.write_str(v),
            Cell::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A fixed-column table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Panics when the row width differs from the header: a programming
    /// error in an experiment, never a data error.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

/// A named pass/fail assertion computed from an experiment's output.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything an experiment produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Free-form result lines for the summary.
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Paths written by [`write_artifacts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

pub fn artifact_paths(dir: &Path, experiment: &str, seed: u64) -> Artifacts {
    Artifacts {
        csv: dir.join(format!("{experiment}-{seed}.csv")),
        summary: dir.join(format!("{experiment}-{seed}.summary.txt")),
    }
}

/// Summary text: header with version and timestamp, the config echo,
/// result notes, then one line per check.
pub fn render_summary(config: &ExperimentConfig, outcome: &Outcome, timestamp: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!("varmult-lab {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("generated: {timestamp}\n"));
    s.push_str("\n[config]\n");
    s.push_str(&config.to_string());
    s.push_str("\n[results]\n");
    for line in &outcome.notes {
        s.push_str(line);
        s.push('\n');
    }
    s.push_str("\n[checks]\n");
    for c in &outcome.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
    }
    let status = if outcome.passed() { "PASS" } else { "FAIL" };
    s.push_str(&format!("\noverall: {status}\n"));
    s
}

pub fn write_artifacts(config: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<Artifacts> {
    std::fs::create_dir_all(&config.output)?;
    let paths = artifact_paths(&config.output, &config.experiment, config.seed);
    std::fs::write(&paths.csv, outcome.table.to_csv()?)?;
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let mut f = std::fs::File::create(&paths.summary)?;
    f.write_all(render_summary(config, outcome, &stamp).as_bytes())?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_significant_digits() {
        assert_eq!(Cell::Real(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(
            Cell::Real(1.0 / 3.0).to_string().parse::<f64>().unwrap(),
            1.0 / 3.0
        );
        assert_eq!(Cell::Real(f64::INFINITY).to_string(), "inf");
        assert_eq!(Cell::Real(f64::NAN).to_string(), "nan");
    }

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::from("x, y"), Cell::from(2usize)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\n\"x, y\",2\n");
    }

    #[test]
    #[should_panic]
    fn ragged_rows_are_rejected() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::from(1usize)]);
    }

    #[test]
    fn summary_lists_checks() {
        let cfg = ExperimentConfig::parse("experiment = demo\nseed = 5\n", None).unwrap();
        let outcome = Outcome {
            table: Table::new(&["a"]),
            notes: vec!["note".into()],
            checks: vec![
                Check::new("ok", true, "fine"),
                Check::new("bad", false, "broken"),
            ],
        };
        let s = render_summary(&cfg, &outcome, "T");
        assert!(s.contains("experiment = demo"));
        assert!(s.contains("PASS ok: fine"));
        assert!(s.contains("FAIL bad: broken"));
        assert!(s.ends_with("overall: FAIL\n"));
        let paths = artifact_paths(Path::new("out"), "demo", 5);
        assert_eq!(paths.csv, Path::new("out/demo-5.csv"));
        assert_eq!(paths.summary, Path::new("out/demo-5.summary.txt"));
    }
}
