//! Report assembly and file output. A report body carries everything the
//! run produced — echoed config, tables, slopes, verdicts, flags — and is
//! deterministic for a fixed config and seed. Wall-clock timing lives next
//! to the body so byte-comparing bodies across runs is meaningful.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;

/// A named grid of numbers. Each table becomes one CSV file; `columns`
/// names the CSV header and `rows` are the data lines in order.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

/// A fitted log-log slope with its uncertainty and, when the run tests a
/// hypothesis about it, the target value.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeRecord {
    pub name: String,
    pub slope: f64,
    pub stderr: f64,
    pub ci95_half_width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

/// One pass/fail decision: what was measured, the tolerance it was held to,
/// and a human-readable account.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    pub fn from_margin(name: &str, observed: f64, tolerance: f64, detail: String) -> Self {
        Verdict {
            name: name.to_string(),
            passed: observed.is_finite() && observed <= tolerance,
            observed,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBody {
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Config,
    pub flags: Vec<String>,
    pub tables: Vec<Table>,
    pub slopes: Vec<SlopeRecord>,
    pub verdicts: Vec<Verdict>,
}

impl ReportBody {
    pub fn new(config: &Config) -> Self {
        ReportBody {
            experiment: config.experiment.name().to_string(),
            seed: config.seed,
            config_hash: config.fingerprint(),
            config: config.clone(),
            flags: Vec::new(),
            tables: Vec::new(),
            slopes: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Canonical bytes of the body; identical configs and seeds must yield
    /// identical bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("report body serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub body: ReportBody,
    pub timing: Timing,
}

impl Report {
    /// Writes report.json plus one CSV per table into `out_dir`, creating
    /// the directory if needed. Returns the written paths, report first.
    pub fn write_files(&self, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();

        let report_path = out_dir.join("report.json");
        let mut json = serde_json::to_vec_pretty(self).expect("report serializes");
        json.push(b'\n');
        std::fs::write(&report_path, json)?;
        written.push(report_path);

        for table in &self.body.tables {
            let path = out_dir.join(format!("{}.csv", table.name));
            let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(file, "# experiment: {}", self.body.experiment)?;
            writeln!(file, "# table: {}", table.name)?;
            writeln!(file, "# seed: {}", self.body.seed)?;
            writeln!(file, "# config_hash: {}", self.body.config_hash)?;
            writeln!(file, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(file, "{}", line.join(","))?;
            }
            file.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ExperimentKind, Overrides};

    fn body() -> ReportBody {
        let cfg = resolve(ExperimentKind::FddClt, None, Overrides::default()).unwrap();
        let mut body = ReportBody::new(&cfg);
        let mut t = Table::new("demo", &["n", "value", "se", "replicas"]);
        t.push(vec![64.0, 0.5, 0.01, 100.0]);
        t.push(vec![256.0, 0.25, 0.005, 100.0]);
        body.tables.push(t);
        body.verdicts.push(Verdict::from_margin("demo-close", 0.2, 1.0, "ok".into()));
        body
    }

    #[test]
    fn canonical_bytes_are_stable() {
        assert_eq!(body().canonical_bytes(), body().canonical_bytes());
    }

    #[test]
    fn verdict_margin_rule() {
        assert!(Verdict::from_margin("a", 1.0, 1.0, String::new()).passed);
        assert!(!Verdict::from_margin("b", 1.0001, 1.0, String::new()).passed);
        assert!(!Verdict::from_margin("c", f64::NAN, 1.0, String::new()).passed);
    }

    #[test]
    fn files_are_written_with_headers() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            body: body(),
            timing: Timing { wall_clock_seconds: 0.1, threads: 1 },
        };
        let files = report.write_files(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(&files[1]).unwrap();
        assert!(csv.starts_with("# experiment: fdd-clt\n"));
        assert!(csv.contains("\nn,value,se,replicas\n"));
        assert!(csv.contains("\n64,0.5,0.01,100\n"));
        let json = std::fs::read_to_string(&files[0]).unwrap();
        assert!(json.contains("\"config_hash\""));
        assert!(json.contains("\"wall_clock_seconds\""));
    }

    #[test]
    fn mismatched_row_width_is_refused() {
        let mut t = Table::new("demo", &["a", "b"]);
        let result = std::panic::catch_unwind(core::panic::AssertUnwindSafe(|| {
            t.push(vec![1.0]);
        }));
        assert!(result.is_err());
    }
}
