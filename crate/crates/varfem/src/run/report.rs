//! Structured run reports and deterministic file output.
//!
//! Reports serialize with fixed field order and are written atomically
//! (temporary file plus rename). CSV output follows RFC 4180 with CRLF
//! terminators, a header row, and 17 significant digits.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    /// A check that passes when the measurement is at most the tolerance.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
            detail: String::new(),
        }
    }

    /// A negative control: passes when the measurement exceeds the threshold.
    pub fn exceeds(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: threshold,
            passed: measured.is_finite() && measured > threshold,
            detail: "negative control: must exceed the threshold".into(),
        }
    }

    /// A check on a value lying inside a closed interval.
    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: hi,
            passed: measured.is_finite() && measured >= lo && measured <= hi,
            detail: format!("must lie in [{lo}, {hi}]"),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub dofs: usize,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub step_sizes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub tables: Vec<Table>,
    pub solve: Option<SolveSummary>,
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            checks: Vec::new(),
            tables: Vec::new(),
            solve: None,
            outputs: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push_check(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    /// Serialize to JSON and write atomically into `dir/report.json`.
    pub fn write_json(&mut self, dir: &Path) -> std::io::Result<()> {
        if !self.outputs.iter().any(|o| o == "report.json") {
            self.outputs.push("report.json".into());
        }
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        write_atomic(&dir.join("report.json"), text.as_bytes())
    }
}

/// Format a float with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write an RFC 4180 CSV (header row, CRLF, `.` decimal separator) atomically.
pub fn write_csv(
    path: &Path,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut builder = csv::WriterBuilder::new();
    builder.terminator(csv::Terminator::CRLF);
    let mut writer = builder.from_writer(Vec::new());
    writer.write_record(columns)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    let data = writer
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(path, &data)
}

/// Write bytes to a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_has_seventeen_significant_digits() {
        let s = sig17(std::f64::consts::PI);
        // mantissa "3." plus 16 digits
        assert!(s.starts_with("3.1415926535897931"), "{s}");
    }

    #[test]
    fn checks_classify_correctly() {
        assert!(CheckResult::at_most("a", 1e-10, 1e-8).passed);
        assert!(!CheckResult::at_most("a", 1e-6, 1e-8).passed);
        assert!(CheckResult::exceeds("b", 1e-2, 1e-4).passed);
        assert!(!CheckResult::exceeds("b", 1e-6, 1e-4).passed);
        assert!(CheckResult::within("c", 2.0, 1.8, 2.2).passed);
        assert!(!CheckResult::at_most("d", f64::NAN, 1.0).passed);
    }

    #[test]
    fn csv_is_rfc4180_with_crlf() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            vec![vec![sig17(1.0), sig17(0.5)]].into_iter(),
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\r\n"));
        assert!(text.starts_with("a,b\r\n"));
    }
}
