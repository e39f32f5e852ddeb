//! Deterministic CSV/JSON emission.
//!
//! Floats are written with 15 significant digits in scientific notation,
//! `.` as decimal separator and `\n` line endings, so identical inputs give
//! byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::independence::HeuristicResult;
use crate::typical::Block;

/// `x` with 15 significant digits; empty for `NaN` (missing value).
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.14e}")
    }
}

/// Anything that can be written as one CSV row under a fixed header.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<W: Write, R: CsvRecord>(out: W, rows: &[R]) -> std::io::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(R::header())?;
    for row in rows {
        writer.write_record(row.fields())?;
    }
    writer.flush()
}

pub fn csv_string<R: CsvRecord>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Reproducibility record written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<C: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub config: C,
    pub output: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl<C: Serialize> Sidecar<C> {
    pub fn new(command: &str, config: C, output: &Path, rows: usize) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            config,
            output: output.display().to_string(),
            rows,
            summary: None,
        }
    }

    pub fn with_summary(mut self, summary: serde_json::Value) -> Self {
        self.summary = Some(summary);
        self
    }

    /// Path of the sidecar for `output`: `<output>.meta.json`.
    pub fn path_for(output: &Path) -> std::path::PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".meta.json");
        name.into()
    }

    pub fn write(&self, output: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(Self::path_for(output), text + "\n")
    }
}

impl CsvRecord for HeuristicResult {
    fn header() -> &'static [&'static str] {
        &["lnI", "N"]
    }

    fn fields(&self) -> Vec<String> {
        vec![fmt_float(self.log_estimate), self.total.to_string()]
    }
}

impl CsvRecord for Block {
    fn header() -> &'static [&'static str] {
        &["row_margin", "col_margin", "z", "multiplicity"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.row_margin.to_string(),
            self.col_margin.to_string(),
            fmt_float(self.value),
            self.multiplicity.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Row(f64, f64);

    impl CsvRecord for Row {
        fn header() -> &'static [&'static str] {
            &["a", "b"]
        }
        fn fields(&self) -> Vec<String> {
            vec![fmt_float(self.0), fmt_float(self.1)]
        }
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_float(0.5), "5.00000000000000e-1");
        assert_eq!(fmt_float(-0.026856448685790294), "-2.68564486857903e-2");
        assert_eq!(fmt_float(f64::NAN), "");
        assert_eq!(fmt_float(0.0), "0.00000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let text = csv_string(&[Row(1.0, 2.0)]);
        assert_eq!(text, "a,b\n1.00000000000000e0,2.00000000000000e0\n");
        let back: f64 = "-2.68564486857903e-2".parse().unwrap();
        assert!((back + 0.026856448685790294).abs() < 1e-16);
    }
}
