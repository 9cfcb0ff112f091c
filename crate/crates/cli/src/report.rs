use std::io::Write;
use std::path::{Path, PathBuf};

use rskyline_core::skyline::ProgressSample;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// First line of every CSV the tool writes.
pub const SCHEMA_LINE: &str = "# rskyline-kit v1";

pub const COLUMNS: [&str; 15] = [
    "scope",
    "engine",
    "k",
    "batch_size",
    "candidate",
    "influence",
    "status",
    "reads_product",
    "reads_customer",
    "total_io",
    "dominance_checks",
    "verified",
    "joint_score",
    "chosen",
    "wall_ms",
];

/// One report line. Empty optionals render as empty cells.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub scope: &'static str,
    pub engine: &'static str,
    pub k: Option<usize>,
    pub batch_size: Option<usize>,
    pub candidate: Option<u64>,
    pub influence: Option<usize>,
    pub status: &'static str,
    pub reads_product: u64,
    pub reads_customer: u64,
    pub dominance_checks: u64,
    pub verified: Option<bool>,
    pub joint_score: Option<usize>,
    pub chosen: Option<Vec<u64>>,
    pub wall_ms: f64,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl Row {
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.scope.to_string(),
            self.engine.to_string(),
            opt(self.k),
            opt(self.batch_size),
            opt(self.candidate),
            opt(self.influence),
            self.status.to_string(),
            self.reads_product.to_string(),
            self.reads_customer.to_string(),
            (self.reads_product + self.reads_customer).to_string(),
            self.dominance_checks.to_string(),
            opt(self.verified.map(|v| if v { "pass" } else { "fail" })),
            opt(self.joint_score),
            self.chosen
                .as_ref()
                .map(|ids| ids.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))
                .unwrap_or_default(),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn report() -> Self {
        Table::new(&COLUMNS)
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn extend_progress(&mut self, prefix: &[String], samples: &[ProgressSample]) {
        for s in samples {
            let mut row = prefix.to_vec();
            row.push(s.total_io.to_string());
            row.push(s.results_emitted.to_string());
            self.rows.push(row);
        }
    }

    fn write_to(&self, out: impl Write) -> Result<(), CliError> {
        let mut out = out;
        writeln!(out, "{SCHEMA_LINE}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `table` to `path` through a temporary file in the same directory
/// and a rename, or to stdout when `path` is `None`.
pub fn write_table(path: Option<&Path>, table: &Table) -> Result<(), CliError> {
    match path {
        None => {
            let stdout = std::io::stdout();
            table.write_to(stdout.lock())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = NamedTempFile::new_in(&dir)?;
            table.write_to(tmp.as_file_mut())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| CliError::Runtime(e.error.into()))?;
            Ok(())
        }
    }
}

/// `<out>.progress.csv` next to the report.
pub fn progress_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".progress.csv");
    PathBuf::from(name)
}
