//! Scenario-driven front end for `combbeam`: TOML scenarios in, CSV tables out.

pub mod commands;
pub mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{cmd_calibrate, cmd_phase_map, cmd_simulate, cmd_sweep, CalibrationReport};
pub use config::{parse_config, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(#[from] combbeam::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// In-memory CSV table, written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    text: String,
    rows: usize,
}

/// A CSV cell.
pub enum Cell {
    F(f64),
    U(usize),
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), text: header.join(",") + "\n", rows: 0 }
    }

    pub fn push(&mut self, cells: &[Cell]) {
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&fmt_f64(*x)),
                Cell::U(n) => write!(self.text, "{n}").unwrap(),
            }
        }
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Writes every table through a temporary file in `dir` and renames it into
/// place, so readers never see a half-written file.
pub fn write_tables(dir: &Path, tables: &[Table]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged = Vec::with_capacity(tables.len());
    for t in tables {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        tmp.write_all(t.text.as_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        staged.push((tmp, dir.join(&t.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        written.push(path);
    }
    Ok(written)
}

/// Caps rayon's global pool at `COMBBEAM_THREADS` when that is set.
pub fn init_threads_from_env() -> Result<(), CliError> {
    let Ok(value) = std::env::var("COMBBEAM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("COMBBEAM_THREADS: expected a positive integer, got {value:?}")))?;
    // a pool that is already built keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 5e-6, 19.0008e9, -45.000000000001, 1.0 / 3.0, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(5e-6), "5e-6");
        assert_eq!(fmt_f64(2.0), "2.0");
    }

    #[test]
    fn tables_land_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("a.csv", &["x", "k"]);
        t.push(&[Cell::F(0.25), Cell::U(3)]);
        let paths = write_tables(dir.path(), &[t]).unwrap();
        assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), "x,k\n0.25,3\n");
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 1);
        assert_eq!(CliError::Runtime(combbeam::Error::NoIsolatedPeak).exit_code(), 2);
        let io = CliError::io(Path::new("x"), std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 3);
    }
}
