//! Artifact writers. CSV rows carry their provenance (seed, trials, version)
//! in trailing columns; JSON reports wrap the result with the resolved config.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed 17-significant-digit rendering used in every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> hyperperc::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let prov = [
            cfg.seed.map_or_else(String::new, |s| s.to_string()),
            cfg.trials.to_string(),
            VERSION.to_string(),
        ];
        let head = self.header.iter().map(String::as_str).chain(["seed", "trials", "version"]);
        w.write_record(head).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().chain(&prov)).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| hyperperc::Error::Io(e.into_error()))
    }
}

fn csv_err(e: csv::Error) -> hyperperc::Error {
    hyperperc::Error::Io(std::io::Error::other(e))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'static str,
    version: &'static str,
    seed: Option<u64>,
    trials: u64,
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub fn json<T: Serialize>(cfg: &ExperimentConfig, result: &T) -> hyperperc::Result<Vec<u8>> {
    let env = Envelope {
        command: cfg.command.name(),
        version: VERSION,
        seed: cfg.seed,
        trials: cfg.trials,
        config: cfg,
        result,
    };
    let mut out = serde_json::to_vec_pretty(&env)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> hyperperc::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
