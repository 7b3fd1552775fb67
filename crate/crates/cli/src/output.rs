//! Result tables and the run log.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::bench::Record;
use crate::config::ExperimentConfig;

pub fn write_records(path: &Path, records: &[Record]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows of plain numbers under a header.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LogLine<'a> {
    command: &'a str,
    outputs: Vec<String>,
    wall_seconds: f64,
    config: &'a ExperimentConfig,
}

/// Appends one JSON line describing a finished run to `runlog.jsonl`.
pub fn append_run_log(
    out: &Path,
    command: &str,
    cfg: &ExperimentConfig,
    outputs: &[PathBuf],
    wall_seconds: f64,
) -> Result<()> {
    fs::create_dir_all(out)?;
    let line = LogLine {
        command,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_seconds,
        config: cfg,
    };
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out.join("runlog.jsonl"))?;
    writeln!(f, "{}", serde_json::to_string(&line)?)?;
    Ok(())
}
