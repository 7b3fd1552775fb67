//! Subcommand dispatch: run, write tables, append the run log.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};

use crate::bench;
use crate::config::ExperimentConfig;
use crate::dataset;
use crate::functions::TestFunction;
use crate::output::{append_run_log, write_records, write_table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    RmseBench,
    CoverageBench,
    Mse2dBench,
    Sweep,
    Cv,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::RmseBench => "rmse-bench",
            Command::CoverageBench => "coverage-bench",
            Command::Mse2dBench => "mse2d-bench",
            Command::Sweep => "sweep",
            Command::Cv => "cv",
        }
    }
}

/// Runs `command` and returns the files it wrote.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let start = Instant::now();
    let outputs = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()?
            .install(|| dispatch(command, cfg))?,
        None => dispatch(command, cfg)?,
    };
    append_run_log(
        &cfg.out,
        command.name(),
        cfg,
        &outputs,
        start.elapsed().as_secs_f64(),
    )?;
    Ok(outputs)
}

fn dispatch(command: Command, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let out = &cfg.out;
    let table = |name: &str, records: Vec<bench::Record>| -> Result<Vec<PathBuf>> {
        let path = out.join(name);
        write_records(&path, &records)?;
        Ok(vec![path])
    };
    match command {
        Command::RmseBench => table("rmse.csv", bench::run_rmse_benchmark(cfg)?),
        Command::CoverageBench => table("coverage.csv", bench::run_coverage_benchmark(cfg)?),
        Command::Mse2dBench => table("mse2d.csv", bench::run_mse2d_benchmark(cfg)?),
        Command::Sweep => table("sweep.csv", bench::run_sample_size_sweep(cfg)?),
        Command::Cv => table("cv.csv", dataset::run_cv(cfg)?),
        Command::Fit => {
            if let Some(path) = &cfg.dataset {
                let outcome = dataset::fit_csv(path, cfg)?;
                let mut files = table("fit.csv", outcome.records)?;
                let json = out.join("fit.json");
                std::fs::write(
                    &json,
                    serde_json::to_string_pretty(&outcome.artifact)? + "\n",
                )?;
                files.push(json);
                let pred = out.join("fit_predictions.csv");
                write_table(&pred, &outcome.predictions.0, &outcome.predictions.1)?;
                files.push(pred);
                Ok(files)
            } else {
                let fs = cfg.function_list(&[])?;
                let [f]: [TestFunction; 1] = match fs.try_into() {
                    Ok(v) => v,
                    Err(_) => bail!("fit needs a dataset or exactly one test function"),
                };
                let (header, rows) = dataset::fit_function_curves(f, cfg)?;
                let path = out.join(format!("curve_{}.csv", f.name()));
                write_table(&path, &header, &rows)?;
                Ok(vec![path])
            }
        }
    }
}
