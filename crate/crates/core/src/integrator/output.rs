use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::diagnostics::{DiagnosticRecord, GronwallCheck, RunSummary, CSV_HEADER};
use super::run::{run_with, RunFailure, RunOutput};
use crate::error::Result;
use crate::spectral::io::write_fields;
use crate::spectral::AnyField;

pub const CHECKPOINT_PREFIX: &str = "step_";

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.to_csv())?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `metadata.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub config: RunConfig,
    /// The configuration text the run was started from, verbatim.
    pub config_text: Option<String>,
    pub regime: String,
    pub gamma_normalization: String,
    pub initial_condition: String,
    pub steps_taken: usize,
    pub checkpoint_steps: Vec<usize>,
    pub cfl: f64,
    pub wall_time_seconds: f64,
    pub summary: RunSummary,
    pub gronwall: GronwallCheck,
    pub blow_up: Option<String>,
}

pub fn write_metadata(path: &Path, meta: &RunMetadata) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, meta)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn metadata(
    config: &RunConfig,
    config_text: Option<&str>,
    out: &RunOutput,
    wall: f64,
    blow_up: Option<String>,
) -> RunMetadata {
    RunMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        config_text: config_text.map(str::to_string),
        regime: out.regime.clone(),
        gamma_normalization: "unscaled: gamma = omega - R_alpha tau".into(),
        initial_condition: config.initial_condition.name().into(),
        steps_taken: out.steps_taken,
        checkpoint_steps: out.checkpoint_steps.clone(),
        cfl: out.cfl,
        wall_time_seconds: wall,
        summary: out.summary,
        gronwall: out.gronwall,
        blow_up,
    }
}

/// Runs `config`, writing `step_{index}.o2df` checkpoints (velocity record
/// then stress record), `diagnostics.csv` and `metadata.json` into `dir`.
/// On blow-up the partial trajectory is still written. `config_text` is
/// echoed into the metadata.
pub fn write_run(
    config: &RunConfig,
    config_text: Option<&str>,
    dir: &Path,
) -> std::result::Result<RunOutput, Box<RunFailure>> {
    let start = Instant::now();
    std::fs::create_dir_all(dir).map_err(|e| Box::new(RunFailure::from(crate::Error::from(e))))?;
    let result = run_with(config, |step, state| {
        let path = dir.join(format!("{CHECKPOINT_PREFIX}{step}.o2df"));
        write_fields(
            &path,
            &[
                AnyField::Vector(state.u.clone()),
                AnyField::Tensor(state.tau.clone()),
            ],
        )
    });
    let emit = |out: &RunOutput, blow_up: Option<String>| -> Result<()> {
        write_diagnostics_csv(&dir.join("diagnostics.csv"), &out.records)?;
        let meta = metadata(
            config,
            config_text,
            out,
            start.elapsed().as_secs_f64(),
            blow_up,
        );
        write_metadata(&dir.join("metadata.json"), &meta)
    };
    match result {
        Ok(out) => {
            emit(&out, None).map_err(|e| Box::new(RunFailure::from(e)))?;
            Ok(out)
        }
        Err(failure) => {
            if let Some(partial) = &failure.partial {
                emit(partial, Some(failure.error.to_string()))
                    .map_err(|e| Box::new(RunFailure::from(e)))?;
            }
            Err(failure)
        }
    }
}
