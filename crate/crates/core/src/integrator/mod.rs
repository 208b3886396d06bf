//! Integrating-factor RK4 time stepping, run driver, diagnostics and
//! run-directory output.

mod config;
mod diagnostics;
mod initial;
mod output;
mod run;
mod scheme;

pub use config::{InitialCondition, RunConfig};
pub use diagnostics::{
    diagnose, energy_residual, gronwall_check, lq_exponent, regime_label, summarize,
    DiagnosticRecord, GronwallCheck, RunSummary, CSV_HEADER, OUTSIDE_THEORY,
};
pub use initial::initial_condition;
pub use output::{
    write_diagnostics_csv, write_metadata, write_run, RunMetadata, CHECKPOINT_PREFIX,
};
pub use run::{run, run_with, RunFailure, RunOutput};
pub use scheme::{dissipation_rate, energy, step, Scheme, Stepper};
