use std::fmt;

use super::config::RunConfig;
use super::diagnostics::{
    diagnose, energy_residual, gronwall_check, regime_label, summarize, DiagnosticRecord,
    GronwallCheck, RunSummary,
};
use super::initial::initial_condition;
use super::scheme::Stepper;
use crate::error::{Error, Result};
use crate::lp::DyadicPartition;
use crate::oldroyd::State;
use crate::spectral::TorusGrid;

/// A run may stop when `‖u‖_∞` exceeds this multiple of its initial value.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticRecord>,
    /// Step indices at which checkpoints were emitted.
    pub checkpoint_steps: Vec<usize>,
    pub final_state: State,
    pub summary: RunSummary,
    pub gronwall: GronwallCheck,
    pub regime: String,
    /// Advisory `max|u|·dt·n/(2π)` over the recorded states.
    pub cfl: f64,
    pub steps_taken: usize,
}

/// A run that stopped early. `partial` holds everything up to the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Option<RunOutput>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunFailure {}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: None,
        }
    }
}

fn sup_velocity(state: &State) -> f64 {
    let a = state.u.x.to_physical();
    let b = state.u.y.to_physical();
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x * x + y * y).sqrt())
        .fold(0.0, f64::max)
}

/// Runs without checkpoint output.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutput, Box<RunFailure>> {
    run_with(config, |_, _| Ok(()))
}

/// Integrates to `t_end`, calling `on_checkpoint(step, state)` at step 0,
/// every `checkpoint_every` steps, and at the final step.
pub fn run_with(
    config: &RunConfig,
    mut on_checkpoint: impl FnMut(usize, &State) -> Result<()>,
) -> std::result::Result<RunOutput, Box<RunFailure>> {
    let fail = |e: Error| Box::new(RunFailure::from(e));
    config.validate().map_err(fail)?;
    let grid = TorusGrid::new(config.n).map_err(fail)?;
    let params = config.params;
    let partition = DyadicPartition::default();
    let stepper = Stepper::with_scheme(&grid, params, config.dt, config.scheme).map_err(fail)?;
    let mut state = initial_condition(&config.initial_condition, &grid).map_err(fail)?;
    let steps = config.steps();
    let t_end = steps as f64 * config.dt;

    let u0 = sup_velocity(&state);
    let mut cfl = u0 * config.dt * config.n as f64 / std::f64::consts::TAU;
    let mut dissipated = 0.0;
    let mut records = Vec::new();
    let mut checkpoint_steps = Vec::new();

    let record =
        |state: &State, dissipated: f64, records: &mut Vec<DiagnosticRecord>| -> Result<()> {
            let mut r = diagnose(state, &params, &partition)?;
            r.dissipated = dissipated;
            if let Some(prev) = records.last() {
                r.energy_residual = energy_residual(prev, &r, t_end);
            }
            records.push(r);
            Ok(())
        };

    let finish =
        |records: Vec<DiagnosticRecord>, checkpoint_steps, state: State, cfl, steps_taken| {
            RunOutput {
                summary: summarize(&records),
                gronwall: gronwall_check(&records, &params),
                regime: regime_label(&params),
                records,
                checkpoint_steps,
                final_state: state,
                cfl,
                steps_taken,
            }
        };

    record(&state, dissipated, &mut records).map_err(fail)?;
    if config.checkpoint_every > 0 {
        on_checkpoint(0, &state).map_err(fail)?;
        checkpoint_steps.push(0);
    }

    for s in 1..=steps {
        let outcome = stepper.step_with_dissipation(&state).and_then(|(next, d)| {
            let sup = sup_velocity(&next);
            if u0 > 0.0 && sup > BLOWUP_FACTOR * u0 {
                Err(Error::BlowUp {
                    time: state.time,
                    reason: format!("sup |u| grew from {u0:.3e} to {sup:.3e}"),
                })
            } else {
                Ok((next, d, sup))
            }
        });
        let (mut next, d, sup) = match outcome {
            Ok(v) => v,
            Err(error) => {
                let partial = finish(records, checkpoint_steps, state, cfl, s - 1);
                return Err(Box::new(RunFailure {
                    error,
                    partial: Some(partial),
                }));
            }
        };
        next.time = s as f64 * config.dt;
        state = next;
        dissipated += d;
        cfl = cfl.max(sup * config.dt * config.n as f64 / std::f64::consts::TAU);
        if s % config.diag_every == 0 || s == steps {
            record(&state, dissipated, &mut records).map_err(fail)?;
        }
        if config.checkpoint_every > 0 && (s % config.checkpoint_every == 0 || s == steps) {
            on_checkpoint(s, &state).map_err(fail)?;
            checkpoint_steps.push(s);
        }
    }
    Ok(finish(records, checkpoint_steps, state, cfl, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::InitialCondition;
    use crate::integrator::Scheme;
    use crate::oldroyd::SystemParams;

    #[test]
    fn short_run_records_and_checkpoints() {
        let cfg = RunConfig {
            n: 16,
            params: SystemParams::reduced(1.0, 0.0, 1.25, 0.0),
            dt: 1e-2,
            t_end: 0.1,
            diag_every: 3,
            checkpoint_every: 4,
            initial_condition: InitialCondition::TaylorGreen { amplitude: 1.0 },
            scheme: Scheme::IfRk4,
        };
        let mut seen = Vec::new();
        let out = run_with(&cfg, |s, _| {
            seen.push(s);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![0, 4, 8, 10]);
        let ts: Vec<f64> = out.records.iter().map(|r| (r.t * 100.0).round()).collect();
        assert_eq!(ts, vec![0.0, 3.0, 6.0, 9.0, 10.0]);
        assert!(out.records.iter().all(|r| r.is_finite()));
        assert!(out
            .records
            .windows(2)
            .all(|w| w[1].half_energy < w[0].half_energy));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.dt = 0.0;
        let err = run(&cfg).unwrap_err();
        assert_eq!(
            err.error.to_string(),
            "invalid parameter: dt must be positive"
        );
        assert!(err.partial.is_none());
    }

    #[test]
    fn blow_up_keeps_partial_trajectory() {
        // a huge explicit step on a stiff-free but strongly nonlinear field
        let cfg = RunConfig {
            n: 16,
            params: SystemParams::reduced(1e-6, 0.0, 1.0, 0.0),
            dt: 5.0,
            t_end: 500.0,
            diag_every: 1,
            checkpoint_every: 0,
            initial_condition: InitialCondition::RandomSolenoidal {
                decay: 1.0,
                amplitude: 50.0,
                tau_amplitude: 50.0,
                seed: 2,
            },
            scheme: Scheme::IfRk4,
        };
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err.error, Error::BlowUp { .. }));
        let partial = err.partial.unwrap();
        assert!(!partial.records.is_empty());
        assert!(partial.records.iter().all(|r| r.is_finite()));
    }
}
