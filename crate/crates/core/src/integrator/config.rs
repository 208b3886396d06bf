use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oldroyd::SystemParams;

use super::scheme::Scheme;

/// Initial data families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `u = A(−cos x₁ sin x₂, sin x₁ cos x₂)`, `τ = 0`.
    TaylorGreen { amplitude: f64 },
    /// `u = (A sin(k x₂), 0)`, `τ = 0`.
    Shear { amplitude: f64, wavenumber: u32 },
    /// Random-phase fields with `|û(k)| ∝ |k|^{−decay}` scaled to RMS
    /// `amplitude`; the stress has the same law and RMS `tau_amplitude`.
    RandomSolenoidal {
        decay: f64,
        amplitude: f64,
        tau_amplitude: f64,
        seed: u64,
    },
    /// A velocity record optionally followed by a stress record.
    File { path: PathBuf },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::TaylorGreen { .. } => "taylor_green",
            InitialCondition::Shear { .. } => "shear",
            InitialCondition::RandomSolenoidal { .. } => "random_solenoidal",
            InitialCondition::File { .. } => "file",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub params: SystemParams,
    pub dt: f64,
    pub t_end: f64,
    pub diag_every: usize,
    /// Steps between checkpoints; `0` writes none.
    pub checkpoint_every: usize,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 64,
            params: SystemParams::default(),
            dt: 1e-3,
            t_end: 1.0,
            diag_every: 10,
            checkpoint_every: 0,
            initial_condition: InitialCondition::RandomSolenoidal {
                decay: 3.0,
                amplitude: 0.1,
                tau_amplitude: 0.1,
                seed: 1,
            },
            scheme: Scheme::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || self.n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "n = {} must be even and >= 16",
                self.n
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter("dt must be positive".into()));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Parameter("t_end must be nonnegative".into()));
        }
        if self.diag_every == 0 {
            return Err(Error::Parameter("diag_every must be at least 1".into()));
        }
        self.params.validate()?;
        if !(self.params.nu > 0.0) || self.params.alpha < 1.0 {
            return Err(Error::Parameter(
                "runs need nu > 0 and alpha >= 1 so that the Γ diagnostics exist".into(),
            ));
        }
        match &self.initial_condition {
            InitialCondition::TaylorGreen { amplitude }
            | InitialCondition::Shear { amplitude, .. }
                if !amplitude.is_finite() =>
            {
                Err(Error::Parameter("amplitude must be finite".into()))
            }
            InitialCondition::RandomSolenoidal {
                decay,
                amplitude,
                tau_amplitude,
                ..
            } if !(decay.is_finite() && *amplitude >= 0.0 && *tau_amplitude >= 0.0) => {
                Err(Error::Parameter(
                    "random initial data needs finite decay and amplitudes >= 0".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Number of steps: `t_end/dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}
