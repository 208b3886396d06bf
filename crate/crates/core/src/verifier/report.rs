use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Relative size below which a left-hand side counts as exactly zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Default ratio growth tolerated between the first and any later sweep point.
pub const DEFAULT_SLACK: f64 = 2.0;

pub const PERIODIC_CAVEAT: &str =
    "estimate stated on the whole plane; constants measured on the periodic box";

/// `lhs / rhs`, with `0` whenever `lhs` is negligible against `scale`
/// (degenerate inputs) and `+∞` for a nonzero `lhs` over a vanishing `rhs`.
pub fn safe_ratio(lhs: f64, rhs: f64, scale: f64) -> f64 {
    if lhs.abs() <= ZERO_TOL * scale.abs() || lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Which side of the inequality the measured ratio must stay on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `LHS ≤ C·RHS`: the largest ratio must not grow along a sweep.
    Upper,
    /// `LHS ≥ c·RHS`: the smallest ratio must stay positive and not decay.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRatio {
    pub seed: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub median_ratio: f64,
}

/// A sweep along a parameter other than the resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSweep {
    pub axis: String,
    pub n: usize,
    pub points: Vec<ParameterPoint>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub value: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub bound: Bound,
    pub params: Value,
    pub ensemble_size: usize,
    pub slack_factor: f64,
    /// Per-sample ratios at the finest resolution.
    pub samples: Vec<SampleRatio>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub sweep: Vec<SweepPoint>,
    pub parameter_sweep: Option<ParameterSweep>,
    pub warnings: Vec<String>,
    pub caveat: String,
    pub verdict: String,
    pub pass: bool,
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn extremes(values: &[f64]) -> (f64, f64) {
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max, if values.is_empty() { 0.0 } else { min })
}

pub(crate) fn sweep_point(n: usize, ratios: &[f64]) -> SweepPoint {
    let (max_ratio, min_ratio) = extremes(ratios);
    SweepPoint {
        n,
        max_ratio,
        min_ratio,
        median_ratio: median(ratios),
    }
}

pub(crate) fn parameter_point(value: f64, ratios: &[f64]) -> ParameterPoint {
    let (max_ratio, min_ratio) = extremes(ratios);
    ParameterPoint {
        value,
        max_ratio,
        min_ratio,
    }
}

/// Upper bounds: every later point stays within `slack` of the first.
/// Lower bounds: every point is positive and at least `1/slack` of the first.
pub(crate) fn sweep_passes(bound: Bound, series: &[(f64, f64)], slack: f64) -> bool {
    let Some(&(first_max, first_min)) = series.first() else {
        return false;
    };
    match bound {
        Bound::Upper => series
            .iter()
            .all(|&(max, _)| max.is_finite() && max <= slack * first_max),
        Bound::Lower => series
            .iter()
            .all(|&(_, min)| min > 0.0 && min.is_finite() && min * slack >= first_min),
    }
}

impl EstimateReport {
    pub(crate) fn assemble(
        estimate_id: &str,
        bound: Bound,
        params: Value,
        slack: f64,
        seeds: &[u64],
        sweep_ratios: Vec<(usize, Vec<f64>)>,
        parameter_sweep: Option<ParameterSweep>,
        warnings: Vec<String>,
    ) -> Self {
        let sweep: Vec<SweepPoint> = sweep_ratios
            .iter()
            .map(|(n, r)| sweep_point(*n, r))
            .collect();
        let finest = sweep_ratios
            .last()
            .map(|(_, r)| r.clone())
            .unwrap_or_default();
        let samples = seeds
            .iter()
            .zip(&finest)
            .map(|(&seed, &ratio)| SampleRatio { seed, ratio })
            .collect();
        let (max_ratio, min_ratio) = extremes(&finest);
        let series: Vec<(f64, f64)> = sweep.iter().map(|p| (p.max_ratio, p.min_ratio)).collect();
        let pass =
            sweep_passes(bound, &series, slack) && parameter_sweep.as_ref().is_none_or(|p| p.pass);
        let verdict = if pass {
            "consistent with a uniform constant".to_string()
        } else {
            match bound {
                Bound::Upper => "ratio grows beyond the slack factor".to_string(),
                Bound::Lower => "ratio decays beyond the slack factor".to_string(),
            }
        };
        Self {
            estimate_id: estimate_id.to_string(),
            bound,
            params,
            ensemble_size: seeds.len(),
            slack_factor: slack,
            samples,
            max_ratio,
            min_ratio,
            median_ratio: median(&finest),
            sweep,
            parameter_sweep,
            warnings,
            caveat: PERIODIC_CAVEAT.to_string(),
            verdict,
            pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
