use serde::{Deserialize, Serialize};

use super::scheme::{dissipation_rate, energy};
use crate::error::Result;
use crate::lp::{besov_norm, lp_norm, lp_norm_even_exact, BesovSpec, DyadicPartition};
use crate::oldroyd::{gamma_field, GammaNormalization, State, SystemParams};
use crate::spectral::ops::{
    div, fractional_power, fractional_power_vector, tensor_gradient, vector_gradient,
};
use crate::spectral::{SpectralSymTensor, SpectralVector};

/// One row of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `½(‖u‖² + (κ/α₁)‖τ‖²)`.
    pub half_energy: f64,
    /// `ν‖Λ^αu‖²`.
    pub diss_u: f64,
    /// `(κ/α₁)(η‖Λ^βτ‖² + β₁‖τ‖²)`.
    pub diss_tau: f64,
    /// Time integral of `diss_u + diss_tau` since `t = 0`.
    pub dissipated: f64,
    /// `‖ω − R_ατ‖_{L²}`, without the `1/ν` factor.
    pub gamma_l2: f64,
    /// `‖Λ^α(ω − R_ατ)‖²`.
    pub gamma_diss: f64,
    /// Squared Besov norm of `∇u` in the regularity criterion.
    pub crit_u: f64,
    /// Squared Besov norm of `∇τ` in the regularity criterion.
    pub crit_tau: f64,
    pub tau_l2: f64,
    pub tau_l4: f64,
    pub tau_lq: f64,
    pub lq_exponent: u32,
    /// `‖u‖²_{H^α} = ‖u‖² + ‖Λ^αu‖²`.
    pub u_h_alpha_sq: f64,
    /// `max |div u|` on the grid.
    pub div_u_max: f64,
    /// Relative balance defect of `E + D` since the previous record.
    pub energy_residual: f64,
}

pub const CSV_HEADER: &str = "t,half_energy,diss_u,diss_tau,dissipated,gamma_l2,gamma_diss,crit_u,crit_tau,tau_l2,tau_l4,tau_lq,lq_exponent,u_h_alpha_sq,div_u_max,energy_residual";

impl DiagnosticRecord {
    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e}",
            self.t,
            self.half_energy,
            self.diss_u,
            self.diss_tau,
            self.dissipated,
            self.gamma_l2,
            self.gamma_diss,
            self.crit_u,
            self.crit_tau,
            self.tau_l2,
            self.tau_l4,
            self.tau_lq,
            self.lq_exponent,
            self.u_h_alpha_sq,
            self.div_u_max,
            self.energy_residual
        )
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.half_energy,
            self.diss_u,
            self.diss_tau,
            self.dissipated,
            self.gamma_l2,
            self.gamma_diss,
            self.crit_u,
            self.crit_tau,
            self.tau_l2,
            self.tau_l4,
            self.tau_lq,
            self.u_h_alpha_sq,
            self.div_u_max,
            self.energy_residual,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Exponent of the extra stress `L^q` norm: `2/β` with stress dissipation,
/// else `2/(α − 1)`, else 8; rounded and clamped to `[2, 32]`.
pub fn lq_exponent(params: &SystemParams) -> u32 {
    let raw = if params.eta > 0.0 && params.beta > 0.0 {
        2.0 / params.beta
    } else if params.alpha > 1.0 {
        2.0 / (params.alpha - 1.0)
    } else {
        8.0
    };
    raw.round().clamp(2.0, 32.0) as u32
}

fn tau_lq(state: &State, q: u32) -> Result<f64> {
    if q % 2 == 0 {
        lp_norm_even_exact(&state.tau, q)
    } else {
        lp_norm(&state.tau, q as f64)
    }
}

/// Evaluates every column except `energy_residual` and `dissipated`.
pub fn diagnose(
    state: &State,
    params: &SystemParams,
    partition: &DyadicPartition,
) -> Result<DiagnosticRecord> {
    let grid = state.grid();
    let du = dissipation_rate(&state.u, &SpectralSymTensor::zeros(grid), params);
    let dt = dissipation_rate(&SpectralVector::zeros(grid), &state.tau, params);
    let gamma = gamma_field(state, params, GammaNormalization::Unscaled)?;
    let lifted = fractional_power(&gamma, params.alpha);
    let gamma_diss = lifted.inner(&lifted);

    let (s_u, s_tau) = if params.eta > 0.0 && params.beta > 0.0 {
        (-params.alpha.min(params.beta), -params.alpha)
    } else {
        (0.0, -params.alpha)
    };
    let inf = f64::INFINITY;
    let crit_u = besov_norm(
        partition,
        &vector_gradient(&state.u),
        BesovSpec::new(s_u, inf, inf, false)?,
    )?
    .value
    .powi(2);
    let crit_tau = besov_norm(
        partition,
        &tensor_gradient(&state.tau),
        BesovSpec::new(s_tau, inf, inf, false)?,
    )?
    .value
    .powi(2);

    let q = lq_exponent(params);
    let u_alpha = fractional_power_vector(&state.u, params.alpha);
    Ok(DiagnosticRecord {
        t: state.time,
        half_energy: energy(state, params),
        diss_u: du,
        diss_tau: dt,
        dissipated: 0.0,
        gamma_l2: gamma.l2_norm(),
        gamma_diss,
        crit_u,
        crit_tau,
        tau_l2: state.tau.l2_norm(),
        tau_l4: lp_norm_even_exact(&state.tau, 4)?,
        tau_lq: tau_lq(state, q)?,
        lq_exponent: q,
        u_h_alpha_sq: state.u.inner(&state.u) + u_alpha.inner(&u_alpha),
        div_u_max: div(&state.u)
            .to_physical()
            .values()
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())),
        energy_residual: 0.0,
    })
}

/// `|ΔE + ΔD| / Δt` relative to `max(ΔD/Δt, Ē/T)` between two records,
/// with `Ē` the mean energy of the pair and `T` the run length.
pub fn energy_residual(prev: &DiagnosticRecord, cur: &DiagnosticRecord, t_end: f64) -> f64 {
    let span = cur.t - prev.t;
    if span <= 0.0 {
        return 0.0;
    }
    let d_e = cur.half_energy - prev.half_energy;
    let d_d = cur.dissipated - prev.dissipated;
    let defect = (d_e + d_d).abs() / span;
    let scale = (d_d / span).max(0.5 * (cur.half_energy + prev.half_energy) / t_end);
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// Label for parameter sets with and without a global regularity theorem.
pub const OUTSIDE_THEORY: &str = "outside proven theory";

pub fn regime_label(params: &SystemParams) -> String {
    let reduced = params.is_reduced();
    if reduced && params.nu > 0.0 && params.alpha > 1.0 && params.eta == 0.0 {
        "proven: nu > 0, alpha > 1, eta = 0".into()
    } else if reduced
        && params.nu > 0.0
        && params.alpha == 1.0
        && params.eta > 0.0
        && params.beta > 0.0
    {
        "proven: nu > 0, alpha = 1, eta > 0, beta > 0".into()
    } else {
        OUTSIDE_THEORY.into()
    }
}

/// Soft Gronwall-form check `‖Γ(t)‖² ≤ (‖Γ₀‖² + C∫₀ᵗh)e^{Ct}` with
/// `h = ‖u‖²_{H^α}(1 + ‖τ‖²)`; `C` is the least constant that covers the
/// first quarter of the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallCheck {
    /// The parameters fall in the range where such a bound is expected
    /// (`η = 0`, `1 < α ≤ 3/2`).
    pub applicable: bool,
    pub c_fit: f64,
    /// `max ‖Γ‖²/bound` over the last three quarters.
    pub max_ratio: f64,
    pub flagged: bool,
}

pub fn gronwall_check(records: &[DiagnosticRecord], params: &SystemParams) -> GronwallCheck {
    let applicable = params.eta == 0.0 && params.alpha > 1.0 && params.alpha <= 1.5;
    if records.len() < 2 {
        return GronwallCheck {
            applicable,
            c_fit: 0.0,
            max_ratio: 0.0,
            flagged: false,
        };
    }
    let g0 = records[0].gamma_l2.powi(2);
    let mut h_int = vec![0.0; records.len()];
    for i in 1..records.len() {
        let h = |r: &DiagnosticRecord| r.u_h_alpha_sq * (1.0 + r.tau_l2.powi(2));
        h_int[i] = h_int[i - 1]
            + 0.5 * (records[i].t - records[i - 1].t) * (h(&records[i]) + h(&records[i - 1]));
    }
    let t0 = records[0].t;
    let quarter = t0 + 0.25 * (records.last().unwrap().t - t0);
    let bound = |c: f64, i: usize| (g0 + c * h_int[i]) * (c * (records[i].t - t0)).exp();
    let covers = |c: f64| {
        records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.t <= quarter)
            .all(|(i, r)| r.gamma_l2.powi(2) <= bound(c, i) * (1.0 + 1e-12) + 1e-300)
    };
    let mut hi = 1.0;
    while !covers(hi) && hi < 1e8 {
        hi *= 2.0;
    }
    let c_fit = if !covers(hi) {
        f64::INFINITY
    } else if covers(0.0) {
        0.0
    } else {
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if covers(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mut max_ratio: f64 = 0.0;
    if c_fit.is_finite() {
        for (i, r) in records.iter().enumerate().filter(|(_, r)| r.t > quarter) {
            let b = bound(c_fit, i);
            let g = r.gamma_l2.powi(2);
            let ratio = if b > 0.0 {
                g / b
            } else if g > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            max_ratio = max_ratio.max(ratio);
        }
    }
    GronwallCheck {
        applicable,
        c_fit,
        max_ratio,
        flagged: !c_fit.is_finite() || max_ratio > 1.0 + 1e-9,
    }
}

/// Whole-run aggregates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub records: usize,
    pub final_time: f64,
    pub sup_gamma_l2: f64,
    pub initial_gamma_l2: f64,
    pub int_gamma_diss: f64,
    pub int_crit_u: f64,
    pub int_crit_tau: f64,
    pub max_energy_residual: f64,
    pub max_div_u: f64,
}

fn trapezoid(records: &[DiagnosticRecord], f: impl Fn(&DiagnosticRecord) -> f64) -> f64 {
    records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

pub fn summarize(records: &[DiagnosticRecord]) -> RunSummary {
    let max = |f: fn(&DiagnosticRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    RunSummary {
        records: records.len(),
        final_time: records.last().map_or(0.0, |r| r.t),
        sup_gamma_l2: max(|r| r.gamma_l2),
        initial_gamma_l2: records.first().map_or(0.0, |r| r.gamma_l2),
        int_gamma_diss: trapezoid(records, |r| r.gamma_diss),
        int_crit_u: trapezoid(records, |r| r.crit_u),
        int_crit_tau: trapezoid(records, |r| r.crit_tau),
        max_energy_residual: max(|r| r.energy_residual),
        max_div_u: max(|r| r.div_u_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, e: f64, d: f64) -> DiagnosticRecord {
        DiagnosticRecord {
            t,
            half_energy: e,
            diss_u: 0.0,
            diss_tau: 0.0,
            dissipated: d,
            gamma_l2: 1.0,
            gamma_diss: 2.0,
            crit_u: t,
            crit_tau: 0.0,
            tau_l2: 0.0,
            tau_l4: 0.0,
            tau_lq: 0.0,
            lq_exponent: 8,
            u_h_alpha_sq: 1.0,
            div_u_max: 0.0,
            energy_residual: 0.0,
        }
    }

    #[test]
    fn exponent_rule() {
        assert_eq!(lq_exponent(&SystemParams::reduced(1.0, 0.0, 1.25, 0.0)), 8);
        assert_eq!(lq_exponent(&SystemParams::reduced(1.0, 1.0, 1.0, 0.25)), 8);
        assert_eq!(lq_exponent(&SystemParams::reduced(1.0, 1.0, 1.0, 0.5)), 4);
        assert_eq!(lq_exponent(&SystemParams::reduced(1.0, 0.0, 1.0, 0.0)), 8);
        assert_eq!(lq_exponent(&SystemParams::reduced(1.0, 0.0, 1.01, 0.0)), 32);
    }

    #[test]
    fn balanced_energy_has_zero_residual() {
        let a = rec(0.0, 1.0, 0.0);
        let b = rec(0.1, 0.9, 0.1);
        assert!(energy_residual(&a, &b, 1.0) < 1e-14);
        let c = rec(0.1, 0.9, 0.05);
        assert!((energy_residual(&a, &c, 1.0) - 0.5 / 0.95).abs() < 1e-12);
    }

    #[test]
    fn regimes() {
        assert!(regime_label(&SystemParams::reduced(1.0, 0.0, 1.25, 0.0)).starts_with("proven"));
        assert!(regime_label(&SystemParams::reduced(1.0, 1.0, 1.0, 0.25)).starts_with("proven"));
        assert_eq!(
            regime_label(&SystemParams::reduced(1.0, 0.0, 1.0, 0.0)),
            OUTSIDE_THEORY
        );
    }

    #[test]
    fn summary_integrals() {
        let rs = [rec(0.0, 1.0, 0.0), rec(0.5, 1.0, 0.0), rec(1.0, 1.0, 0.0)];
        let s = summarize(&rs);
        assert!((s.int_gamma_diss - 2.0).abs() < 1e-15);
        assert!((s.int_crit_u - 0.5).abs() < 1e-15);
        assert_eq!(s.sup_gamma_l2, 1.0);
    }

    fn growth(late_jump: bool) -> Vec<DiagnosticRecord> {
        (0..=20)
            .map(|i| {
                let t = i as f64 * 0.1;
                let mut r = rec(t, 1.0, 0.0);
                // h ≡ 1, so (1 + 0.3t)e^{0.3t} is the C = 0.3 bound itself
                let mut g2 = (1.0 + 0.3 * t) * (0.3 * t).exp();
                if late_jump && i == 18 {
                    g2 *= 4.0;
                }
                r.gamma_l2 = g2.sqrt();
                r
            })
            .collect()
    }

    #[test]
    fn gronwall_fit_and_flag() {
        let p = SystemParams::reduced(1.0, 0.0, 1.25, 0.0);
        let g = gronwall_check(&growth(false), &p);
        assert!(g.applicable);
        assert!((g.c_fit - 0.3).abs() < 1e-9, "{g:?}");
        assert!(!g.flagged && g.max_ratio <= 1.0 + 1e-9, "{g:?}");
        assert!(gronwall_check(&growth(true), &p).flagged);
        assert!(
            !gronwall_check(&growth(false), &SystemParams::reduced(1.0, 1.0, 1.0, 0.5)).applicable
        );
    }
}
