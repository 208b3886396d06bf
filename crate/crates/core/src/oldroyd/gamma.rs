use serde::{Deserialize, Serialize};

use super::system::{State, SystemParams};
use crate::error::{Error, Result};
use crate::spectral::ops::{curl, curl_div, fractional_power, power_symbol, Advector};
use crate::spectral::{SpectralScalar, SpectralSymTensor, SpectralVector};

/// Scaling of the reported `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaNormalization {
    /// `ω − R_ατ`, the quantity whose evolution equation closes.
    #[default]
    Unscaled,
    /// `(ω − R_ατ)/ν`.
    InverseNu,
}

/// `R_ατ = ν⁻¹ Λ^{−2α} curl div τ`, with the mean mode set to zero.
pub fn riesz_alpha(tau: &SpectralSymTensor, alpha: f64, nu: f64) -> Result<SpectralScalar> {
    if !(nu > 0.0) {
        return Err(Error::Parameter(format!("R_alpha needs nu > 0, got {nu}")));
    }
    if !(alpha >= 1.0) {
        return Err(Error::Parameter(format!(
            "R_alpha needs alpha >= 1, got {alpha}"
        )));
    }
    let g = tau.grid().clone();
    Ok(curl_div(tau).map_real_multiplier(|idx| power_symbol(&g, idx, -2.0 * alpha) / nu))
}

/// `Γ = ω − R_ατ`, optionally divided by `ν`.
pub fn gamma_field(
    state: &State,
    params: &SystemParams,
    normalization: GammaNormalization,
) -> Result<SpectralScalar> {
    params.require_gamma()?;
    let g = curl(&state.u).sub(&riesz_alpha(&state.tau, params.alpha, params.nu)?);
    Ok(match normalization {
        GammaNormalization::Unscaled => g,
        GammaNormalization::InverseNu => g.scaled(1.0 / params.nu),
    })
}

/// `[R_α, u·∇]τ = R_α(u·∇τ) − u·∇(R_ατ)`, products dealiased.
pub fn commutator_advection(
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    alpha: f64,
    nu: f64,
) -> Result<SpectralScalar> {
    let adv = Advector::new(u);
    let first = riesz_alpha(&adv.advect_tensor(tau), alpha, nu)?;
    let second = adv.advect(&riesz_alpha(tau, alpha, nu)?);
    Ok(first.sub(&second))
}

/// Relative `L²` defect of
/// `∂ₜΓ + u·∇Γ + νΛ^{2α}Γ = [R_α, u·∇]τ + ηΛ^{2β}R_ατ + (2ν)⁻¹Λ^{2−2α}ω`
/// for `Γ = ω − R_ατ`, with `∂ₜΓ = curl ∂ₜu − R_α ∂ₜτ` taken from the
/// supplied time derivatives. Normalised by the largest single term.
pub fn gamma_equation_residual(
    state: &State,
    du_dt: &SpectralVector,
    dtau_dt: &SpectralSymTensor,
    params: &SystemParams,
) -> Result<f64> {
    params.require_gamma()?;
    params.require_reduced()?;
    let (nu, alpha) = (params.nu, params.alpha);
    let omega = curl(&state.u);
    let r_tau = riesz_alpha(&state.tau, alpha, nu)?;
    let gamma = omega.sub(&r_tau);

    let dt_gamma = curl(du_dt).sub(&riesz_alpha(dtau_dt, alpha, nu)?);
    let advected = Advector::new(&state.u).advect(&gamma);
    let damping = fractional_power(&gamma, 2.0 * alpha).scaled(nu);
    let commutator = commutator_advection(&state.u, &state.tau, alpha, nu)?;
    let stress_diss = fractional_power(&r_tau, 2.0 * params.beta).scaled(params.eta);
    let source = fractional_power(&omega, 2.0 - 2.0 * alpha).scaled(0.5 / nu);

    let terms = [
        &dt_gamma,
        &advected,
        &damping,
        &commutator,
        &stress_diss,
        &source,
    ];
    let scale = terms.iter().map(|t| t.l2_norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let defect = dt_gamma
        .add(&advected)
        .add(&damping)
        .sub(&commutator)
        .sub(&stress_diss)
        .sub(&source);
    Ok(defect.l2_norm() / scale)
}
