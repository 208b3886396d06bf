use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ops::{
    deformation_and_rotation, div_tensor, from_values, leray_project, power_symbol, Advector,
};
use crate::spectral::{SpectralSymTensor, SpectralVector, TorusGrid};

/// Coefficients of
/// `∂ₜu + u·∇u + νΛ^{2α}u + ∇p = κ div τ`,
/// `∂ₜτ + u·∇τ + β₁τ + ηΛ^{2β}τ = Q(∇u, τ) + α₁Du`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub nu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub b: f64,
    pub q_enabled: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reduced(1.0, 0.0, 1.25, 0.0)
    }
}

impl SystemParams {
    /// `κ = α₁ = 1`, `β₁ = 0`, no `Q` term.
    pub fn reduced(nu: f64, eta: f64, alpha: f64, beta: f64) -> Self {
        Self {
            nu,
            eta,
            alpha,
            beta,
            kappa: 1.0,
            alpha1: 1.0,
            beta1: 0.0,
            b: 0.0,
            q_enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("nu", self.nu, self.nu >= 0.0),
            ("eta", self.eta, self.eta >= 0.0),
            ("alpha", self.alpha, self.alpha > 0.0),
            ("beta", self.beta, self.beta >= 0.0),
            ("kappa", self.kappa, self.kappa > 0.0),
            ("alpha1", self.alpha1, self.alpha1 > 0.0),
            ("beta1", self.beta1, self.beta1 >= 0.0),
            ("b", self.b, (-1.0..=1.0).contains(&self.b)),
        ];
        for (name, v, ok) in checks {
            if !v.is_finite() || !ok {
                return Err(Error::Parameter(format!("{name} = {v} is out of range")));
            }
        }
        Ok(())
    }

    pub fn is_reduced(&self) -> bool {
        self.kappa == 1.0 && self.alpha1 == 1.0 && self.beta1 == 0.0 && !self.q_enabled
    }

    /// `κ/α₁`, the weight of `‖τ‖²` in the conserved energy.
    pub fn stress_weight(&self) -> f64 {
        self.kappa / self.alpha1
    }

    pub(crate) fn require_gamma(&self) -> Result<()> {
        if !(self.nu > 0.0) || !(self.alpha >= 1.0) {
            return Err(Error::Parameter(format!(
                "Γ diagnostics need nu > 0 and alpha >= 1 (nu = {}, alpha = {})",
                self.nu, self.alpha
            )));
        }
        Ok(())
    }

    pub(crate) fn require_reduced(&self) -> Result<()> {
        if !self.is_reduced() {
            return Err(Error::Unsupported(
                "Γ equation holds only for kappa = alpha1 = 1, beta1 = 0 and Q disabled".into(),
            ));
        }
        Ok(())
    }
}

/// Velocity and stress at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub u: SpectralVector,
    pub tau: SpectralSymTensor,
    pub time: f64,
}

pub const DIV_TOL: f64 = 1e-10;

impl State {
    /// Checks grid agreement, solenoidality and realness.
    pub fn new(u: SpectralVector, tau: SpectralSymTensor, time: f64) -> Result<Self> {
        u.x.check_same_grid(&tau.xx)?;
        let scale = u.max_abs().max(1.0);
        if u.divergence_defect() > DIV_TOL * scale {
            return Err(Error::Precondition(format!(
                "velocity is not divergence free (defect {:.3e})",
                u.divergence_defect()
            )));
        }
        let real = u.components().iter().all(|c| c.is_hermitian(1e-12))
            && tau.components().iter().all(|c| c.is_hermitian(1e-12));
        if !real {
            return Err(Error::Precondition(
                "fields are not real (Hermitian)".into(),
            ));
        }
        Ok(Self { u, tau, time })
    }

    pub fn rest(grid: &TorusGrid) -> Self {
        Self {
            u: SpectralVector::zeros(grid),
            tau: SpectralSymTensor::zeros(grid),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.tau.is_finite()
    }
}

/// `Q(∇u, τ) = W(u)τ − τW(u) + b(Du τ + τ Du)`, assembled pointwise on the
/// grid and dealiased.
pub fn q_term(u: &SpectralVector, tau: &SpectralSymTensor, b: f64) -> SpectralSymTensor {
    let grid = u.grid().clone();
    let (du, w) = deformation_and_rotation(u);
    let [p, r, m] = du.components().map(|c| c.to_physical().into_values());
    let w = w.to_physical().into_values();
    let [a, c, d] = tau.components().map(|c| c.to_physical().into_values());
    let len = grid.len();
    let (mut q11, mut q12, mut q22) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for i in 0..len {
        let rot11 = 2.0 * w[i] * c[i];
        let rot12 = w[i] * (d[i] - a[i]);
        let sym11 = 2.0 * (p[i] * a[i] + r[i] * c[i]);
        let sym12 = c[i] * (p[i] + m[i]) + r[i] * (a[i] + d[i]);
        let sym22 = 2.0 * (r[i] * c[i] + m[i] * d[i]);
        q11[i] = rot11 + b * sym11;
        q12[i] = rot12 + b * sym12;
        q22[i] = -rot11 + b * sym22;
    }
    SpectralSymTensor {
        xx: from_values(&grid, q11),
        xy: from_values(&grid, q12),
        yy: from_values(&grid, q22),
    }
}

/// Quadratic part of the right-hand side:
/// `N_u = −P(u·∇u)`, `N_τ = −u·∇τ + Q`.
pub fn quadratic(
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    params: &SystemParams,
) -> (SpectralVector, SpectralSymTensor) {
    let adv = Advector::new(u);
    let du_dt = leray_project(&adv.advect_vector(u)).scaled(-1.0);
    let mut dtau = adv.advect_tensor(tau).scaled(-1.0);
    if params.q_enabled {
        dtau = dtau.add(&q_term(u, tau, params.b));
    }
    (du_dt, dtau)
}

/// Linear coupling `(κ P div τ, α₁Du)`.
pub fn coupling(
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    params: &SystemParams,
) -> (SpectralVector, SpectralSymTensor) {
    let (du, _) = deformation_and_rotation(u);
    (
        leray_project(&div_tensor(tau)).scaled(params.kappa),
        du.scaled(params.alpha1),
    )
}

/// Everything but the diagonal decay: `quadratic + coupling`.
pub fn nonlinear(
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    params: &SystemParams,
) -> (SpectralVector, SpectralSymTensor) {
    let (qu, qt) = quadratic(u, tau, params);
    let (cu, ct) = coupling(u, tau, params);
    (qu.add(&cu), qt.add(&ct))
}

/// Diagonal decay rates `ν|k|^{2α}` and `β₁ + η|k|^{2β}` per lattice index.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRates {
    pub velocity: Vec<f64>,
    pub stress: Vec<f64>,
}

pub fn linear_rates(grid: &TorusGrid, params: &SystemParams) -> LinearRates {
    let velocity = (0..grid.len())
        .map(|idx| params.nu * power_symbol(grid, idx, 2.0 * params.alpha))
        .collect();
    let stress = (0..grid.len())
        .map(|idx| params.beta1 + params.eta * power_symbol(grid, idx, 2.0 * params.beta))
        .collect();
    LinearRates { velocity, stress }
}

/// Full time derivative `(∂ₜu, ∂ₜτ)`.
pub fn rhs(state: &State, params: &SystemParams) -> (SpectralVector, SpectralSymTensor) {
    let (mut du, mut dtau) = nonlinear(&state.u, &state.tau, params);
    let rates = linear_rates(state.grid(), params);
    du = du.zip_map(&state.u, |n, u| {
        u.map_real_multiplier(|i| -rates.velocity[i]).add(n)
    });
    dtau = dtau.zip_map(&state.tau, |n, t| {
        t.map_real_multiplier(|i| -rates.stress[i]).add(n)
    });
    (du, dtau)
}

/// Pressure gradient `∇p = (I − P)[−u·∇u + κ div τ]`, for output only.
pub fn pressure_gradient(state: &State, params: &SystemParams) -> SpectralVector {
    let adv = Advector::new(&state.u);
    let forcing = div_tensor(&state.tau)
        .scaled(params.kappa)
        .sub(&adv.advect_vector(&state.u));
    forcing.sub(&leray_project(&forcing))
}
