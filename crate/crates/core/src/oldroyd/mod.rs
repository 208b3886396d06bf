//! The generalized Oldroyd-B system: parameters, state, right-hand side,
//! and the damped combination `Γ = ω − R_ατ` with its evolution equation.

mod gamma;
mod system;

pub use gamma::{
    commutator_advection, gamma_equation_residual, gamma_field, riesz_alpha, GammaNormalization,
};
pub use system::{
    coupling, linear_rates, nonlinear, pressure_gradient, q_term, quadratic, rhs, LinearRates,
    State, SystemParams,
};
