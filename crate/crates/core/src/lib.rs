//! Pseudo-spectral simulation of the 2D generalized Oldroyd-B system with
//! fractional dissipation on the torus `[0, 2π)²`, together with a
//! Littlewood–Paley toolkit that measures the constants in the commutator,
//! Bernstein and energy estimates used to control the solution.

pub mod error;
pub mod integrator;
pub mod lp;
pub mod oldroyd;
pub mod spectral;
pub mod verifier;

pub use error::{Error, Result};
