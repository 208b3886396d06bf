//! Numerical checks of commutator and Bernstein-type estimates: each check
//! evaluates `LHS / RHS` over a seeded random ensemble and a resolution
//! sweep, and reports whether the ratio stays bounded.

pub mod bony;
pub mod estimates;
pub mod report;
pub mod suite;

pub use bony::{advection_commutator, block_commutator, bony_defect, bony_split};
pub use estimates::{
    check_commutator_sum_tau, check_commutator_sum_u, check_generalized_bernstein,
    check_kernel_commutator, check_riesz_bmo_commutator, check_riesz_commutator,
    check_smooth_commutator, Ensemble, HolderTriple, TauMode, Theta, YoungTriple,
};
pub use report::{safe_ratio, Bound, EstimateReport, ParameterSweep, SweepPoint};
pub use suite::{parse_ids, run_estimate, EstimateId, SuiteParams};
