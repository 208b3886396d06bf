//! Littlewood–Paley machinery on the periodic lattice: dyadic blocks,
//! Besov, Sobolev and BMO norms, and Bernstein ratios.

pub mod bernstein;
pub mod blocks;
pub mod bmo;
pub mod norms;
pub mod partition;

pub use bernstein::{bernstein_ratio, BernsteinRatios};
pub use blocks::{active_window, block, block_symbol_at, low_pass, low_pass_symbol_at};
pub use bmo::bmo_seminorm;
pub use norms::{
    besov_norm, besov_norm_lowpass, lp_norm, lp_norm_even_exact, sobolev_norm, BesovSpec, NormRow,
    NormValue,
};
pub use partition::{DyadicPartition, PartitionCheck, ProfileKind};
