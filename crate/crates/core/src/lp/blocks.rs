use super::partition::DyadicPartition;
use crate::spectral::{SpectralScalar, TorusGrid};

/// The block range that can be nonzero on an `n × n` lattice:
/// `j ∈ [−1, ⌈log₂(n/2)⌉ + 1]`. The same window serves the homogeneous
/// blocks, since `|k| ≥ 1` away from the mean mode leaves `Δ̇ⱼ = 0` for
/// `j ≤ −2`.
pub fn active_window(grid: &TorusGrid) -> (i32, i32) {
    let half = (grid.n() / 2) as f64;
    (-1, half.log2().ceil() as i32 + 1)
}

/// Multiplier of `Δⱼ` at lattice index `idx`.
pub fn block_symbol_at(
    p: &DyadicPartition,
    grid: &TorusGrid,
    idx: usize,
    j: i32,
    homogeneous: bool,
) -> f64 {
    p.block_symbol(j, grid.k_norm(idx), homogeneous)
}

/// Multiplier of `Sⱼ` at lattice index `idx`.
pub fn low_pass_symbol_at(
    p: &DyadicPartition,
    grid: &TorusGrid,
    idx: usize,
    j: i32,
    homogeneous: bool,
) -> f64 {
    p.low_pass_symbol(j, grid.k_norm(idx), homogeneous)
}

/// `Δⱼ f` (or `Δ̇ⱼ f`).
pub fn block(p: &DyadicPartition, f: &SpectralScalar, j: i32, homogeneous: bool) -> SpectralScalar {
    let g = f.grid().clone();
    f.map_real_multiplier(|idx| block_symbol_at(p, &g, idx, j, homogeneous))
}

/// `Sⱼ f = χ(2^{−j}D) f` (or `Ṡⱼ f`).
pub fn low_pass(
    p: &DyadicPartition,
    f: &SpectralScalar,
    j: i32,
    homogeneous: bool,
) -> SpectralScalar {
    let g = f.grid().clone();
    f.map_real_multiplier(|idx| low_pass_symbol_at(p, &g, idx, j, homogeneous))
}
