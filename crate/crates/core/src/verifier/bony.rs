//! Block commutators `[Δⱼ, a]v` and their paraproduct split.
//!
//! Products are formed on the grid the fields live on and dealiased there,
//! so callers pad band-limited inputs first to keep them exact.

use crate::lp::{active_window, block, low_pass, DyadicPartition};
use crate::spectral::ops::{partial, product};
use crate::spectral::{SpectralScalar, SpectralSymTensor, SpectralVector};

pub(crate) fn mul(a: &SpectralScalar, b: &SpectralScalar) -> SpectralScalar {
    product(&a.to_physical(), &b.to_physical())
}

fn delta(p: &DyadicPartition, f: &SpectralScalar, j: i32) -> SpectralScalar {
    block(p, f, j, false)
}

fn s(p: &DyadicPartition, f: &SpectralScalar, j: i32) -> SpectralScalar {
    low_pass(p, f, j, false)
}

/// `[Δⱼ, a]v = Δⱼ(av) − aΔⱼv`.
pub fn block_commutator(
    p: &DyadicPartition,
    j: i32,
    a: &SpectralScalar,
    v: &SpectralScalar,
) -> SpectralScalar {
    delta(p, &mul(a, v), j).sub(&mul(a, &delta(p, v, j)))
}

/// The four pieces of `[Δⱼ, a]v` from the inhomogeneous Bony decomposition:
///
/// * `Σ_{|k−j|≤4} [Δⱼ, S_{k−1}a] Δₖv`
/// * `Σ_{|k−j|≤4} Δⱼ(Δₖa S_{k−1}v)`
/// * `−Σ_{k≥j−2} Δₖa ΔⱼS_{k+2}v`
/// * `Σ_{k≥j−3} Δⱼ(Δₖa Δ̃ₖv)` with `Δ̃ₖ = Δ_{k−1} + Δₖ + Δ_{k+1}`
///
/// The truncations in `k` follow from the supports of `χ` and `φ`, so the
/// pieces add up to the commutator exactly.
pub fn bony_split(
    p: &DyadicPartition,
    j: i32,
    a: &SpectralScalar,
    v: &SpectralScalar,
) -> [SpectralScalar; 4] {
    let grid = a.grid();
    let (k_lo, k_hi) = active_window(grid);
    let blocks_a: Vec<SpectralScalar> = (k_lo..=k_hi).map(|k| delta(p, a, k)).collect();
    let blocks_v: Vec<SpectralScalar> = (k_lo..=k_hi).map(|k| delta(p, v, k)).collect();
    let da = |k: i32| &blocks_a[(k - k_lo) as usize];
    let dv = |k: i32| &blocks_v[(k - k_lo) as usize];
    let near = (j - 4).max(k_lo)..=(j + 4).min(k_hi);

    let mut paraproduct = SpectralScalar::zeros(grid);
    let mut reversed = SpectralScalar::zeros(grid);
    for k in near {
        let low_a = s(p, a, k - 1);
        paraproduct = paraproduct
            .add(&delta(p, &mul(&low_a, dv(k)), j))
            .sub(&mul(&low_a, &delta(p, dv(k), j)));
        reversed = reversed.add(&delta(p, &mul(da(k), &s(p, v, k - 1)), j));
    }

    let dj_v = delta(p, v, j);
    let mut high_low = SpectralScalar::zeros(grid);
    for k in (j - 2).max(k_lo)..=k_hi {
        high_low = high_low.sub(&mul(da(k), &s(p, &dj_v, k + 2)));
    }

    let mut remainder = SpectralScalar::zeros(grid);
    for k in (j - 3).max(k_lo)..=k_hi {
        let mut tilde = dv(k).clone();
        if k > k_lo {
            tilde = tilde.add(dv(k - 1));
        }
        if k < k_hi {
            tilde = tilde.add(dv(k + 1));
        }
        remainder = remainder.add(&delta(p, &mul(da(k), &tilde), j));
    }
    [paraproduct, reversed, high_low, remainder]
}

/// `[Δⱼ, u·∇]f = Σᵢ [Δⱼ, uᵢ] ∂ᵢf`.
pub fn advection_commutator(
    p: &DyadicPartition,
    j: i32,
    u: &SpectralVector,
    f: &SpectralScalar,
) -> SpectralScalar {
    block_commutator(p, j, &u.x, &partial(f, 0)).add(&block_commutator(p, j, &u.y, &partial(f, 1)))
}

/// Largest `L²` gap between the summed Bony pieces of `[Δⱼ, u·∇]τ` and the
/// direct commutator, relative to the commutator's size, over all blocks
/// and components.
pub fn bony_defect(p: &DyadicPartition, u: &SpectralVector, tau: &SpectralSymTensor) -> f64 {
    let (j_lo, j_hi) = active_window(u.grid());
    let mut worst: f64 = 0.0;
    for f in tau.components() {
        let grads = [partial(f, 0), partial(f, 1)];
        for j in j_lo..=j_hi {
            let mut split = SpectralScalar::zeros(u.grid());
            let mut direct = SpectralScalar::zeros(u.grid());
            for (ui, g) in [&u.x, &u.y].into_iter().zip(&grads) {
                for piece in bony_split(p, j, ui, g) {
                    split = split.add(&piece);
                }
                direct = direct.add(&block_commutator(p, j, ui, g));
            }
            let scale = direct.l2_norm().max(f.l2_norm() * 1e-3);
            if scale > 0.0 {
                worst = worst.max(split.sub(&direct).l2_norm() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{solenoidal_field, sym_tensor_field, SpectrumSpec};
    use crate::spectral::TorusGrid;

    #[test]
    fn split_resums_to_commutator() {
        let coarse = TorusGrid::new(32).unwrap();
        let fine = TorusGrid::new(64).unwrap();
        let p = DyadicPartition::default();
        let u = solenoidal_field(&coarse, SpectrumSpec::gaussian(2.0), 5)
            .padded(&fine)
            .unwrap();
        let tau = sym_tensor_field(&coarse, SpectrumSpec::gaussian(2.0), 6)
            .padded(&fine)
            .unwrap();
        assert!(bony_defect(&p, &u, &tau) < 1e-10);
    }

    #[test]
    fn constant_multiplier_commutes() {
        let g = TorusGrid::new(32).unwrap();
        let p = DyadicPartition::default();
        let a = SpectralScalar::constant(&g, 2.5);
        let v = crate::spectral::random::scalar_field(&g, SpectrumSpec::gaussian(2.0), 1, 0);
        for j in -1..5 {
            assert!(block_commutator(&p, j, &a, &v).max_abs() < 1e-14);
        }
    }
}
