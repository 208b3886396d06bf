use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform `n × n` grid on the torus `[0, 2π)²`.
///
/// Storage is row-major with the first index running along `x₁`: entry
/// `i * n + j` holds either the sample at `(2πi/n, 2πj/n)` or the Fourier
/// coefficient of wavenumber `(k(i), k(j))` with `k(i) ∈ [−n/2, n/2)`.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    dealias: (u32, u32),
    plans: Arc<Plans>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n", &self.n)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.dealias == other.dealias
    }
}

impl TorusGrid {
    /// Grid with the default 2/3 dealiasing fraction.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2, 3)
    }

    pub fn with_dealias(n: usize, num: u32, den: u32) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "grid size must be even and at least 16, got {n}"
            )));
        }
        if den == 0 || num == 0 || num > den {
            return Err(Error::Parameter(format!(
                "dealias fraction must lie in (0, 1], got {num}/{den}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            dealias: (num, den),
            plans: Arc::new(plans),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dealias_fraction(&self) -> (u32, u32) {
        self.dealias
    }

    /// Grid spacing `2π/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Quadrature weight `(2π/n)²` of one grid cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Area of the torus, `4π²`.
    pub fn area(&self) -> f64 {
        4.0 * std::f64::consts::PI * std::f64::consts::PI
    }

    /// Signed wavenumber stored at position `i` along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber pair of flat index `idx`.
    #[inline]
    pub fn k_of(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// `|k|²` as an exact integer.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> i64 {
        let (a, b) = self.k_of(idx);
        a * a + b * b
    }

    #[inline]
    pub fn k_norm(&self, idx: usize) -> f64 {
        (self.k_squared(idx) as f64).sqrt()
    }

    /// Wavenumber used by odd (first-derivative) multipliers. The Nyquist
    /// wavenumber `−n/2` has no conjugate partner on the lattice and maps to 0.
    #[inline]
    pub fn derivative_k(&self, idx: usize) -> (f64, f64) {
        let (a, b) = self.k_of(idx);
        let half = self.n as i64 / 2;
        let a = if a == -half { 0 } else { a };
        let b = if b == -half { 0 } else { b };
        (a as f64, b as f64)
    }

    /// Flat index of the lattice mode `(k₁, k₂)`, wavenumbers taken mod `n`.
    pub fn index_of(&self, k1: i64, k2: i64) -> usize {
        let n = self.n as i64;
        let i = k1.rem_euclid(n) as usize;
        let j = k2.rem_euclid(n) as usize;
        i * self.n + j
    }

    /// Flat index of `−k` for the mode at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let i = idx / n;
        let j = idx % n;
        ((n - i) % n) * n + (n - j) % n
    }

    /// Largest retained `max(|k₁|, |k₂|)` under the dealiasing rule.
    pub fn dealias_cutoff(&self) -> f64 {
        let (num, den) = self.dealias;
        num as f64 / den as f64 * (self.n / 2) as f64
    }

    /// Whether a mode survives dealiasing, decided in exact integer arithmetic.
    #[inline]
    pub fn keeps_mode(&self, idx: usize) -> bool {
        let (a, b) = self.k_of(idx);
        let m = a.abs().max(b.abs());
        let (num, den) = self.dealias;
        m * den as i64 * 2 <= num as i64 * self.n as i64
    }

    /// Largest `|k|` on the lattice (the corner mode).
    pub fn max_k_norm(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.n / 2) as f64
    }

    /// In-place 2D FFT. The forward direction divides by `n²`, so that
    /// `cos x₁` has coefficient ½ at `k = (±1, 0)`.
    pub(crate) fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let plan = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        if !inverse {
            let scale = 1.0 / (n * n) as f64;
            for c in data.iter_mut() {
                *c *= scale;
            }
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(TorusGrid::new(15).is_err());
        assert!(TorusGrid::new(8).is_err());
        assert!(TorusGrid::new(33).is_err());
        assert!(TorusGrid::new(16).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = TorusGrid::new(16).unwrap();
        let ks: Vec<i64> = (0..16).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks[0], 0);
        assert_eq!(ks[7], 7);
        assert_eq!(ks[8], -8);
        assert_eq!(ks[15], -1);
    }

    #[test]
    fn mirror_is_involution_and_negates() {
        let g = TorusGrid::new(16).unwrap();
        for idx in 0..g.len() {
            let m = g.mirror(idx);
            assert_eq!(g.mirror(m), idx);
            let (a, b) = g.k_of(idx);
            let (c, d) = g.k_of(m);
            assert_eq!((a + c).rem_euclid(16), 0);
            assert_eq!((b + d).rem_euclid(16), 0);
        }
    }

    #[test]
    fn dealias_mask_matches_two_thirds_rule() {
        let g = TorusGrid::new(64).unwrap();
        // cutoff = 21.33: |k| = 21 kept, 22 dropped
        assert!(g.keeps_mode(g.index_of(21, -21)));
        assert!(!g.keeps_mode(g.index_of(22, 0)));
        assert!(!g.keeps_mode(g.index_of(0, -32)));
    }
}
