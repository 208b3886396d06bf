use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real-valued samples on the physical grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples for n = {}, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x₁, x₂)` at every grid point.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let values = (0..grid.len())
            .map(|idx| f((idx / n) as f64 * h, (idx % n) as f64 * h))
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Forward transform (physical → spectral), Hermitian-symmetrized.
    pub fn to_spectral(&self) -> SpectralScalar {
        let mut coeffs: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.fft2(&mut coeffs, false);
        let mut out = SpectralScalar {
            grid: self.grid.clone(),
            coeffs,
        };
        out.symmetrize();
        out
    }

    /// Grid mean, `(1/n²) Σ f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Scalar field stored as its Fourier coefficients on the torus lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScalar {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralScalar {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for n = {}, got {}",
                grid.len(),
                grid.n(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Field with `value` in the `k = 0` mode only.
    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Forward transform of a sampled real function.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        PhysicalField::from_fn(grid, f).to_spectral()
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k1, k2)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let idx = self.grid.index_of(k1, k2);
        self.coeffs[idx] = value;
    }

    /// Inverse transform; the imaginary residue of a Hermitian field is dropped.
    pub fn to_physical(&self) -> PhysicalField {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, true);
        PhysicalField {
            grid: self.grid.clone(),
            values: data.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Complex inverse transform, without discarding the imaginary part.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, true);
        data
    }

    /// The same trigonometric polynomial on a grid at least as fine; the
    /// Nyquist lines of the source grid are dropped.
    pub fn padded(&self, fine: &TorusGrid) -> Result<Self> {
        let n = self.grid.n();
        if fine.n() < n {
            return Err(Error::Dimension(format!(
                "cannot pad an n = {n} field onto n = {}",
                fine.n()
            )));
        }
        let half = n as i64 / 2;
        let mut out = Self::zeros(fine);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (k1, k2) = self.grid.k_of(idx);
            if k1 != -half && k2 != -half {
                out.set_coeff(k1, k2, *c);
            }
        }
        Ok(out)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension(format!(
                "grid n = {} vs n = {}",
                self.grid.n(),
                other.grid.n()
            )));
        }
        Ok(())
    }

    /// Largest violation of `c(−k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|idx| (self.coeffs[self.grid.mirror(idx)] - self.coeffs[idx].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// True when the coefficients describe real data within `tol` relative
    /// to the largest coefficient.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Projects onto the real-data subspace: `c(k) ← ½(c(k) + conj(c(−k)))`.
    pub fn symmetrize(&mut self) {
        for idx in 0..self.coeffs.len() {
            let m = self.grid.mirror(idx);
            if m < idx {
                continue;
            }
            if m == idx {
                self.coeffs[idx] = Complex64::new(self.coeffs[idx].re, 0.0);
            } else {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[m].conj());
                self.coeffs[idx] = avg;
                self.coeffs[m] = avg.conj();
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |c(k)|²`, which equals the grid mean of `|f|²`.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L²` norm via Parseval: `‖f‖² = 4π² Σ |c(k)|²`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.coeff_energy()).sqrt()
    }

    /// `L²` inner product `(f | g) = 4π² Re Σ c_f(k) conj(c_g(k))`.
    pub fn inner(&self, other: &Self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        self.grid.area() * s
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies `c(k) ← m(idx) c(k)` for a complex multiplier.
    pub fn map_multiplier(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| m(idx) * c)
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Applies a real multiplier.
    pub fn map_real_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * m(idx))
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_real_multiplier(|_| a)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn add_assign_scaled(&mut self, a: f64, other: &Self) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest coefficient modulus of `self − other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Two-component vector field `(u₁, u₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVector {
    pub x: SpectralScalar,
    pub y: SpectralScalar,
}

impl SpectralVector {
    pub fn padded(&self, fine: &TorusGrid) -> Result<Self> {
        Ok(Self {
            x: self.x.padded(fine)?,
            y: self.y.padded(fine)?,
        })
    }

    pub fn new(x: SpectralScalar, y: SpectralScalar) -> Result<Self> {
        x.check_same_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            x: SpectralScalar::zeros(grid),
            y: SpectralScalar::zeros(grid),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.x.grid()
    }

    pub fn components(&self) -> [&SpectralScalar; 2] {
        [&self.x, &self.y]
    }

    pub fn map(&self, f: impl Fn(&SpectralScalar) -> SpectralScalar) -> Self {
        Self {
            x: f(&self.x),
            y: f(&self.y),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&SpectralScalar, &SpectralScalar) -> SpectralScalar,
    ) -> Self {
        Self {
            x: f(&self.x, &other.x),
            y: f(&self.y, &other.y),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_map(other, |p, q| p.axpy(a, q))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn symmetrize(&mut self) {
        self.x.symmetrize();
        self.y.symmetrize();
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.x.max_diff(&other.x).max(self.y.max_diff(&other.y))
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    /// Largest `|k · û(k)|` over the lattice.
    pub fn divergence_defect(&self) -> f64 {
        let g = self.grid();
        (0..g.len())
            .map(|idx| {
                let (k1, k2) = g.derivative_k(idx);
                (self.x.coeffs()[idx] * k1 + self.y.coeffs()[idx] * k2).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Divergence-free predicate: `|k·û(k)| ≤ tol · ‖û‖` for all `k`.
    pub fn is_solenoidal(&self, tol: f64) -> bool {
        let scale = (self.x.coeff_energy() + self.y.coeff_energy()).sqrt();
        self.divergence_defect() <= tol * scale.max(f64::MIN_POSITIVE)
    }
}

/// Symmetric 2×2 tensor field with components `(τ₁₁, τ₁₂, τ₂₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSymTensor {
    pub xx: SpectralScalar,
    pub xy: SpectralScalar,
    pub yy: SpectralScalar,
}

impl SpectralSymTensor {
    pub fn padded(&self, fine: &TorusGrid) -> Result<Self> {
        Ok(Self {
            xx: self.xx.padded(fine)?,
            xy: self.xy.padded(fine)?,
            yy: self.yy.padded(fine)?,
        })
    }

    pub fn new(xx: SpectralScalar, xy: SpectralScalar, yy: SpectralScalar) -> Result<Self> {
        xx.check_same_grid(&xy)?;
        xx.check_same_grid(&yy)?;
        Ok(Self { xx, xy, yy })
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            xx: SpectralScalar::zeros(grid),
            xy: SpectralScalar::zeros(grid),
            yy: SpectralScalar::zeros(grid),
        }
    }

    /// `c · I` as a constant field.
    pub fn identity_multiple(grid: &TorusGrid, c: f64) -> Self {
        Self {
            xx: SpectralScalar::constant(grid, c),
            xy: SpectralScalar::zeros(grid),
            yy: SpectralScalar::constant(grid, c),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.xx.grid()
    }

    pub fn components(&self) -> [&SpectralScalar; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    pub fn map(&self, f: impl Fn(&SpectralScalar) -> SpectralScalar) -> Self {
        Self {
            xx: f(&self.xx),
            xy: f(&self.xy),
            yy: f(&self.yy),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&SpectralScalar, &SpectralScalar) -> SpectralScalar,
    ) -> Self {
        Self {
            xx: f(&self.xx, &other.xx),
            xy: f(&self.xy, &other.xy),
            yy: f(&self.yy, &other.yy),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_map(other, |p, q| p.axpy(a, q))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// Frobenius `L²` pairing `Σᵢⱼ (aᵢⱼ | bᵢⱼ)`; the off-diagonal entry counts twice.
    pub fn inner(&self, other: &Self) -> f64 {
        self.xx.inner(&other.xx) + 2.0 * self.xy.inner(&other.xy) + self.yy.inner(&other.yy)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Pointwise trace `τ₁₁ + τ₂₂`.
    pub fn trace(&self) -> SpectralScalar {
        self.xx.add(&self.yy)
    }

    pub fn symmetrize(&mut self) {
        self.xx.symmetrize();
        self.xy.symmetrize();
        self.yy.symmetrize();
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.xx
            .max_diff(&other.xx)
            .max(self.xy.max_diff(&other.xy))
            .max(self.yy.max_diff(&other.yy))
    }

    pub fn max_abs(&self) -> f64 {
        self.xx
            .max_abs()
            .max(self.xy.max_abs())
            .max(self.yy.max_abs())
    }
}

/// A list of scalar components with pointwise weights, used wherever a
/// multi-component field is normed with the pointwise magnitude
/// `|F(x)|² = Σ wᵢ Fᵢ(x)²`.
pub trait Components {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)>;

    fn grid(&self) -> &TorusGrid {
        self.parts()[0].0.grid()
    }
}

impl Components for SpectralScalar {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)> {
        vec![(self, 1.0)]
    }
}

impl Components for SpectralVector {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)> {
        vec![(&self.x, 1.0), (&self.y, 1.0)]
    }
}

impl Components for SpectralSymTensor {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)> {
        vec![(&self.xx, 1.0), (&self.xy, 2.0), (&self.yy, 1.0)]
    }
}

/// Owned multi-component field, e.g. the full gradient `∇u` (4 entries) or
/// `∇τ` (6 entries, off-diagonal stress entries weighted 2).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldStack {
    pub comps: Vec<SpectralScalar>,
    pub weights: Vec<f64>,
}

impl FieldStack {
    pub fn new(comps: Vec<SpectralScalar>, weights: Vec<f64>) -> Result<Self> {
        if comps.is_empty() || comps.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} components with {} weights",
                comps.len(),
                weights.len()
            )));
        }
        for c in &comps[1..] {
            comps[0].check_same_grid(c)?;
        }
        Ok(Self { comps, weights })
    }
}

impl Components for FieldStack {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)> {
        self.comps
            .iter()
            .zip(self.weights.iter().copied())
            .collect()
    }
}

/// Rank-tagged field, the unit of file I/O and of rank-checked derivative
/// dispatch.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Scalar(SpectralScalar),
    Vector(SpectralVector),
    Tensor(SpectralSymTensor),
}

impl AnyField {
    /// Number of stored components (1, 2 or 3).
    pub fn rank(&self) -> u8 {
        match self {
            AnyField::Scalar(_) => 1,
            AnyField::Vector(_) => 2,
            AnyField::Tensor(_) => 3,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::Vector(v) => v.grid(),
            AnyField::Tensor(t) => t.grid(),
        }
    }

    pub fn scalars(&self) -> Vec<&SpectralScalar> {
        match self {
            AnyField::Scalar(f) => vec![f],
            AnyField::Vector(v) => v.components().to_vec(),
            AnyField::Tensor(t) => t.components().to_vec(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyField::Scalar(_) => "scalar",
            AnyField::Vector(_) => "vector",
            AnyField::Tensor(_) => "symmetric tensor",
        }
    }
}

impl Components for AnyField {
    fn parts(&self) -> Vec<(&SpectralScalar, f64)> {
        match self {
            AnyField::Scalar(f) => f.parts(),
            AnyField::Vector(v) => v.parts(),
            AnyField::Tensor(t) => t.parts(),
        }
    }
}
