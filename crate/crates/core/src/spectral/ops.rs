//! Fourier-multiplier calculus on the torus: fractional powers, exact
//! spectral derivatives, the Leray projector, dealiasing, and dealiased
//! physical-space products.

use num_complex::Complex64;

use super::field::{
    AnyField, FieldStack, PhysicalField, SpectralScalar, SpectralSymTensor, SpectralVector,
};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Multiplier `|k|^s`, with the `k = 0` mode zeroed for `s ≠ 0` and kept for `s = 0`.
pub fn fractional_power(f: &SpectralScalar, s: f64) -> SpectralScalar {
    if s == 0.0 {
        return f.clone();
    }
    let g = f.grid().clone();
    f.map_real_multiplier(|idx| power_symbol(&g, idx, s))
}

/// The symbol of `Λ^s` at `idx` under the zero-mode convention above.
#[inline]
pub fn power_symbol(grid: &TorusGrid, idx: usize, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let k2 = grid.k_squared(idx);
    if k2 == 0 {
        0.0
    } else {
        (k2 as f64).powf(0.5 * s)
    }
}

pub fn fractional_power_vector(v: &SpectralVector, s: f64) -> SpectralVector {
    v.map(|c| fractional_power(c, s))
}

pub fn fractional_power_tensor(t: &SpectralSymTensor, s: f64) -> SpectralSymTensor {
    t.map(|c| fractional_power(c, s))
}

/// `∂ᵢ f`, with `axis = 0` for `x₁` and `axis = 1` for `x₂`.
pub fn partial(f: &SpectralScalar, axis: usize) -> SpectralScalar {
    let g = f.grid().clone();
    f.map_multiplier(|idx| {
        let (k1, k2) = g.derivative_k(idx);
        I * if axis == 0 { k1 } else { k2 }
    })
}

pub fn grad(f: &SpectralScalar) -> SpectralVector {
    SpectralVector {
        x: partial(f, 0),
        y: partial(f, 1),
    }
}

pub fn div(v: &SpectralVector) -> SpectralScalar {
    let g = v.grid().clone();
    let mut out = SpectralScalar::zeros(&g);
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = g.derivative_k(idx);
        *c = I * (v.x.coeffs()[idx] * k1 + v.y.coeffs()[idx] * k2);
    }
    out
}

/// Row divergence of a symmetric tensor: `(div τ)ᵢ = ∂ⱼ τᵢⱼ`.
pub fn div_tensor(t: &SpectralSymTensor) -> SpectralVector {
    let g = t.grid().clone();
    let mut x = SpectralScalar::zeros(&g);
    let mut y = SpectralScalar::zeros(&g);
    for idx in 0..g.len() {
        let (k1, k2) = g.derivative_k(idx);
        let (a, b, d) = (t.xx.coeffs()[idx], t.xy.coeffs()[idx], t.yy.coeffs()[idx]);
        x.coeffs_mut()[idx] = I * (a * k1 + b * k2);
        y.coeffs_mut()[idx] = I * (b * k1 + d * k2);
    }
    SpectralVector { x, y }
}

/// 2D scalar curl `ω = ∂₁u₂ − ∂₂u₁`.
pub fn curl(v: &SpectralVector) -> SpectralScalar {
    let g = v.grid().clone();
    let mut out = SpectralScalar::zeros(&g);
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = g.derivative_k(idx);
        *c = I * (v.y.coeffs()[idx] * k1 - v.x.coeffs()[idx] * k2);
    }
    out
}

/// `curl div τ = ∂₁∂ⱼτ₂ⱼ − ∂₂∂ⱼτ₁ⱼ`, assembled as a single multiplier.
pub fn curl_div(t: &SpectralSymTensor) -> SpectralScalar {
    let g = t.grid().clone();
    let mut out = SpectralScalar::zeros(&g);
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = g.derivative_k(idx);
        let (a, b, d) = (t.xx.coeffs()[idx], t.xy.coeffs()[idx], t.yy.coeffs()[idx]);
        // (ik₁)(ik₁ b + ik₂ d) − (ik₂)(ik₁ a + ik₂ b)
        *c = -(b * (k1 * k1 - k2 * k2) + d * (k1 * k2) - a * (k1 * k2));
    }
    out
}

/// `Δf`, multiplier `−|k|²`.
pub fn laplacian(f: &SpectralScalar) -> SpectralScalar {
    let g = f.grid().clone();
    f.map_real_multiplier(|idx| -(g.k_squared(idx) as f64))
}

/// Gradient of a vector, `[∂₁u₁, ∂₂u₁, ∂₁u₂, ∂₂u₂]`, unit weights.
pub fn vector_gradient(v: &SpectralVector) -> FieldStack {
    FieldStack {
        comps: vec![
            partial(&v.x, 0),
            partial(&v.x, 1),
            partial(&v.y, 0),
            partial(&v.y, 1),
        ],
        weights: vec![1.0; 4],
    }
}

/// Gradient of a symmetric tensor: six entries `∂ₖτᵢⱼ`; the two `τ₁₂`
/// entries carry weight 2 so the pointwise norm is the full Frobenius norm.
pub fn tensor_gradient(t: &SpectralSymTensor) -> FieldStack {
    FieldStack {
        comps: vec![
            partial(&t.xx, 0),
            partial(&t.xx, 1),
            partial(&t.xy, 0),
            partial(&t.xy, 1),
            partial(&t.yy, 0),
            partial(&t.yy, 1),
        ],
        weights: vec![1.0, 1.0, 2.0, 2.0, 1.0, 1.0],
    }
}

/// Derivative operators selectable at run time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    Grad,
    DivVec,
    DivTensor,
    CurlVec,
    CurlDivTensor,
    Laplacian,
}

/// Rank-checked dispatch over [`DerivativeKind`].
pub fn apply_derivative(f: &AnyField, kind: DerivativeKind) -> Result<AnyField> {
    use DerivativeKind::*;
    match (kind, f) {
        (Grad, AnyField::Scalar(s)) => Ok(AnyField::Vector(grad(s))),
        (DivVec, AnyField::Vector(v)) => Ok(AnyField::Scalar(div(v))),
        (DivTensor, AnyField::Tensor(t)) => Ok(AnyField::Vector(div_tensor(t))),
        (CurlVec, AnyField::Vector(v)) => Ok(AnyField::Scalar(curl(v))),
        (CurlDivTensor, AnyField::Tensor(t)) => Ok(AnyField::Scalar(curl_div(t))),
        (Laplacian, AnyField::Scalar(s)) => Ok(AnyField::Scalar(laplacian(s))),
        (Laplacian, AnyField::Vector(v)) => Ok(AnyField::Vector(v.map(laplacian))),
        (Laplacian, AnyField::Tensor(t)) => Ok(AnyField::Tensor(t.map(laplacian))),
        (kind, f) => Err(Error::Rank(format!(
            "{kind:?} is not defined on a {} field",
            f.kind_name()
        ))),
    }
}

/// Leray projection `P v = v − k (k·v̂)/|k|²`; the mean mode passes through.
pub fn leray_project(v: &SpectralVector) -> SpectralVector {
    let g = v.grid().clone();
    let mut out = v.clone();
    for idx in 0..g.len() {
        let (k1, k2) = g.derivative_k(idx);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            continue;
        }
        let a = v.x.coeffs()[idx];
        let b = v.y.coeffs()[idx];
        let proj = (a * k1 + b * k2) / kk;
        out.x.coeffs_mut()[idx] = a - proj * k1;
        out.y.coeffs_mut()[idx] = b - proj * k2;
    }
    out
}

/// `Du = ½(∇u + ∇uᵀ)` and the single independent entry `W₁₂ = ½(∂₁u₂ − ∂₂u₁)` of `W(u)`.
pub fn deformation_and_rotation(u: &SpectralVector) -> (SpectralSymTensor, SpectralScalar) {
    let d11 = partial(&u.x, 0);
    let d21 = partial(&u.x, 1);
    let d12 = partial(&u.y, 0);
    let d22 = partial(&u.y, 1);
    let du = SpectralSymTensor {
        xx: d11,
        xy: d21.add(&d12).scaled(0.5),
        yy: d22,
    };
    let w = d12.sub(&d21).scaled(0.5);
    (du, w)
}

/// Zeroes every mode with `max(|k₁|, |k₂|)` above the dealiasing cutoff.
pub fn dealias(f: &SpectralScalar) -> SpectralScalar {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralScalar) {
    let g = f.grid().clone();
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if !g.keeps_mode(idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn dealias_vector(v: &SpectralVector) -> SpectralVector {
    v.map(dealias)
}

pub fn dealias_tensor(t: &SpectralSymTensor) -> SpectralSymTensor {
    t.map(dealias)
}

/// Pointwise product of two physical fields, returned dealiased.
pub fn product(a: &PhysicalField, b: &PhysicalField) -> SpectralScalar {
    let values: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y)
        .collect();
    from_values(a.grid(), values)
}

/// Forward transform of raw physical values followed by dealiasing.
pub(crate) fn from_values(grid: &TorusGrid, values: Vec<f64>) -> SpectralScalar {
    let mut f = PhysicalField::new(grid, values)
        .expect("sample count matches grid")
        .to_spectral();
    dealias_in_place(&mut f);
    f
}

/// Computes dealiased advection `u·∇f`, caching the physical velocity.
pub struct Advector {
    grid: TorusGrid,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl Advector {
    pub fn new(u: &SpectralVector) -> Self {
        Self {
            grid: u.grid().clone(),
            u1: u.x.to_physical().into_values(),
            u2: u.y.to_physical().into_values(),
        }
    }

    pub fn velocity(&self) -> (&[f64], &[f64]) {
        (&self.u1, &self.u2)
    }

    pub fn advect(&self, f: &SpectralScalar) -> SpectralScalar {
        let fx = partial(f, 0).to_physical();
        let fy = partial(f, 1).to_physical();
        let values = self
            .u1
            .iter()
            .zip(&self.u2)
            .zip(fx.values().iter().zip(fy.values()))
            .map(|((a, b), (p, q))| a * p + b * q)
            .collect();
        from_values(&self.grid, values)
    }

    pub fn advect_vector(&self, v: &SpectralVector) -> SpectralVector {
        v.map(|c| self.advect(c))
    }

    pub fn advect_tensor(&self, t: &SpectralSymTensor) -> SpectralSymTensor {
        t.map(|c| self.advect(c))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
}
