use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blocks::{active_window, block_symbol_at, low_pass_symbol_at};
use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::spectral::{Components, SpectralScalar, TorusGrid};

/// Indices of a Besov space `B^s_{p,q}`; `f64::INFINITY` stands for `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64, homogeneous: bool) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if !s.is_finite() {
            return Err(Error::Domain(format!(
                "regularity index s = {s} must be finite"
            )));
        }
        Ok(Self {
            s,
            p,
            q,
            homogeneous,
        })
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("{name} = {p} must lie in [1, inf]")));
    }
    Ok(())
}

/// A norm value together with the block window it was summed over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub j_min: i32,
    pub j_max: i32,
    /// A homogeneous norm was asked of a field with nonzero mean, and the
    /// `k = 0` mode was dropped.
    pub mean_excluded: bool,
}

/// Pointwise magnitude `|F(x)| = (Σ wᵢ Fᵢ(x)²)^{1/2}` on the grid.
pub(crate) fn magnitude(parts: &[(SpectralScalar, f64)]) -> Vec<f64> {
    let mut acc = vec![0.0; parts[0].0.grid().len()];
    for (c, w) in parts {
        let phys = c.to_physical();
        for (a, v) in acc.iter_mut().zip(phys.values()) {
            *a += w * v * v;
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    acc
}

/// `L^p` quadrature of grid values with the uniform weight `(2π/n)²`.
pub(crate) fn lp_of_values(grid: &TorusGrid, values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| v * v).sum();
        return (s * grid.cell_area()).sqrt();
    }
    let s: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    (s * grid.cell_area()).powf(1.0 / p)
}

fn owned_parts(f: &impl Components) -> Vec<(SpectralScalar, f64)> {
    f.parts().into_iter().map(|(c, w)| (c.clone(), w)).collect()
}

/// `‖f‖_{L^p}` of the pointwise magnitude; grid maximum for `p = ∞`.
pub fn lp_norm(f: &impl Components, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let parts = owned_parts(f);
    Ok(lp_of_values(f.grid(), &magnitude(&parts), p))
}

/// Exact `L^q` norm for even integer `q`: `|F|^q` is a trigonometric
/// polynomial of degree `q·k_max`, so quadrature on a zero-padded grid of
/// size `M > q·k_max` has no aliasing error.
pub fn lp_norm_even_exact(f: &impl Components, q: u32) -> Result<f64> {
    if q == 0 || q % 2 != 0 {
        return Err(Error::Domain(format!(
            "q = {q} must be a positive even integer"
        )));
    }
    let grid = f.grid();
    let mut kmax = 0i64;
    for (c, _) in f.parts() {
        for (idx, v) in c.coeffs().iter().enumerate() {
            if *v != Complex64::new(0.0, 0.0) {
                let (a, b) = grid.k_of(idx);
                kmax = kmax.max(a.abs()).max(b.abs());
            }
        }
    }
    let mut m = (q as usize) * (kmax as usize) + 1;
    m = m.max(grid.n()).max(16);
    m += m % 2;
    let fine = TorusGrid::new(m)?;
    let padded: Vec<(SpectralScalar, f64)> = f
        .parts()
        .into_iter()
        .map(|(c, w)| {
            let mut out = SpectralScalar::zeros(&fine);
            for (idx, v) in c.coeffs().iter().enumerate() {
                let (a, b) = grid.k_of(idx);
                out.set_coeff(a, b, *v);
            }
            (out, w)
        })
        .collect();
    let mag = magnitude(&padded);
    let s: f64 = mag.iter().map(|v| v.powi(q as i32)).sum();
    Ok((s * fine.cell_area()).powf(1.0 / q as f64))
}

fn strip_mean(parts: &mut [(SpectralScalar, f64)]) -> bool {
    let mut had = false;
    for (c, _) in parts.iter_mut() {
        if c.coeffs()[0].norm() > 0.0 {
            had = true;
            c.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        }
    }
    had
}

fn filtered_norm(
    parts: &[(SpectralScalar, f64)],
    p: f64,
    sym: impl Fn(usize) -> f64 + Copy,
) -> f64 {
    let grid = parts[0].0.grid();
    let filtered: Vec<(SpectralScalar, f64)> = parts
        .iter()
        .map(|(c, w)| (c.map_real_multiplier(sym), *w))
        .collect();
    if filtered.iter().all(|(c, _)| c.max_abs() == 0.0) {
        return 0.0;
    }
    lp_of_values(grid, &magnitude(&filtered), p)
}

fn combine(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0, |m, &t| m.max(t))
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `‖f‖_{B^s_{p,q}} = ‖(2^{js} ‖Δⱼ f‖_{L^p})_j‖_{ℓ^q}` over the active window.
pub fn besov_norm(
    part: &DyadicPartition,
    f: &impl Components,
    spec: BesovSpec,
) -> Result<NormValue> {
    let spec = BesovSpec::new(spec.s, spec.p, spec.q, spec.homogeneous)?;
    let grid = f.grid().clone();
    let mut parts = owned_parts(f);
    let mean_excluded = spec.homogeneous && strip_mean(&mut parts);
    let (j_min, j_max) = active_window(&grid);
    let terms: Vec<f64> = (j_min..=j_max)
        .map(|j| {
            let b = filtered_norm(&parts, spec.p, |idx| {
                block_symbol_at(part, &grid, idx, j, spec.homogeneous)
            });
            2f64.powf(j as f64 * spec.s) * b
        })
        .collect();
    Ok(NormValue {
        value: combine(&terms, spec.q),
        j_min,
        j_max,
        mean_excluded,
    })
}

/// Low-pass form `‖(2^{js} ‖Sⱼ f‖_{L^p})_j‖_{ℓ^q}`, equivalent to the block
/// norm for `s < 0`. Beyond the window `Sⱼ f = f`, and that geometric tail
/// is summed in closed form.
pub fn besov_norm_lowpass(
    part: &DyadicPartition,
    f: &impl Components,
    spec: BesovSpec,
) -> Result<NormValue> {
    let spec = BesovSpec::new(spec.s, spec.p, spec.q, spec.homogeneous)?;
    if spec.s >= 0.0 {
        return Err(Error::Domain(format!(
            "low-pass Besov form needs s < 0, got s = {}",
            spec.s
        )));
    }
    let grid = f.grid().clone();
    let mut parts = owned_parts(f);
    let mean_excluded = spec.homogeneous && strip_mean(&mut parts);
    let (_, j_max) = active_window(&grid);
    let j_min = if spec.homogeneous { -1 } else { 0 };
    let mut terms: Vec<f64> = (j_min..=j_max)
        .map(|j| {
            let b = filtered_norm(&parts, spec.p, |idx| {
                low_pass_symbol_at(part, &grid, idx, j, spec.homogeneous)
            });
            2f64.powf(j as f64 * spec.s) * b
        })
        .collect();
    let full = lp_of_values(&grid, &magnitude(&parts), spec.p);
    let value = if spec.q.is_infinite() {
        combine(&terms, spec.q)
    } else {
        let r = 2f64.powf(spec.s * spec.q);
        let tail = full.powf(spec.q) * r.powi(j_max + 1) / (1.0 - r);
        terms.push(tail.powf(1.0 / spec.q));
        combine(&terms, spec.q)
    };
    Ok(NormValue {
        value,
        j_min,
        j_max,
        mean_excluded,
    })
}

/// Homogeneous `‖Λ^s f‖_{L²}` or inhomogeneous `‖⟨D⟩^s f‖_{L²}` with
/// `⟨k⟩ = (1 + |k|²)^{1/2}`, evaluated by Parseval.
pub fn sobolev_norm(f: &impl Components, s: f64, homogeneous: bool) -> f64 {
    let grid = f.grid();
    let mut total = 0.0;
    for (c, w) in f.parts() {
        let mut acc = 0.0;
        for (idx, v) in c.coeffs().iter().enumerate() {
            let k2 = grid.k_squared(idx) as f64;
            let weight = if homogeneous {
                if k2 == 0.0 {
                    if s == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    k2.powf(s)
                }
            } else {
                (1.0 + k2).powf(s)
            };
            acc += weight * v.norm_sqr();
        }
        total += w * acc;
    }
    (grid.area() * total).sqrt()
}

/// One line of the norm table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub field_id: String,
    pub norm_kind: String,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
    pub value: f64,
    pub j_min: Option<i32>,
    pub j_max: Option<i32>,
}

pub const NORM_CSV_HEADER: &str = "field_id,norm_kind,s,p,q,homogeneous,value,j_min,j_max";

fn fmt_index(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

impl NormRow {
    pub fn to_csv(&self) -> String {
        let opt = |j: Option<i32>| j.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.16e},{},{}",
            self.field_id,
            self.norm_kind,
            fmt_index(self.s),
            fmt_index(self.p),
            fmt_index(self.q),
            self.homogeneous,
            self.value,
            opt(self.j_min),
            opt(self.j_max)
        )
    }
}
