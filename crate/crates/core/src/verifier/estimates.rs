use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::bony::mul;
use super::report::{
    parameter_point, safe_ratio, sweep_passes, Bound, EstimateReport, ParameterSweep,
};
use crate::error::{Error, Result};
use crate::lp::norms::lp_of_values;
use crate::lp::{active_window, besov_norm, block, lp_norm, lp_norm_even_exact, sobolev_norm};
use crate::lp::{bmo_seminorm, BesovSpec, DyadicPartition};
use crate::oldroyd::riesz_alpha;
use crate::spectral::ops::{fractional_power, grad, tensor_gradient, vector_gradient, Advector};
use crate::spectral::random::{scalar_field, solenoidal_field, sym_tensor_field, SpectrumSpec};
use crate::spectral::{Components, SpectralScalar, SpectralSymTensor, SpectralVector, TorusGrid};

/// Random-field ensemble and resolution sweep shared by every check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ensemble {
    pub size: usize,
    /// Spectral decay exponent of the Gaussian fields.
    pub decay: f64,
    pub base_seed: u64,
    pub resolutions: Vec<usize>,
    pub slack: f64,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self {
            size: 8,
            decay: 2.5,
            base_seed: 1,
            resolutions: vec![32, 64, 128],
            slack: super::report::DEFAULT_SLACK,
        }
    }
}

impl Ensemble {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::Parameter("ensemble must be nonempty".into()));
        }
        if self.resolutions.is_empty() {
            return Err(Error::Parameter("resolutions must be nonempty".into()));
        }
        for &n in &self.resolutions {
            TorusGrid::new(n)?;
        }
        if !(self.slack >= 1.0) {
            return Err(Error::Parameter(format!(
                "slack = {} must be at least 1",
                self.slack
            )));
        }
        if !(self.decay > 0.0) {
            return Err(Error::Parameter(format!(
                "decay = {} must be positive",
                self.decay
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.size as u64).map(|i| self.base_seed + i).collect()
    }

    fn spectrum(&self) -> SpectrumSpec {
        SpectrumSpec::gaussian(self.decay)
    }

    fn finest(&self) -> usize {
        *self.resolutions.last().expect("validated")
    }
}

const STREAM_A: u64 = 0xA11CE;
const STREAM_B: u64 = 0xB0B;
const TAU_SALT: u64 = 0x7A0_0000;

/// Fields drawn at resolution `n` and carried onto the `2n` grid, where every
/// quadratic product of them is represented exactly.
struct Draw {
    fine: TorusGrid,
    coarse: TorusGrid,
    spec: SpectrumSpec,
    seed: u64,
}

impl Draw {
    fn new(n: usize, spec: SpectrumSpec, seed: u64) -> Result<Self> {
        Ok(Self {
            fine: TorusGrid::new(2 * n)?,
            coarse: TorusGrid::new(n)?,
            spec,
            seed,
        })
    }

    fn velocity(&self) -> Result<SpectralVector> {
        solenoidal_field(&self.coarse, self.spec, self.seed).padded(&self.fine)
    }

    fn stress(&self) -> Result<SpectralSymTensor> {
        sym_tensor_field(&self.coarse, self.spec, self.seed ^ TAU_SALT).padded(&self.fine)
    }

    fn scalar(&self, stream: u64, spec: SpectrumSpec) -> Result<SpectralScalar> {
        scalar_field(&self.coarse, spec, self.seed, stream).padded(&self.fine)
    }
}

fn sweep_ensemble(
    ens: &Ensemble,
    eval: impl Fn(usize, u64) -> Result<f64> + Sync,
) -> Result<Vec<(usize, Vec<f64>)>> {
    ens.validate()?;
    let seeds = ens.seeds();
    ens.resolutions
        .iter()
        .map(|&n| {
            let ratios = seeds
                .par_iter()
                .map(|&seed| eval(n, seed))
                .collect::<Result<Vec<f64>>>()?;
            Ok((n, ratios))
        })
        .collect()
}

fn parameter_sweep(
    ens: &Ensemble,
    bound: Bound,
    axis: &str,
    values: &[f64],
    eval: impl Fn(usize, u64, f64) -> Result<Option<f64>> + Sync,
) -> Result<ParameterSweep> {
    let n = ens.finest();
    let seeds = ens.seeds();
    let mut points = Vec::new();
    for &v in values {
        let ratios: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| eval(n, seed, v))
            .collect::<Result<Vec<Option<f64>>>>()?
            .into_iter()
            .flatten()
            .collect();
        if !ratios.is_empty() {
            points.push(parameter_point(v, &ratios));
        }
    }
    let series: Vec<(f64, f64)> = points.iter().map(|p| (p.max_ratio, p.min_ratio)).collect();
    Ok(ParameterSweep {
        axis: axis.to_string(),
        n,
        pass: sweep_passes(bound, &series, ens.slack),
        points,
    })
}

fn besov_inf(part: &DyadicPartition, f: &impl Components, s: f64) -> Result<f64> {
    Ok(besov_norm(
        part,
        f,
        BesovSpec::new(s, f64::INFINITY, f64::INFINITY, false)?,
    )?
    .value)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be positive")))
    }
}

/// One component of a block commutator `Δⱼ(u·∇f) − u·∇Δⱼf`, kept as its
/// two terms, with the block it is paired against and the pairing weight.
struct BlockTerm {
    first: SpectralScalar,
    second: SpectralScalar,
    paired: SpectralScalar,
    weight: f64,
}

/// `Σ_{j≥0} 2^{2js} |([Δⱼ, u·∇]f | Δⱼf)|`, plus the Cauchy–Schwarz bound of
/// both commutator terms used as the zero threshold.
fn block_pairing_sum(
    s: f64,
    grid: &TorusGrid,
    terms_j: impl Fn(i32) -> Vec<BlockTerm>,
) -> (f64, f64) {
    let (_, j_hi) = active_window(grid);
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for j in 0..=j_hi {
        let w = 2f64.powf(2.0 * j as f64 * s);
        let mut pairing = 0.0;
        let mut bound = 0.0;
        for t in terms_j(j) {
            let g = t.paired.l2_norm();
            pairing += t.weight * t.first.sub(&t.second).inner(&t.paired);
            bound += t.weight * (t.first.l2_norm() + t.second.l2_norm()) * g;
        }
        lhs += w * pairing.abs();
        scale += w * bound;
    }
    (lhs, scale)
}

fn terms<const N: usize>(
    first: [SpectralScalar; N],
    second: [SpectralScalar; N],
    paired: [SpectralScalar; N],
    weights: [f64; N],
) -> Vec<BlockTerm> {
    first
        .into_iter()
        .zip(second)
        .zip(paired)
        .zip(weights)
        .map(|(((first, second), paired), weight)| BlockTerm {
            first,
            second,
            paired,
            weight,
        })
        .collect()
}

/// Ratio for `Σ_{j≥0} 2^{2js}([Δⱼ, u·∇]u | Δⱼu) ≤ C ‖∇u‖_{B^{−α}_{∞,∞}} ‖u‖_{H^s} ‖u‖_{H^{s+α}}`.
pub fn commutator_sum_u_ratio(
    part: &DyadicPartition,
    u: &SpectralVector,
    s: f64,
    alpha: f64,
) -> Result<f64> {
    let adv = Advector::new(u);
    let uu = adv.advect_vector(u);
    let (lhs, scale) = block_pairing_sum(s, u.grid(), |j| {
        let bu = u.map(|c| block(part, c, j, false));
        let first = uu.map(|c| block(part, c, j, false));
        let second = adv.advect_vector(&bu);
        terms(
            [first.x, first.y],
            [second.x, second.y],
            [bu.x, bu.y],
            [1.0; 2],
        )
    });
    let rhs = besov_inf(part, &vector_gradient(u), -alpha)?
        * sobolev_norm(u, s, false)
        * sobolev_norm(u, s + alpha, false);
    Ok(safe_ratio(lhs, rhs, scale))
}

/// Right-hand side used for the stress commutator sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TauMode {
    /// `‖∇u‖_{B^{−β}} ‖τ‖_{H^s} ‖τ‖_{H^{s+β}} + ‖∇τ‖_{B^{−α}} ‖τ‖_{H^s} ‖u‖_{H^{s+α}}`.
    Eq22 { s: f64, alpha: f64, beta: f64 },
    /// `‖∇u‖_{L^∞} ‖τ‖²_{H^{s₂}} + ‖∇τ‖_{B^{s₂−s₁−α}} ‖τ‖_{H^{s₂}} ‖u‖_{H^{s₁+α}}`.
    Eq23 { s1: f64, s2: f64, alpha: f64 },
}

impl TauMode {
    fn id(&self) -> &'static str {
        match self {
            TauMode::Eq22 { .. } => "eq2_2",
            TauMode::Eq23 { .. } => "eq2_3",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TauMode::Eq22 { s, alpha, beta } => {
                check_positive("s", s)?;
                check_positive("alpha", alpha)?;
                check_positive("beta", beta)
            }
            TauMode::Eq23 { s1, s2, alpha } => {
                check_positive("s2", s2)?;
                if !(s2 - s1 - alpha < 0.0) {
                    return Err(Error::Parameter(format!(
                        "need s2 - s1 - alpha < 0, got {}",
                        s2 - s1 - alpha
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Ratio for `Σ_{j≥0} 2^{2js}([Δⱼ, u·∇]τ | Δⱼτ)` against the chosen bound.
pub fn commutator_sum_tau_ratio(
    part: &DyadicPartition,
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    mode: TauMode,
) -> Result<f64> {
    mode.validate()?;
    let s = match mode {
        TauMode::Eq22 { s, .. } => s,
        TauMode::Eq23 { s2, .. } => s2,
    };
    let adv = Advector::new(u);
    let ut = adv.advect_tensor(tau);
    let (lhs, scale) = block_pairing_sum(s, u.grid(), |j| {
        let bt = tau.map(|c| block(part, c, j, false));
        let first = ut.map(|c| block(part, c, j, false));
        let second = adv.advect_tensor(&bt);
        terms(
            [first.xx, first.xy, first.yy],
            [second.xx, second.xy, second.yy],
            [bt.xx, bt.xy, bt.yy],
            [1.0, 2.0, 1.0],
        )
    });
    let grad_u = vector_gradient(u);
    let grad_tau = tensor_gradient(tau);
    let rhs = match mode {
        TauMode::Eq22 { s, alpha, beta } => {
            besov_inf(part, &grad_u, -beta)?
                * sobolev_norm(tau, s, false)
                * sobolev_norm(tau, s + beta, false)
                + besov_inf(part, &grad_tau, -alpha)?
                    * sobolev_norm(tau, s, false)
                    * sobolev_norm(u, s + alpha, false)
        }
        TauMode::Eq23 { s1, s2, alpha } => {
            lp_norm(&grad_u, f64::INFINITY)? * sobolev_norm(tau, s2, false).powi(2)
                + besov_inf(part, &grad_tau, s2 - s1 - alpha)?
                    * sobolev_norm(tau, s2, false)
                    * sobolev_norm(u, s1 + alpha, false)
        }
    };
    Ok(safe_ratio(lhs, rhs, scale))
}

/// Ratio for `‖[R_α, u·∇]τ‖²_{Ḣ^{2α−3}} ≤ C ‖u‖²_{H^α} ‖τ‖²_{L²}`.
pub fn riesz_commutator_ratio(
    u: &SpectralVector,
    tau: &SpectralSymTensor,
    alpha: f64,
    nu: f64,
) -> Result<f64> {
    let adv = Advector::new(u);
    let first = riesz_alpha(&adv.advect_tensor(tau), alpha, nu)?;
    let second = adv.advect(&riesz_alpha(tau, alpha, nu)?);
    let r = 2.0 * alpha - 3.0;
    let lhs = sobolev_norm(&first.sub(&second), r, true).powi(2);
    let scale = (sobolev_norm(&first, r, true) + sobolev_norm(&second, r, true)).powi(2);
    let rhs = sobolev_norm(u, alpha, false).powi(2) * tau.l2_norm().powi(2);
    Ok(safe_ratio(lhs, rhs, scale))
}

/// Profile `θ` of the smooth multiplier `θ(λ^{−1}D)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theta {
    Chi,
    Phi,
}

/// Lebesgue exponents `(p, q, r)` with `1/p + 1/q = 1/r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// JSON has no infinity; `∞` is reported as the string `"inf"`.
fn exponent(p: f64) -> serde_json::Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::Parameter(format!(
            "{name} = {p} must lie in [1, inf]"
        )))
    } else {
        Ok(())
    }
}

impl HolderTriple {
    fn validate(&self) -> Result<()> {
        check_exponent("p", self.p)?;
        check_exponent("q", self.q)?;
        check_exponent("r", self.r)?;
        if (inv(self.p) + inv(self.q) - inv(self.r)).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "exponents must satisfy 1/p + 1/q = 1/r, got p = {}, q = {}, r = {}",
                self.p, self.q, self.r
            )));
        }
        Ok(())
    }
}

/// Ratio `λ ‖[θ(λ^{−1}D), a]b‖_{L^r} / (‖∇a‖_{L^p} ‖b‖_{L^q})`.
pub fn smooth_commutator_ratio(
    part: &DyadicPartition,
    theta: Theta,
    lambda: f64,
    a: &SpectralScalar,
    b: &SpectralScalar,
    exps: HolderTriple,
) -> Result<f64> {
    exps.validate()?;
    check_positive("lambda", lambda)?;
    let grid = a.grid().clone();
    let apply = |f: &SpectralScalar| {
        f.map_real_multiplier(|idx| {
            let r = grid.k_norm(idx) / lambda;
            match theta {
                Theta::Chi => part.chi(r),
                Theta::Phi => part.phi(r),
            }
        })
    };
    let first = apply(&mul(a, b));
    let second = mul(a, &apply(b));
    let lhs = lambda * lp_norm(&first.sub(&second), exps.r)?;
    let scale = lambda * (lp_norm(&first, exps.r)? + lp_norm(&second, exps.r)?);
    let rhs = lp_norm(&grad(a), exps.p)? * lp_norm(b, exps.q)?;
    Ok(safe_ratio(lhs, rhs, scale))
}

/// Exponents `(p, p₁, p₂)` with `1 + 1/p = 1/p₁ + 1/p₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungTriple {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
}

impl YoungTriple {
    fn validate(&self) -> Result<()> {
        check_exponent("p", self.p)?;
        check_exponent("p1", self.p1)?;
        check_exponent("p2", self.p2)?;
        if (1.0 + inv(self.p) - inv(self.p1) - inv(self.p2)).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "exponents must satisfy 1 + 1/p = 1/p1 + 1/p2, got p = {}, p1 = {}, p2 = {}",
                self.p, self.p1, self.p2
            )));
        }
        Ok(())
    }
}

/// `‖x h‖_{L^{p₁}}` for the kernel `h` of `Δⱼ`, with `x` the sawtooth
/// coordinate in `[−π, π)²` centred on the kernel's peak.
pub fn kernel_moment(part: &DyadicPartition, grid: &TorusGrid, j: i32, p1: f64) -> f64 {
    let area = grid.area();
    let half = grid.n() as i64 / 2;
    let mut h = SpectralScalar::zeros(grid);
    for idx in 0..grid.len() {
        let (k1, k2) = grid.k_of(idx);
        if k1 != -half && k2 != -half {
            h.coeffs_mut()[idx] =
                Complex64::new(part.block_symbol(j, grid.k_norm(idx), false) / area, 0.0);
        }
    }
    let phys = h.to_physical();
    let n = grid.n();
    let dx = grid.spacing();
    let saw = |i: usize| {
        if i < n / 2 {
            i as f64 * dx
        } else {
            (i as f64 - n as f64) * dx
        }
    };
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let (i, k) = (idx / n, idx % n);
            saw(i).hypot(saw(k)) * phys.values()[idx].abs()
        })
        .collect();
    lp_of_values(grid, &vals, p1)
}

/// Ratio for `‖h⋆(fg) − f(h⋆g)‖_{L^p} ≤ C ‖xh‖_{L^{p₁}} ‖∇f‖_{L^∞} ‖g‖_{L^{p₂}}`
/// with `h⋆ = Δⱼ`.
pub fn kernel_commutator_ratio(
    part: &DyadicPartition,
    j: i32,
    f: &SpectralScalar,
    g: &SpectralScalar,
    exps: YoungTriple,
) -> Result<f64> {
    exps.validate()?;
    let first = block(part, &mul(f, g), j, false);
    let second = mul(f, &block(part, g, j, false));
    let lhs = lp_norm(&first.sub(&second), exps.p)?;
    let scale = lp_norm(&first, exps.p)? + lp_norm(&second, exps.p)?;
    let rhs = kernel_moment(part, f.grid(), j, exps.p1)
        * lp_norm(&grad(f), f64::INFINITY)?
        * lp_norm(g, exps.p2)?;
    Ok(safe_ratio(lhs, rhs, scale))
}

fn riesz_pair(f: &SpectralScalar, i: usize, j: usize) -> SpectralScalar {
    let grid = f.grid().clone();
    f.map_real_multiplier(|idx| {
        let (k1, k2) = grid.k_of(idx);
        let k = [k1 as f64, k2 as f64];
        let kk = k[0] * k[0] + k[1] * k[1];
        if kk == 0.0 {
            0.0
        } else {
            k[i] * k[j] / kk
        }
    })
}

/// Ratio for `‖[b, RᵢRⱼ]f‖_{L^p} ≤ C [b]_{BMO} ‖f‖_{L^p}`, maximised over
/// the index pairs `(1,1), (1,2), (2,2)`.
pub fn riesz_bmo_ratio(b: &SpectralScalar, f: &SpectralScalar, p: f64) -> Result<f64> {
    riesz_bmo_ratio_given(b, f, p, bmo_seminorm(&b.to_physical()))
}

fn check_interior(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "p = {p} must lie strictly between 1 and inf"
        )))
    }
}

fn riesz_bmo_ratio_given(b: &SpectralScalar, f: &SpectralScalar, p: f64, bmo: f64) -> Result<f64> {
    check_interior(p)?;
    let bf = mul(b, f);
    let mut lhs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        let first = mul(b, &riesz_pair(f, i, j));
        let second = riesz_pair(&bf, i, j);
        lhs = lhs.max(lp_norm(&first.sub(&second), p)?);
        scale = scale.max(lp_norm(&first, p)? + lp_norm(&second, p)?);
    }
    let rhs = bmo * lp_norm(f, p)?;
    Ok(safe_ratio(lhs, rhs, scale))
}

/// Lower ratio `∫ Λ^{2β}Δ̇ⱼf · Δ̇ⱼf |Δ̇ⱼf|^{q−2} / (2^{2jβ} ‖Δ̇ⱼf‖^q_{L^q})`,
/// or `None` when the block is empty. Both integrals are evaluated exactly
/// on a zero-padded grid.
pub fn generalized_bernstein_ratio(
    part: &DyadicPartition,
    f: &SpectralScalar,
    j: i32,
    beta: f64,
    q: u32,
) -> Result<Option<f64>> {
    if q < 2 || q % 2 != 0 {
        return Err(Error::Unsupported(format!(
            "q = {q}: only even integers q >= 2 have exact quadrature"
        )));
    }
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::Parameter(format!(
            "beta = {beta} must lie in (0, 1/2]"
        )));
    }
    let g = block(part, f, j, true);
    if g.max_abs() == 0.0 {
        return Ok(None);
    }
    let grid = g.grid();
    let mut kmax = 0usize;
    for (idx, c) in g.coeffs().iter().enumerate() {
        if c.norm() > 0.0 {
            let (a, b) = grid.k_of(idx);
            kmax = kmax
                .max(a.unsigned_abs() as usize)
                .max(b.unsigned_abs() as usize);
        }
    }
    let mut m = (q as usize * kmax + 1).max(grid.n());
    m += m % 2;
    let fine = TorusGrid::new(m)?;
    let gf = g.padded(&fine)?;
    let lifted = fractional_power(&gf, 2.0 * beta).to_physical();
    let gp = gf.to_physical();
    let integral: f64 = lifted
        .values()
        .iter()
        .zip(gp.values())
        .map(|(l, v)| l * v.powi(q as i32 - 1))
        .sum::<f64>()
        * fine.cell_area();
    let norm_q = lp_norm_even_exact(&g, q)?.powi(q as i32);
    let denom = 2f64.powf(2.0 * j as f64 * beta) * norm_q;
    Ok(Some(integral / denom))
}

pub fn check_commutator_sum_u(ens: &Ensemble, s: f64, alpha: f64) -> Result<EstimateReport> {
    check_positive("s", s)?;
    check_positive("alpha", alpha)?;
    let part = DyadicPartition::default();
    let spec = ens.spectrum();
    let sweep = sweep_ensemble(ens, |n, seed| {
        let d = Draw::new(n, spec, seed)?;
        commutator_sum_u_ratio(&part, &d.velocity()?, s, alpha)
    })?;
    Ok(EstimateReport::assemble(
        "eq2_1",
        Bound::Upper,
        json!({"s": s, "alpha": alpha, "decay": ens.decay}),
        ens.slack,
        &ens.seeds(),
        sweep,
        None,
        vec![],
    ))
}

pub fn check_commutator_sum_tau(ens: &Ensemble, mode: TauMode) -> Result<EstimateReport> {
    mode.validate()?;
    let part = DyadicPartition::default();
    let spec = ens.spectrum();
    let sweep = sweep_ensemble(ens, |n, seed| {
        let d = Draw::new(n, spec, seed)?;
        commutator_sum_tau_ratio(&part, &d.velocity()?, &d.stress()?, mode)
    })?;
    let mut params = serde_json::to_value(mode)?;
    params["decay"] = json!(ens.decay);
    Ok(EstimateReport::assemble(
        mode.id(),
        Bound::Upper,
        params,
        ens.slack,
        &ens.seeds(),
        sweep,
        None,
        vec![],
    ))
}

pub fn check_riesz_commutator(ens: &Ensemble, alpha: f64, nu: f64) -> Result<EstimateReport> {
    check_positive("nu", nu)?;
    let mut warnings = Vec::new();
    if !(alpha > 1.0 && alpha <= 1.5) {
        warnings.push(format!(
            "alpha = {alpha} lies outside (1, 3/2], where the bound is claimed"
        ));
    }
    let spec = ens.spectrum();
    let sweep = sweep_ensemble(ens, |n, seed| {
        let d = Draw::new(n, spec, seed)?;
        riesz_commutator_ratio(&d.velocity()?, &d.stress()?, alpha, nu)
    })?;
    Ok(EstimateReport::assemble(
        "eq3_12",
        Bound::Upper,
        json!({"alpha": alpha, "nu": nu, "decay": ens.decay}),
        ens.slack,
        &ens.seeds(),
        sweep,
        None,
        warnings,
    ))
}

pub fn check_smooth_commutator(
    ens: &Ensemble,
    theta: Theta,
    lambdas: &[f64],
    exps: HolderTriple,
) -> Result<EstimateReport> {
    exps.validate()?;
    if lambdas.is_empty() {
        return Err(Error::Parameter("lambda sweep must be nonempty".into()));
    }
    for &l in lambdas {
        check_positive("lambda", l)?;
    }
    let part = DyadicPartition::default();
    let spec = ens.spectrum();
    let at = |n: usize, seed: u64, lambda: f64| -> Result<f64> {
        let d = Draw::new(n, spec, seed)?;
        smooth_commutator_ratio(
            &part,
            theta,
            lambda,
            &d.scalar(STREAM_A, spec)?,
            &d.scalar(STREAM_B, spec)?,
            exps,
        )
    };
    let sweep = sweep_ensemble(ens, |n, seed| {
        lambdas
            .iter()
            .try_fold(0.0f64, |m, &l| Ok(m.max(at(n, seed, l)?)))
    })?;
    let lambda_sweep = parameter_sweep(ens, Bound::Upper, "lambda", lambdas, |n, seed, l| {
        at(n, seed, l).map(Some)
    })?;
    Ok(EstimateReport::assemble(
        "sce",
        Bound::Upper,
        json!({
            "theta": theta,
            "lambdas": lambdas,
            "exponents": {"p": exponent(exps.p), "q": exponent(exps.q), "r": exponent(exps.r)},
            "decay": ens.decay,
        }),
        ens.slack,
        &ens.seeds(),
        sweep,
        Some(lambda_sweep),
        vec![],
    ))
}

pub fn check_kernel_commutator(
    ens: &Ensemble,
    j: i32,
    exps: YoungTriple,
) -> Result<EstimateReport> {
    exps.validate()?;
    let part = DyadicPartition::default();
    let spec = ens.spectrum();
    let sweep = sweep_ensemble(ens, |n, seed| {
        let d = Draw::new(n, spec, seed)?;
        kernel_commutator_ratio(
            &part,
            j,
            &d.scalar(STREAM_A, spec)?,
            &d.scalar(STREAM_B, spec)?,
            exps,
        )
    })?;
    Ok(EstimateReport::assemble(
        "wu_jmfm",
        Bound::Upper,
        json!({
            "j": j,
            "exponents": {"p": exponent(exps.p), "p1": exponent(exps.p1), "p2": exponent(exps.p2)},
            "decay": ens.decay,
        }),
        ens.slack,
        &ens.seeds(),
        sweep,
        None,
        vec![],
    ))
}

/// `b` carries the modulus `|k|^{−2}` of `log|x|` with random phases.
pub fn check_riesz_bmo_commutator(ens: &Ensemble, p: f64) -> Result<EstimateReport> {
    check_interior(p)?;
    let spec = ens.spectrum();
    let log_type = SpectrumSpec::random_phase(2.0, 1.0);
    let sweep = sweep_ensemble(ens, |n, seed| {
        let d = Draw::new(n, spec, seed)?;
        let b = scalar_field(&d.coarse, log_type, seed, STREAM_A);
        let bmo = bmo_seminorm(&b.to_physical());
        riesz_bmo_ratio_given(&b.padded(&d.fine)?, &d.scalar(STREAM_B, spec)?, p, bmo)
    })?;
    Ok(EstimateReport::assemble(
        "weies",
        Bound::Upper,
        json!({"p": p, "b_decay": 2.0, "decay": ens.decay}),
        ens.slack,
        &ens.seeds(),
        sweep,
        None,
        vec![],
    ))
}

pub fn check_generalized_bernstein(
    ens: &Ensemble,
    beta: f64,
    q: u32,
    js: &[i32],
) -> Result<EstimateReport> {
    if js.is_empty() {
        return Err(Error::Parameter("block sweep must be nonempty".into()));
    }
    let part = DyadicPartition::default();
    let spec = ens.spectrum();
    let at = |n: usize, seed: u64, j: i32| -> Result<Option<f64>> {
        let d = Draw::new(n, spec, seed)?;
        generalized_bernstein_ratio(&part, &d.scalar(STREAM_A, spec)?, j, beta, q)
    };
    // validate the exponents before sweeping
    generalized_bernstein_ratio(
        &part,
        &SpectralScalar::zeros(&TorusGrid::new(16)?),
        0,
        beta,
        q,
    )?;
    let sweep = sweep_ensemble(ens, |n, seed| {
        let mut min = f64::INFINITY;
        for &j in js {
            if let Some(r) = at(n, seed, j)? {
                min = min.min(r);
            }
        }
        Ok(if min.is_finite() { min } else { 0.0 })
    })?;
    let values: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let j_sweep = parameter_sweep(ens, Bound::Lower, "j", &values, |n, seed, j| {
        at(n, seed, j as i32)
    })?;
    Ok(EstimateReport::assemble(
        "gen_bernstein",
        Bound::Lower,
        json!({"beta": beta, "q": q, "j": js, "decay": ens.decay}),
        ens.slack,
        &ens.seeds(),
        sweep,
        Some(j_sweep),
        vec![],
    ))
}
