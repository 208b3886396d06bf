use crate::error::{Error, Result};
use crate::oldroyd::{linear_rates, nonlinear, quadratic, State, SystemParams};
use crate::spectral::ops::leray_project;
use crate::spectral::{SpectralScalar, SpectralSymTensor, SpectralVector, TorusGrid};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Time-stepping scheme. Both integrate the linear decay exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Lawson RK4: classical RK4 on `e^{−tL}y`, where `L` holds the decay and,
    /// mode by mode, the linear coupling of transverse velocity and stress shear.
    #[default]
    IfRk4,
    /// Cox–Matthews exponential time differencing RK4 with the diagonal decay
    /// as linear part.
    EtdRk4,
}

/// `(u, τ)` as one vector for the RK stages.
#[derive(Clone)]
struct Pair {
    u: SpectralVector,
    tau: SpectralSymTensor,
}

impl Pair {
    fn axpy(&self, a: f64, other: &Pair) -> Pair {
        Pair {
            u: self.u.axpy(a, &other.u),
            tau: self.tau.axpy(a, &other.tau),
        }
    }

    fn is_finite(&self) -> bool {
        self.u.is_finite() && self.tau.is_finite()
    }

    fn scaled_by(&self, m: &Multipliers) -> Pair {
        Pair {
            u: self.u.map(|c| c.map_real_multiplier(|i| m.u[i])),
            tau: self.tau.map(|c| c.map_real_multiplier(|i| m.tau[i])),
        }
    }
}

/// One real multiplier per mode for each of `u` and `τ`.
struct Multipliers {
    u: Vec<f64>,
    tau: Vec<f64>,
}

impl Multipliers {
    fn new(rates: &crate::oldroyd::LinearRates, f: impl Fn(f64) -> f64) -> Self {
        Self {
            u: rates.velocity.iter().map(|&l| f(l)).collect(),
            tau: rates.stress.iter().map(|&l| f(l)).collect(),
        }
    }
}

/// `φ₁, φ₂, φ₃` at `z ≤ 0`, with `φₖ(z) = Σ zᵐ/(m+k)!`.
fn phi123(z: f64) -> [f64; 3] {
    if z.abs() < 1.0 {
        let mut out = [0.0; 3];
        let mut term = 1.0;
        for m in 0..25 {
            for (k, o) in out.iter_mut().enumerate() {
                let mut t = term;
                for d in 1..=k + 1 {
                    t /= (m + d) as f64;
                }
                *o += t;
            }
            term *= z / (m + 1) as f64;
        }
        out
    } else {
        let p1 = z.exp_m1() / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

/// Coefficients of the Cox–Matthews scheme for `y' = −λy + N`.
struct EtdCoefficients {
    /// `(h/2) φ₁(−λh/2)`.
    half: Multipliers,
    /// `h (φ₁ − 3φ₂ + 4φ₃)`, `h (φ₂ − 2φ₃)`, `h (4φ₃ − φ₂)` at `−λh`.
    f1: Multipliers,
    f2: Multipliers,
    f3: Multipliers,
}

impl EtdCoefficients {
    fn new(rates: &crate::oldroyd::LinearRates, h: f64) -> Self {
        let at = |l: f64| phi123(-l * h);
        Self {
            half: Multipliers::new(rates, |l| 0.5 * h * phi123(-0.5 * l * h)[0]),
            f1: Multipliers::new(rates, |l| {
                let [a, b, c] = at(l);
                h * (a - 3.0 * b + 4.0 * c)
            }),
            f2: Multipliers::new(rates, |l| {
                let [_, b, c] = at(l);
                h * (b - 2.0 * c)
            }),
            f3: Multipliers::new(rates, |l| {
                let [_, b, c] = at(l);
                h * (4.0 * c - b)
            }),
        }
    }
}

type Mat2 = [[f64; 2]; 2];

const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

fn mat_mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            *o = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_t(a: Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn mat_axpy(a: Mat2, s: f64, b: Mat2) -> Mat2 {
    [
        [a[0][0] + s * b[0][0], a[0][1] + s * b[0][1]],
        [a[1][0] + s * b[1][0], a[1][1] + s * b[1][1]],
    ]
}

/// `e^{hL}` and the Gramian `∫₀^h e^{sLᵀ} diag(w) e^{sL} ds`, by Taylor
/// series on `h/2^m` followed by `m` doublings
/// `G(2s) = G(s) + e^{sLᵀ}G(s)e^{sL}`.
fn exp_and_gramian(l: Mat2, w: [f64; 2], h: f64) -> (Mat2, Mat2) {
    let norm = l
        .iter()
        .map(|r| r[0].abs() + r[1].abs())
        .fold(0.0, f64::max)
        * h;
    let squarings = if norm > 0.125 {
        (norm / 0.125).log2().ceil() as i32
    } else {
        0
    };
    let s = h / 2f64.powi(squarings);
    let ls = mat_axpy([[0.0; 2]; 2], s, l);
    let lst = mat_t(ls);
    let mut e = IDENTITY;
    let mut term = IDENTITY;
    // C_n = ad-powers of w scaled by sⁿ; G(s) = s Σ C_n/(n+1)!
    let mut c = [[w[0], 0.0], [0.0, w[1]]];
    let mut g = mat_axpy([[0.0; 2]; 2], s, c);
    let mut fact = 1.0;
    for n in 1..24 {
        term = mat_axpy([[0.0; 2]; 2], 1.0 / n as f64, mat_mul(term, ls));
        e = mat_axpy(e, 1.0, term);
        c = mat_axpy(mat_mul(lst, c), 1.0, mat_mul(c, ls));
        fact *= (n + 1) as f64;
        g = mat_axpy(g, s / fact, c);
    }
    for _ in 0..squarings {
        g = mat_axpy(g, 1.0, mat_mul(mat_mul(mat_t(e), g), e));
        e = mat_mul(e, e);
    }
    (e, g)
}

/// Exact linear dynamics of one mode's transverse velocity `a = ê·û` and
/// stress shear `c = √2 k̂·τ̂ê`. With `c = iσ` they obey
/// `a' = −λ_u a − (κr/√2)σ`, `σ' = (α₁r/√2)a − λ_τσ`.
#[derive(Clone, Copy)]
struct Block {
    khat: (f64, f64),
    ehat: (f64, f64),
    /// `e^{hL}` for `h = dt/2` and `h = dt`.
    exp: [Mat2; 2],
    /// Dissipation Gramians for `Λ = diag(λ_u, (κ/α₁)λ_τ)`, same order.
    gram: [Mat2; 2],
}

/// One mode in the frame `(k̂, ê)`: velocity `(g, a)` along `(k̂, ê)`, stress
/// `(t₁, c, t₃)` along `k̂k̂`, `(k̂ê + êk̂)/√2`, `êê`.
#[derive(Clone, Copy)]
struct Frame {
    g: Complex64,
    a: Complex64,
    t1: Complex64,
    c: Complex64,
    t3: Complex64,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

impl Block {
    fn new(k: (f64, f64), lu: f64, lt: f64, params: &SystemParams, dt: f64) -> Self {
        let r = k.0.hypot(k.1);
        let l = [
            [-lu, -params.kappa * r / SQRT2],
            [params.alpha1 * r / SQRT2, -lt],
        ];
        let w = [lu, params.stress_weight() * lt];
        let (e_half, g_half) = exp_and_gramian(l, w, 0.5 * dt);
        let g_full = mat_axpy(g_half, 1.0, mat_mul(mat_mul(mat_t(e_half), g_half), e_half));
        Self {
            khat: (k.0 / r, k.1 / r),
            ehat: (-k.1 / r, k.0 / r),
            exp: [e_half, mat_mul(e_half, e_half)],
            gram: [g_half, g_full],
        }
    }

    fn project(&self, u: [Complex64; 2], t: [Complex64; 3]) -> Frame {
        let (kx, ky) = self.khat;
        let (ex, ey) = self.ehat;
        Frame {
            g: u[0] * kx + u[1] * ky,
            a: u[0] * ex + u[1] * ey,
            t1: t[0] * (kx * kx) + t[1] * (2.0 * kx * ky) + t[2] * (ky * ky),
            c: (t[0] * (kx * ex) + t[1] * (kx * ey + ky * ex) + t[2] * (ky * ey)) * SQRT2,
            t3: t[0] * (ex * ex) + t[1] * (2.0 * ex * ey) + t[2] * (ey * ey),
        }
    }

    fn assemble(&self, f: Frame) -> ([Complex64; 2], [Complex64; 3]) {
        let (kx, ky) = self.khat;
        let (ex, ey) = self.ehat;
        let s = f.c / SQRT2;
        (
            [f.g * kx + f.a * ex, f.g * ky + f.a * ey],
            [
                f.t1 * (kx * kx) + s * (2.0 * kx * ex) + f.t3 * (ex * ex),
                f.t1 * (kx * ky) + s * (kx * ey + ky * ex) + f.t3 * (ex * ey),
                f.t1 * (ky * ky) + s * (2.0 * ky * ey) + f.t3 * (ey * ey),
            ],
        )
    }

    /// `(a, σ)` with `σ = −ic`.
    fn pair(f: &Frame) -> [Complex64; 2] {
        [f.a, -Complex64::i() * f.c]
    }
}

/// `x̄ᵀ M y` for a real `M`.
fn form(m: &Mat2, x: [Complex64; 2], y: [Complex64; 2]) -> Complex64 {
    let my = [
        m[0][0] * y[0] + m[0][1] * y[1],
        m[1][0] * y[0] + m[1][1] * y[1],
    ];
    x[0].conj() * my[0] + x[1].conj() * my[1]
}

fn mode_of(p: &Pair, idx: usize) -> ([Complex64; 2], [Complex64; 3]) {
    (
        [p.u.x.coeffs()[idx], p.u.y.coeffs()[idx]],
        [
            p.tau.xx.coeffs()[idx],
            p.tau.xy.coeffs()[idx],
            p.tau.yy.coeffs()[idx],
        ],
    )
}

/// Per-mode decay factors `exp(−h L)` for `h = dt/2` and `h = dt`, and for
/// the Lawson scheme the coupled blocks of every mode with `k ≠ 0`.
struct Propagator {
    half_u: Vec<f64>,
    full_u: Vec<f64>,
    half_tau: Vec<f64>,
    full_tau: Vec<f64>,
    quad_u: Vec<[f64; 4]>,
    quad_tau: Vec<[f64; 4]>,
    blocks: Vec<Option<Block>>,
    etd: Option<EtdCoefficients>,
}

impl Propagator {
    fn new(grid: &TorusGrid, params: &SystemParams, dt: f64, scheme: Scheme) -> Self {
        let rates = linear_rates(grid, params);
        let f = |r: &[f64], h: f64| r.iter().map(|l| (-h * l).exp()).collect::<Vec<_>>();
        let blocks = match scheme {
            Scheme::IfRk4 => (0..grid.len())
                .map(|idx| {
                    let k = grid.derivative_k(idx);
                    (k != (0.0, 0.0))
                        .then(|| Block::new(k, rates.velocity[idx], rates.stress[idx], params, dt))
                })
                .collect(),
            Scheme::EtdRk4 => Vec::new(),
        };
        Self {
            half_u: f(&rates.velocity, 0.5 * dt),
            full_u: f(&rates.velocity, dt),
            half_tau: f(&rates.stress, 0.5 * dt),
            full_tau: f(&rates.stress, dt),
            quad_u: rates
                .velocity
                .iter()
                .map(|&l| mode_weights(scheme, l, dt))
                .collect(),
            quad_tau: rates
                .stress
                .iter()
                .map(|&l| mode_weights(scheme, l, dt))
                .collect(),
            blocks,
            etd: (scheme == Scheme::EtdRk4).then(|| EtdCoefficients::new(&rates, dt)),
        }
    }

    fn apply(&self, p: &Pair, full: bool) -> Pair {
        let (mu, mt) = if full {
            (&self.full_u, &self.full_tau)
        } else {
            (&self.half_u, &self.half_tau)
        };
        let scale_u = |c: &SpectralScalar| c.map_real_multiplier(|i| mu[i]);
        let scale_t = |c: &SpectralScalar| c.map_real_multiplier(|i| mt[i]);
        let mut out = Pair {
            u: p.u.map(scale_u),
            tau: p.tau.map(scale_t),
        };
        for (idx, block) in self.blocks.iter().enumerate() {
            let Some(b) = block else { continue };
            let (u, t) = mode_of(p, idx);
            let mut f = b.project(u, t);
            let e = &b.exp[usize::from(full)];
            let [a, s] = Block::pair(&f);
            f.g *= mu[idx];
            f.t1 *= mt[idx];
            f.t3 *= mt[idx];
            f.a = a * e[0][0] + s * e[0][1];
            f.c = Complex64::i() * (a * e[1][0] + s * e[1][1]);
            let (u, t) = b.assemble(f);
            out.u.x.coeffs_mut()[idx] = u[0];
            out.u.y.coeffs_mut()[idx] = u[1];
            out.tau.xx.coeffs_mut()[idx] = t[0];
            out.tau.xy.coeffs_mut()[idx] = t[1];
            out.tau.yy.coeffs_mut()[idx] = t[2];
        }
        out
    }
}

/// Per-mode weights for the dissipation `∫₀^h λ|c(s)|² ds` over one step.
///
/// With `e = |c|²` and `F = 2 Re(c̄ N)`, the pair `(e, D)` obeys the
/// lower-triangular linear system `e' = −2λe + F`, `D' = λe`. Running the
/// chosen scheme on this augmented system, with `F` taken at the stages of
/// the velocity and stress integration, gives `D(h)` as a combination of
/// `e(0)` and the four stage values of `F`. For a function `g` of the
/// system matrix the `(D, e)` entry is `(g(0) − g(−2λh))/2`.
/// Returns `[e(0), F₁, (F₂ + F₃)/2, F₄]` weights; all vanish for `λ = 0`.
fn mode_weights(scheme: Scheme, lambda: f64, h: f64) -> [f64; 4] {
    let t = lambda * h;
    let free = -0.5 * (-2.0 * t).exp_m1();
    match scheme {
        Scheme::IfRk4 => [
            free,
            h / 6.0 * free,
            h / 6.0 * 4.0 * -0.5 * (-t).exp_m1(),
            0.0,
        ],
        Scheme::EtdRk4 => {
            let [a, b, c] = phi123(-2.0 * t);
            let sixth = 1.0 / 6.0;
            [
                free,
                0.5 * h * (sixth - (a - 3.0 * b + 4.0 * c)),
                2.0 * h * (sixth - (b - 2.0 * c)),
                0.5 * h * (sixth - (4.0 * c - b)),
            ]
        }
    }
}

/// Energy `½(‖u‖² + (κ/α₁)‖τ‖²)`.
pub fn energy(state: &State, params: &SystemParams) -> f64 {
    0.5 * (state.u.inner(&state.u) + params.stress_weight() * state.tau.inner(&state.tau))
}

/// Dissipation rate `ν‖Λ^αu‖² + (κ/α₁)(η‖Λ^βτ‖² + β₁‖τ‖²)`, so that
/// `dE/dt = −rate` when `Q` is off.
pub fn dissipation_rate(u: &SpectralVector, tau: &SpectralSymTensor, params: &SystemParams) -> f64 {
    let grid = u.grid();
    let rates = linear_rates(grid, params);
    let weighted = |c: &SpectralScalar, r: &[f64]| -> f64 {
        c.coeffs()
            .iter()
            .zip(r)
            .map(|(v, l)| l * v.norm_sqr())
            .sum()
    };
    let du = weighted(&u.x, &rates.velocity) + weighted(&u.y, &rates.velocity);
    let dt = weighted(&tau.xx, &rates.stress)
        + 2.0 * weighted(&tau.xy, &rates.stress)
        + weighted(&tau.yy, &rates.stress);
    grid.area() * (du + params.stress_weight() * dt)
}

/// Fixed-step exponential integrator: the linear part is integrated exactly,
/// the advection and `Q` terms explicitly (and the coupling too under ETDRK4).
pub struct Stepper {
    params: SystemParams,
    scheme: Scheme,
    dt: f64,
    prop: Propagator,
}

impl Stepper {
    pub fn new(grid: &TorusGrid, params: SystemParams, dt: f64) -> Result<Self> {
        Self::with_scheme(grid, params, dt, Scheme::IfRk4)
    }

    pub fn with_scheme(
        grid: &TorusGrid,
        params: SystemParams,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter("dt must be positive".into()));
        }
        params.validate()?;
        Ok(Self {
            prop: Propagator::new(grid, &params, dt, scheme),
            params,
            scheme,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn n(&self, p: &Pair) -> Pair {
        let (u, tau) = if self.prop.blocks.is_empty() {
            nonlinear(&p.u, &p.tau, &self.params)
        } else {
            quadratic(&p.u, &p.tau, &self.params)
        };
        Pair { u, tau }
    }

    /// Dissipation over one step from the stage states and the matching
    /// explicit terms: `(y, k1)` at `t`, `(ya, k2)` and `(yb, k3)` at the
    /// midpoint, `(yc, k4)` at the end. Coupled modes are evaluated in their
    /// frame, the shear pair through the Gramians.
    fn dissipated(&self, stages: [(&Pair, &Pair); 4]) -> f64 {
        let h = self.dt;
        let weight = self.params.stress_weight();
        let diag = |w: &[f64; 4], c: [Complex64; 4], n: [Complex64; 4]| -> f64 {
            let f = |s: usize| 2.0 * (c[s].conj() * n[s]).re;
            w[0] * c[0].norm_sqr() + w[1] * f(0) + w[2] * 0.5 * (f(1) + f(2)) + w[3] * f(3)
        };
        let len = stages[0].0.u.grid().len();
        let mut total = 0.0;
        for idx in 0..len {
            let ys = stages.map(|(y, _)| mode_of(y, idx));
            let ns = stages.map(|(_, k)| mode_of(k, idx));
            let (qu, qt) = (&self.prop.quad_u[idx], &self.prop.quad_tau[idx]);
            match self.prop.blocks.get(idx).copied().flatten() {
                None => {
                    let du: f64 = (0..2)
                        .map(|c| diag(qu, ys.map(|m| m.0[c]), ns.map(|m| m.0[c])))
                        .sum();
                    let dt: f64 = [(0, 1.0), (1, 2.0), (2, 1.0)]
                        .iter()
                        .map(|&(c, m)| m * diag(qt, ys.map(|y| y.1[c]), ns.map(|n| n.1[c])))
                        .sum();
                    total += du + weight * dt;
                }
                Some(b) => {
                    let yf = ys.map(|(u, t)| b.project(u, t));
                    let nf = ns.map(|(u, t)| b.project(u, t));
                    let du = diag(qu, yf.map(|f| f.g), nf.map(|f| f.g));
                    let dt = diag(qt, yf.map(|f| f.t1), nf.map(|f| f.t1))
                        + diag(qt, yf.map(|f| f.t3), nf.map(|f| f.t3));
                    let z = yf.map(|f| Block::pair(&f));
                    let n = nf.map(|f| Block::pair(&f));
                    let [g_half, g_full] = &b.gram;
                    let pair = form(g_full, z[0], z[0]).re
                        + h / 6.0
                            * (2.0 * form(g_full, z[0], n[0]).re
                                + 4.0 * form(g_half, z[1], n[1]).re
                                + 4.0 * form(g_half, z[2], n[2]).re);
                    total += du + weight * dt + pair;
                }
            }
        }
        stages[0].0.u.grid().area() * total
    }

    fn lawson(&self, y: &Pair) -> (Pair, f64) {
        let h = self.dt;
        let k1 = self.n(y);
        let ya = self.prop.apply(&y.axpy(0.5 * h, &k1), false);
        let k2 = self.n(&ya);
        let ey_half = self.prop.apply(y, false);
        let yb = ey_half.axpy(0.5 * h, &k2);
        let k3 = self.n(&yb);
        let ey = self.prop.apply(y, true);
        let yc = ey.axpy(h, &self.prop.apply(&k3, false));
        let k4 = self.n(&yc);

        let mid = self.prop.apply(&k2.axpy(1.0, &k3), false);
        let incr = self.prop.apply(&k1, true).axpy(2.0, &mid).axpy(1.0, &k4);
        let next = ey.axpy(h / 6.0, &incr);
        let d = self.dissipated([(y, &k1), (&ya, &k2), (&yb, &k3), (&yc, &k4)]);
        (next, d)
    }

    fn etd(&self, y: &Pair, c: &EtdCoefficients) -> (Pair, f64) {
        let ey_half = self.prop.apply(y, false);
        let k1 = self.n(y);
        let ya = ey_half.axpy(1.0, &k1.scaled_by(&c.half));
        let k2 = self.n(&ya);
        let yb = ey_half.axpy(1.0, &k2.scaled_by(&c.half));
        let k3 = self.n(&yb);
        let yc = self
            .prop
            .apply(&ya, false)
            .axpy(1.0, &k3.axpy(1.0, &k3).axpy(-1.0, &k1).scaled_by(&c.half));
        let k4 = self.n(&yc);

        let next = self
            .prop
            .apply(y, true)
            .axpy(1.0, &k1.scaled_by(&c.f1))
            .axpy(2.0, &k2.axpy(1.0, &k3).scaled_by(&c.f2))
            .axpy(1.0, &k4.scaled_by(&c.f3));
        let d = self.dissipated([(y, &k1), (&ya, &k2), (&yb, &k3), (&yc, &k4)]);
        (next, d)
    }

    /// One step; also returns the dissipation integral over the step, computed
    /// by the same scheme applied to the mode energies.
    pub fn step_with_dissipation(&self, state: &State) -> Result<(State, f64)> {
        let y = Pair {
            u: state.u.clone(),
            tau: state.tau.clone(),
        };
        let (next, dissipated) = match &self.prop.etd {
            None => self.lawson(&y),
            Some(c) => self.etd(&y, c),
        };
        let time = state.time + self.dt;
        if !next.is_finite() || !dissipated.is_finite() {
            return Err(Error::BlowUp {
                time: state.time,
                reason: "non-finite Fourier coefficient".into(),
            });
        }
        let mut u = leray_project(&next.u);
        let mut tau = next.tau;
        u.symmetrize();
        tau.symmetrize();
        Ok((State { u, tau, time }, dissipated))
    }

    pub fn step(&self, state: &State) -> Result<State> {
        self.step_with_dissipation(state).map(|(s, _)| s)
    }
}

/// Convenience single step.
pub fn step(state: &State, dt: f64, params: &SystemParams) -> Result<State> {
    Stepper::new(state.grid(), *params, dt)?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::power_symbol;
    use crate::spectral::random::{solenoidal_field, sym_tensor_field, SpectrumSpec};

    #[test]
    fn rest_is_preserved_exactly() {
        let g = TorusGrid::new(16).unwrap();
        let rest = State::rest(&g);
        let params = SystemParams::reduced(1.0, 1.0, 1.0, 0.5);
        for scheme in [Scheme::IfRk4, Scheme::EtdRk4] {
            let st = Stepper::with_scheme(&g, params, 0.1, scheme).unwrap();
            let next = st.step(&rest).unwrap();
            assert_eq!(next.u.max_abs(), 0.0);
            assert_eq!(next.tau.max_abs(), 0.0);
            assert_eq!(next.time, 0.1);
        }
    }

    /// `exp(tM)` applied to `(1, 0)` for a real 2×2 matrix `M`, via
    /// `e^{μt}[cosh(δt) I + sinh(δt)/δ (M − μI)]`.
    fn expm_first_column(m: [[f64; 2]; 2], t: f64) -> (f64, f64) {
        use num_complex::Complex64;
        let mu = 0.5 * (m[0][0] + m[1][1]);
        let disc = Complex64::new((0.5 * (m[0][0] - m[1][1])).powi(2) + m[0][1] * m[1][0], 0.0);
        let d = disc.sqrt();
        let (ch, sh) = if d.norm() < 1e-300 {
            (Complex64::new(1.0, 0.0), Complex64::new(t, 0.0))
        } else {
            ((d * t).cosh(), (d * t).sinh() / d)
        };
        let e = (mu * t).exp();
        let a = e * (ch + sh * (m[0][0] - mu));
        let c = e * sh * m[1][0];
        (a.re, c.re)
    }

    #[test]
    fn shear_mode_matches_exact_linear_solution() {
        // u = (a(t) sin ky, 0), τ₁₂ = c(t) cos ky: every quadratic term vanishes
        // and (a, c) solve a' = −νk^{2α}a − κkc, c' = ½α₁ka − (β₁ + ηk^{2β})c.
        let g = TorusGrid::new(32).unwrap();
        let k = 3.0f64;
        let mut params = SystemParams::reduced(0.7, 0.4, 1.25, 0.5);
        params.kappa = 1.3;
        params.alpha1 = 0.8;
        params.beta1 = 0.2;
        let u = SpectralVector {
            x: SpectralScalar::from_fn(&g, |_, y| (k * y).sin()),
            y: SpectralScalar::zeros(&g),
        };
        let s0 = State::new(u, SpectralSymTensor::zeros(&g), 0.0).unwrap();
        let m = [
            [-params.nu * k.powf(2.0 * params.alpha), -params.kappa * k],
            [
                0.5 * params.alpha1 * k,
                -(params.beta1 + params.eta * k.powf(2.0 * params.beta)),
            ],
        ];
        let (a, c) = expm_first_column(m, 0.1);
        let u_exact = SpectralScalar::from_fn(&g, |_, y| a * (k * y).sin());
        let t_exact = SpectralScalar::from_fn(&g, |_, y| c * (k * y).cos());
        for scheme in [Scheme::IfRk4, Scheme::EtdRk4] {
            let stepper = Stepper::with_scheme(&g, params, 1e-3, scheme).unwrap();
            let mut s = s0.clone();
            for _ in 0..100 {
                s = stepper.step(&s).unwrap();
            }
            assert!(s.u.x.max_diff(&u_exact) < 1e-10, "{scheme:?}");
            assert!(s.u.y.max_abs() < 1e-14);
            assert!(s.tau.xy.max_diff(&t_exact) < 1e-10, "{scheme:?}");
            assert!((s.time - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_decay_without_coupling_feedback() {
        // with τ ≡ 0 and a velocity whose deformation vanishes identically
        // (a constant flow) the integrating factor reproduces the data.
        let g = TorusGrid::new(16).unwrap();
        let u = SpectralVector {
            x: SpectralScalar::constant(&g, 0.3),
            y: SpectralScalar::constant(&g, -0.2),
        };
        let s = State::new(u.clone(), SpectralSymTensor::zeros(&g), 0.0).unwrap();
        let next = step(&s, 0.05, &SystemParams::reduced(1.0, 0.0, 1.0, 0.0)).unwrap();
        assert!(next.u.max_diff(&u) < 1e-15);
        assert_eq!(power_symbol(&g, 0, 2.0), 0.0);
    }

    #[test]
    fn dissipation_is_exact_for_linear_decay() {
        // an isotropic stress f(x)I only forces a gradient, removed by the
        // projection, so u stays zero and τ decays mode by mode
        let g = TorusGrid::new(32).unwrap();
        for (eta, dt) in [(1.0, 1e-3), (50.0, 0.1), (1e4, 1.0)] {
            let mut params = SystemParams::reduced(1.0, eta, 1.0, 0.5);
            params.beta1 = 0.3;
            let f = SpectralScalar::from_fn(&g, |x, y| (3.0 * x).cos() + 0.5 * (7.0 * y + x).sin());
            let tau = SpectralSymTensor {
                xx: f.clone(),
                xy: SpectralScalar::zeros(&g),
                yy: f,
            };
            let s0 = State::new(SpectralVector::zeros(&g), tau, 0.0).unwrap();
            for scheme in [Scheme::IfRk4, Scheme::EtdRk4] {
                let st = Stepper::with_scheme(&g, params, dt, scheme).unwrap();
                let (s1, d) = st.step_with_dissipation(&s0).unwrap();
                let (e0, e1) = (energy(&s0, &params), energy(&s1, &params));
                assert!(s1.u.max_abs() < 1e-14);
                assert!(
                    (e0 - e1 - d).abs() < 1e-13 * e0,
                    "{scheme:?} eta {eta}: {e0} {e1} {d}"
                );
            }
        }
    }

    #[test]
    fn coupled_block_closes_the_energy_balance() {
        // a shear column has no quadratic terms, so the Lawson step is the
        // exact block exponential and the Gramian gives the exact dissipation
        let g = TorusGrid::new(32).unwrap();
        for (dt, k) in [(1e-3, 1.0), (0.05, 5.0), (1.0, 9.0)] {
            let params = SystemParams::reduced(1.0, 0.0, 1.25, 0.0);
            let u = SpectralVector {
                x: SpectralScalar::from_fn(&g, |_, y| (k * y).sin()),
                y: SpectralScalar::zeros(&g),
            };
            let tau = SpectralSymTensor {
                xx: SpectralScalar::zeros(&g),
                xy: SpectralScalar::from_fn(&g, |_, y| 0.3 * (k * y).cos()),
                yy: SpectralScalar::zeros(&g),
            };
            let s0 = State::new(u, tau, 0.0).unwrap();
            let st = Stepper::new(&g, params, dt).unwrap();
            let (s1, d) = st.step_with_dissipation(&s0).unwrap();
            let (e0, e1) = (energy(&s0, &params), energy(&s1, &params));
            assert!((e0 - e1 - d).abs() < 1e-13 * e0, "dt {dt}: {e0} {e1} {d}");
        }
    }

    #[test]
    fn gramian_matches_scalar_decay() {
        let (l, h) = (7.5, 0.4);
        let (e, g) = exp_and_gramian([[-l, 0.0], [0.0, -2.0 * l]], [l, 1.0], h);
        assert!((e[0][0] - (-l * h).exp()).abs() < 1e-15);
        assert!((e[1][1] - (-2.0 * l * h).exp()).abs() < 1e-15);
        assert!((g[0][0] + 0.5 * (-2.0 * l * h).exp_m1()).abs() < 1e-15);
        assert!((g[1][1] + 0.25 / l * (-4.0 * l * h).exp_m1()).abs() < 1e-15);
        assert_eq!((e[0][1], g[0][1]), (0.0, 0.0));
    }

    #[test]
    fn phi_branches_agree() {
        let z = -0.75f64;
        let p1 = z.exp_m1() / z;
        let p2 = (p1 - 1.0) / z;
        let closed = [p1, p2, (p2 - 0.5) / z];
        let series = phi123(z);
        for k in 0..3 {
            assert!(
                (series[k] - closed[k]).abs() < 1e-14,
                "{series:?} {closed:?}"
            );
        }
        assert_eq!(phi123(0.0), [1.0, 0.5, 1.0 / 6.0]);
    }

    #[test]
    fn mode_weights_vanish_without_decay() {
        for scheme in [Scheme::IfRk4, Scheme::EtdRk4] {
            let w = mode_weights(scheme, 0.0, 0.1);
            assert!(w.iter().all(|x| x.abs() < 1e-17), "{w:?}");
        }
    }

    #[test]
    fn etd_weights_exact_for_constant_forcing() {
        for (l, h) in [(1.0, 1e-3), (50.0, 0.1), (1e4, 1.0)] {
            let w = mode_weights(Scheme::EtdRk4, l, h);
            let kernel = 0.5 * h + 0.25 * (-2.0 * l * h).exp_m1() / l;
            assert!((w[1] + w[2] + w[3] - kernel).abs() < 1e-13 * h);
        }
    }

    #[test]
    fn fourth_order_self_convergence() {
        let g = TorusGrid::new(32).unwrap();
        let params = SystemParams::reduced(0.1, 0.1, 1.25, 0.5);
        let u = solenoidal_field(&g, SpectrumSpec::random_phase(3.0, 0.5), 3);
        let tau = sym_tensor_field(&g, SpectrumSpec::random_phase(3.0, 0.5), 4);
        let s0 = State::new(u, tau, 0.0).unwrap();
        for scheme in [Scheme::IfRk4, Scheme::EtdRk4] {
            let run = |dt: f64| {
                let st = Stepper::with_scheme(&g, params, dt, scheme).unwrap();
                let mut s = s0.clone();
                for _ in 0..((0.5 / dt).round() as usize) {
                    s = st.step(&s).unwrap();
                }
                s
            };
            let a = run(0.02);
            let b = run(0.01);
            let c = run(0.005);
            let e1 = a.u.max_diff(&b.u).max(a.tau.max_diff(&b.tau));
            let e2 = b.u.max_diff(&c.u).max(b.tau.max_diff(&c.tau));
            let ratio = e1 / e2;
            assert!(ratio > 12.0 && ratio < 20.0, "{scheme:?} ratio {ratio}");
        }
    }
}
