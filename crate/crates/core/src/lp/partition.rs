use crate::error::{Error, Result};

/// Inner radius of the transition region of `χ`: `χ = 1` on `|ξ| ≤ 3/4`.
pub const BALL_INNER: f64 = 0.75;
/// Support radius of `χ`: `χ = 0` on `|ξ| ≥ 4/3`.
pub const BALL_OUTER: f64 = 4.0 / 3.0;
/// Outer radius of the annulus supporting `φ`.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;

/// Construction of the smooth transition of `χ` between 3/4 and 4/3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProfileKind {
    /// `C^∞` step built from `exp(−1/t)`.
    #[default]
    ExpBump,
    /// `C²` quintic smoothstep `6t⁵ − 15t⁴ + 10t³`.
    Smoothstep,
}

/// The radial pair `(χ, φ)` with `φ(ξ) = χ(ξ/2) − χ(ξ)`, so that both
/// telescoping identities hold by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicPartition {
    kind: ProfileKind,
}

impl Default for DyadicPartition {
    fn default() -> Self {
        Self {
            kind: ProfileKind::ExpBump,
        }
    }
}

fn exp_tail(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth monotone step with `step(0) = 0`, `step(1) = 1`.
fn step(kind: ProfileKind, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    match kind {
        ProfileKind::ExpBump => {
            let a = exp_tail(t);
            let b = exp_tail(1.0 - t);
            a / (a + b)
        }
        ProfileKind::Smoothstep => t * t * t * (t * (6.0 * t - 15.0) + 10.0),
    }
}

/// Result of sampling the partition identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionCheck {
    pub samples: usize,
    /// `max |χ(ξ) + Σ_{j≥0} φ(2^{−j}ξ) − 1|`.
    pub inhomogeneous_defect: f64,
    /// `max |Σ_{j∈ℤ} φ(2^{−j}ξ) − 1|` over `ξ ≠ 0`.
    pub homogeneous_defect: f64,
    /// Largest value of `χ` or `φ` found outside its stated support.
    pub support_leak: f64,
}

pub const PARTITION_TOL: f64 = 1e-12;

impl DyadicPartition {
    /// Builds the partition and validates it on a 10⁴-point radial sample.
    pub fn build(kind: ProfileKind) -> Result<Self> {
        let p = Self { kind };
        let check = p.check(10_000, 64.0);
        if check.inhomogeneous_defect > PARTITION_TOL
            || check.homogeneous_defect > PARTITION_TOL
            || check.support_leak > 0.0
        {
            return Err(Error::Validation(format!(
                "partition of unity fails: {check:?}"
            )));
        }
        Ok(p)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Low-frequency profile `χ(r)`, `r = |ξ|`.
    pub fn chi(&self, r: f64) -> f64 {
        step(self.kind, (BALL_OUTER - r) / (BALL_OUTER - BALL_INNER))
    }

    /// Annulus profile `φ(r) = χ(r/2) − χ(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }

    /// Symbol of `Δⱼ` (inhomogeneous) or `Δ̇ⱼ` (homogeneous) at radius `r`.
    pub fn block_symbol(&self, j: i32, r: f64, homogeneous: bool) -> f64 {
        if homogeneous {
            if r == 0.0 {
                0.0
            } else {
                self.phi(r * 2f64.powi(-j))
            }
        } else if j < -1 {
            0.0
        } else if j == -1 {
            self.chi(r)
        } else {
            self.phi(r * 2f64.powi(-j))
        }
    }

    /// Symbol of `Sⱼ` / `Ṡⱼ`, i.e. `χ(2^{−j} r)`; inhomogeneous `Sⱼ = 0` for `j ≤ −1`.
    pub fn low_pass_symbol(&self, j: i32, r: f64, homogeneous: bool) -> f64 {
        if !homogeneous && j <= -1 {
            0.0
        } else {
            self.chi(r * 2f64.powi(-j))
        }
    }

    /// Samples both telescoping identities at `samples` radii spread over
    /// `[10⁻³, r_max]` (log-spaced) plus the origin.
    pub fn check(&self, samples: usize, r_max: f64) -> PartitionCheck {
        let mut inh: f64 = (self.chi(0.0) - 1.0).abs();
        let mut hom: f64 = 0.0;
        let mut leak: f64 = 0.0;
        let (lo, hi) = (1e-3f64.ln(), r_max.ln());
        let j_top = (r_max.log2().ceil() as i32) + 2;
        for i in 0..samples {
            let r = (lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64).exp();
            let mut s = self.chi(r);
            for j in 0..=j_top {
                s += self.phi(r * 2f64.powi(-j));
            }
            inh = inh.max((s - 1.0).abs());
            let mut h = 0.0;
            for j in -14..=j_top {
                h += self.phi(r * 2f64.powi(-j));
            }
            hom = hom.max((h - 1.0).abs());
            if r >= BALL_OUTER {
                leak = leak.max(self.chi(r).abs());
            }
            if !(BALL_INNER..=ANNULUS_OUTER).contains(&r) {
                leak = leak.max(self.phi(r).abs());
            }
        }
        PartitionCheck {
            samples,
            inhomogeneous_defect: inh,
            homogeneous_defect: hom,
            support_leak: leak,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let p = DyadicPartition::default();
        assert_eq!(p.chi(0.0), 1.0);
        assert_eq!(p.phi(0.0), 0.0);
        for j in 0..10 {
            assert_eq!(p.phi(0.0 * 2f64.powi(-j)), 0.0);
        }
    }

    #[test]
    fn radius_two_splits_between_first_two_blocks() {
        for kind in [ProfileKind::ExpBump, ProfileKind::Smoothstep] {
            let p = DyadicPartition::build(kind).unwrap();
            assert_eq!(p.chi(2.0), 0.0);
            let s = p.phi(2.0) + p.phi(1.0);
            assert!((s - 1.0).abs() < 1e-15);
            for j in 2..8 {
                assert_eq!(p.phi(2.0 * 2f64.powi(-j)), 0.0);
            }
        }
    }

    #[test]
    fn profiles_are_monotone_and_nonnegative() {
        let p = DyadicPartition::default();
        let mut prev = 1.0;
        for i in 0..2000 {
            let r = i as f64 * 2e-3;
            let c = p.chi(r);
            assert!(c <= prev + 1e-15 && c >= 0.0);
            assert!(p.phi(r) >= 0.0);
            prev = c;
        }
    }

    #[test]
    fn far_apart_annuli_are_disjoint() {
        let p = DyadicPartition::default();
        for i in 0..5000 {
            let r = 0.01 + i as f64 * 0.02;
            for j in -3..6 {
                let prod = p.phi(r * 2f64.powi(-j)) * p.phi(r * 2f64.powi(-(j + 2)));
                assert_eq!(prod, 0.0);
            }
        }
    }
}
