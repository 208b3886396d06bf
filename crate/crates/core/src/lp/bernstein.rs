use serde::{Deserialize, Serialize};

use super::norms::lp_norm;
use crate::error::{Error, Result};
use crate::spectral::ops::fractional_power;
use crate::spectral::SpectralScalar;

/// Normalised Bernstein quotients for a field supported in the shell
/// `{K₁2^j ≤ |k| ≤ K₂2^j}`:
/// `lower = ‖(−Δ)^γ f‖_q / (2^{2γj} ‖f‖_q)` and
/// `upper = ‖(−Δ)^γ f‖_q / (2^{2γj + 2j(1/p − 1/q)} ‖f‖_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinRatios {
    pub lower: f64,
    pub upper: f64,
}

const SUPPORT_FLOOR: f64 = 1e-13;

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

pub fn bernstein_ratio(
    f: &SpectralScalar,
    gamma: f64,
    p: f64,
    q: f64,
    j: i32,
    k_lo: f64,
    k_hi: f64,
) -> Result<BernsteinRatios> {
    if p.is_nan() || q.is_nan() || p < 1.0 || q < p {
        return Err(Error::Domain(format!(
            "need 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    let grid = f.grid();
    let scale = f.max_abs();
    if scale == 0.0 {
        return Err(Error::Precondition(
            "zero field has no spectral shell".into(),
        ));
    }
    let (lo, hi) = (k_lo * 2f64.powi(j), k_hi * 2f64.powi(j));
    for (idx, c) in f.coeffs().iter().enumerate() {
        if c.norm() > SUPPORT_FLOOR * scale {
            let r = grid.k_norm(idx);
            if r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12) {
                return Err(Error::Precondition(format!(
                    "mode |k| = {r:.4} lies outside the shell [{lo:.4}, {hi:.4}]"
                )));
            }
        }
    }
    let lifted = fractional_power(f, 2.0 * gamma);
    let top = lp_norm(&lifted, q)?;
    let jf = j as f64;
    let lower = top / (2f64.powf(2.0 * gamma * jf) * lp_norm(f, q)?);
    let upper = top / (2f64.powf(2.0 * gamma * jf + 2.0 * jf * (inv(p) - inv(q))) * lp_norm(f, p)?);
    Ok(BernsteinRatios { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;

    #[test]
    fn pure_mode_ratios_are_one() {
        let g = TorusGrid::new(32).unwrap();
        let f = SpectralScalar::from_fn(&g, |x, _| (4.0 * x).cos());
        let r = bernstein_ratio(&f, 1.0, 2.0, 2.0, 2, 0.75, 8.0 / 3.0).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12);
        assert!((r.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_reported() {
        let g = TorusGrid::new(32).unwrap();
        let f = SpectralScalar::from_fn(&g, |x, _| x.cos() + (4.0 * x).cos());
        assert!(matches!(
            bernstein_ratio(&f, 0.5, 2.0, 2.0, 2, 0.75, 8.0 / 3.0),
            Err(Error::Precondition(_))
        ));
        assert!(bernstein_ratio(&f, 0.5, 2.0, 1.0, 0, 0.1, 8.0).is_err());
    }
}
