use crate::error::{Error, Result};
use crate::oldroyd::State;
use crate::spectral::io::read_fields;
use crate::spectral::ops::{dealias_tensor, dealias_vector, leray_project};
use crate::spectral::random::{solenoidal_field, sym_tensor_field, SpectrumSpec};
use crate::spectral::{AnyField, SpectralScalar, SpectralSymTensor, SpectralVector, TorusGrid};

use super::config::InitialCondition;

/// Root-mean-square of the pointwise Frobenius magnitude.
fn rms(parts: &[(&SpectralScalar, f64)]) -> f64 {
    parts
        .iter()
        .map(|(c, w)| w * c.coeff_energy())
        .sum::<f64>()
        .sqrt()
}

/// Builds the initial state on `grid`. Every family is dealiased,
/// projected and symmetrized, so the state is band-limited from the start.
pub fn initial_condition(ic: &InitialCondition, grid: &TorusGrid) -> Result<State> {
    let (u, tau) = match ic {
        InitialCondition::TaylorGreen { amplitude } => {
            let a = *amplitude;
            let u = SpectralVector {
                x: SpectralScalar::from_fn(grid, |x, y| -a * x.cos() * y.sin()),
                y: SpectralScalar::from_fn(grid, |x, y| a * x.sin() * y.cos()),
            };
            (u, SpectralSymTensor::zeros(grid))
        }
        InitialCondition::Shear {
            amplitude,
            wavenumber,
        } => {
            let (a, k) = (*amplitude, *wavenumber as f64);
            let u = SpectralVector {
                x: SpectralScalar::from_fn(grid, |_, y| a * (k * y).sin()),
                y: SpectralScalar::zeros(grid),
            };
            (u, SpectralSymTensor::zeros(grid))
        }
        InitialCondition::RandomSolenoidal {
            decay,
            amplitude,
            tau_amplitude,
            seed,
        } => {
            let spec = SpectrumSpec::random_phase(*decay, 1.0);
            let u = solenoidal_field(grid, spec, *seed);
            let tau = sym_tensor_field(grid, spec, seed.wrapping_add(0x51));
            let su = rms(&[(&u.x, 1.0), (&u.y, 1.0)]);
            let st = rms(&[(&tau.xx, 1.0), (&tau.xy, 2.0), (&tau.yy, 1.0)]);
            let u = if su > 0.0 {
                u.scaled(amplitude / su)
            } else {
                u
            };
            let tau = if st > 0.0 {
                tau.scaled(tau_amplitude / st)
            } else {
                tau
            };
            (u, tau)
        }
        InitialCondition::File { path } => {
            let fields = read_fields(path)?;
            let mut it = fields.into_iter();
            let u = match it.next() {
                Some(AnyField::Vector(u)) => u,
                Some(other) => {
                    return Err(Error::Rank(format!(
                        "initial velocity record is a {} field",
                        other.kind_name()
                    )))
                }
                None => unreachable!("read_fields rejects empty files"),
            };
            let tau = match it.next() {
                Some(AnyField::Tensor(t)) => t,
                None => SpectralSymTensor::zeros(u.grid()),
                Some(other) => {
                    return Err(Error::Rank(format!(
                        "initial stress record is a {} field",
                        other.kind_name()
                    )))
                }
            };
            if u.grid().n() != grid.n() {
                return Err(Error::Parameter(format!(
                    "file grid n = {} does not match configured n = {}",
                    u.grid().n(),
                    grid.n()
                )));
            }
            // re-home onto the caller's grid so dealiasing settings agree
            let rehome = |c: &SpectralScalar| {
                SpectralScalar::from_coeffs(grid, c.coeffs().to_vec()).expect("same size")
            };
            (u.map(rehome), tau.map(rehome))
        }
    };
    let mut u = leray_project(&dealias_vector(&u));
    let mut tau = dealias_tensor(&tau);
    u.symmetrize();
    tau.symmetrize();
    State::new(u, tau, 0.0)
}
