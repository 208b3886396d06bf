//! Torus grid, spectral fields and the Fourier-multiplier calculus every
//! other module builds on.

pub mod field;
pub mod grid;
pub mod io;
pub mod ops;
pub mod random;

pub use field::{
    AnyField, Components, FieldStack, PhysicalField, SpectralScalar, SpectralSymTensor,
    SpectralVector,
};
pub use grid::TorusGrid;
