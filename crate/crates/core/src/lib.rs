//! Explicit reconstruction of a complex anisotropic admittivity tensor
//! `γ = σ + iωε` from internal magnetic fields of the 2-D Maxwell system.
//!
//! The crate is `no_std` with `alloc`. It contains everything numeric:
//! grids and field containers, finite-difference operators, the forward
//! solver used to synthesize data, the phantoms, the noise model, the
//! pointwise reconstruction, Tikhonov and split-Bregman regularization, the
//! CGO-like illumination construction and error metrics. File formats and
//! the command line live in the `admittivity` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cgo;
pub mod diff;
mod error;
pub mod forward;
pub mod grid;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod recon;
pub mod regularize;

pub use error::{Error, Result};
pub use grid::{
    validate_ellipticity, AdmissibleMask, ComplexScalarField, ComplexVectorField, EllipticityReport,
    Grid2D, PhysicsParams, RealField, SymTensorField,
};

/// Double-precision complex number used for every field value.
pub type C64 = num_complex::Complex<f64>;
