//! Additive Gaussian noise on measured magnetic fields.
//!
//! Real and imaginary parts receive independent zero-mean normal
//! perturbations with standard deviation `α · mean(|H|)`. Draws come from a
//! seeded ChaCha stream, so a run is replayable from `(seed, stream)`.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::ComplexScalarField;
use crate::{Error, Result, C64};

/// `H + η` with `η` drawn from stream 0 of `seed`.
pub fn add_noise(h: &ComplexScalarField, alpha: f64, seed: u64) -> Result<ComplexScalarField> {
    add_noise_stream(h, alpha, seed, 0)
}

/// Same as [`add_noise`] but on an explicit ChaCha stream, used to give each
/// illumination of an experiment independent noise from one seed.
pub fn add_noise_stream(
    h: &ComplexScalarField,
    alpha: f64,
    seed: u64,
    stream: u64,
) -> Result<ComplexScalarField> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    if alpha == 0.0 {
        return Ok(h.clone());
    }
    let scale = alpha * h.mean_abs();
    if scale == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let values: Vec<C64> = h
        .values()
        .iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + C64::new(re, im) * scale
        })
        .collect();
    ComplexScalarField::from_values(h.grid(), values)
}
