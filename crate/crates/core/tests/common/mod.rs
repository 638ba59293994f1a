#![allow(dead_code)]

use admittivity_core::cgo::{cgo_field, CgoBasis, DEFAULT_ANGLES};
use admittivity_core::linalg::sym2_inverse;
use admittivity_core::{ComplexScalarField, Grid2D, PhysicsParams, C64};

/// `[[2, 0.3], [0.3, 1.5]] + i[[1, 0.1], [0.1, 1.2]]`.
pub const GAMMA: [C64; 3] = [
    C64 { re: 2.0, im: 1.0 },
    C64 { re: 0.3, im: 0.1 },
    C64 { re: 1.5, im: 1.2 },
];

pub fn gamma_inv() -> [C64; 3] {
    sym2_inverse(GAMMA).unwrap()
}

pub fn basis(angles: &[f64]) -> CgoBasis {
    CgoBasis::for_tensor(GAMMA, &PhysicsParams::default(), angles).unwrap()
}

pub fn default_basis() -> CgoBasis {
    basis(&DEFAULT_ANGLES)
}

/// The five analytically sampled CGO fields.
pub fn fields(basis: &CgoBasis, grid: Grid2D) -> Vec<ComplexScalarField> {
    (0..basis.directions().len()).map(|k| cgo_field(basis, k, grid)).collect()
}
pub mod oracles;
