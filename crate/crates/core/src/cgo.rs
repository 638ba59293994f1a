//! CGO-like solutions `H = exp(x·Qu)` for constant admittivity and the
//! numerical check of the reconstructibility conditions.
//!
//! For constant `γ` the magnetic field solves `-∇·γ̃⁻¹∇H + H = 0` with
//! `γ̃ = -iωμ₀ Jᵀ γ J`. Writing `γ̃ = Q Qᵀ`, every `u` with `uᵀu = 1` gives
//! a solution `exp(x·Qu)`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::forward::BoundaryTrace;
use crate::grid::{ComplexScalarField, Grid2D, PhysicsParams};
use crate::linalg::{
    complex_symmetric_sqrt, frobenius, jacobi_least_squares, mat2_mul, mat2_transpose, mat2_vec,
    Mat2,
};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Default directions of the three extra illuminations, `(cos θ, sin θ)`.
pub const DEFAULT_ANGLES: [f64; 3] = [PI / 4.0, PI / 3.0, 2.0 * PI / 3.0];

/// Extra directions used by the experiments: the triple whose `M̃_j` are
/// closest to orthogonal for an isotropic reference tensor.
pub const WELL_CONDITIONED_ANGLES: [f64; 3] = [0.75 * PI, 1.25 * PI, 1.75 * PI];

/// Rotation applied to all three angles on each failed attempt.
pub const ANGLE_SCHEDULE_STEP: f64 = PI / 16.0;

pub const MAX_ANGLE_ATTEMPTS: usize = 8;

/// Relative singular-value floor (`σ_min / σ_max`) under which three
/// matrices are treated as dependent.
pub const INDEPENDENCE_TOL: f64 = 1e-6;

/// `γ̃ = -iωμ₀ Jᵀ γ J` for constant symmetric `γ = (g11, g12, g22)`.
pub fn gamma_tilde(gamma: [C64; 3], params: &PhysicsParams) -> [C64; 3] {
    let s = C64::new(0.0, -params.omega * params.mu0);
    // Jᵀ γ J = [[g22, -g12], [-g12, g11]].
    [s * gamma[2], -s * gamma[1], s * gamma[0]]
}

/// `Q` with `Q Qᵀ = γ̃`, via eigendecomposition and principal roots.
pub fn factor_q(gamma_tilde: [C64; 3]) -> Result<Mat2> {
    complex_symmetric_sqrt(gamma_tilde)
}

/// Real unit vector `(cos θ, sin θ)` as a complex 2-vector.
pub fn unit_vector(theta: f64) -> [C64; 2] {
    [C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]
}

/// `Q` together with the illumination directions `u₁ … u_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CgoBasis {
    q: Mat2,
    u: Vec<[C64; 2]>,
}

impl CgoBasis {
    /// Checks the bilinear normalization `uᵀu = 1` of every direction.
    pub fn new(q: Mat2, u: Vec<[C64; 2]>) -> Result<Self> {
        for v in &u {
            let n = v[0] * v[0] + v[1] * v[1];
            if (n - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "u^T u",
                    value: n.norm(),
                });
            }
        }
        Ok(Self { q, u })
    }

    /// `Q` for the constant tensor `gamma` and directions `e₁, e₂` followed by
    /// `(cos θ, sin θ)` for each angle.
    pub fn for_tensor(gamma: [C64; 3], params: &PhysicsParams, angles: &[f64]) -> Result<Self> {
        let q = factor_q(gamma_tilde(gamma, params))?;
        let mut u = alloc::vec![unit_vector(0.0), unit_vector(PI / 2.0)];
        // Exact axes rather than cos(π/2) ≈ 6e-17.
        u[1] = [ZERO, C64::new(1.0, 0.0)];
        u.extend(angles.iter().map(|&t| unit_vector(t)));
        Self::new(q, u)
    }

    pub fn q(&self) -> &Mat2 {
        &self.q
    }

    pub fn directions(&self) -> &[[C64; 2]] {
        &self.u
    }

    /// Wave vector `Q u_k`.
    pub fn wave_vector(&self, k: usize) -> [C64; 2] {
        mat2_vec(&self.q, self.u[k])
    }

    /// `exp(x·Q u_k)` at one point.
    pub fn value_at(&self, k: usize, x: f64, y: f64) -> C64 {
        let w = self.wave_vector(k);
        (w[0] * x + w[1] * y).exp()
    }

    /// Exact gradient `Q u_k exp(x·Q u_k)`.
    pub fn gradient_at(&self, k: usize, x: f64, y: f64) -> [C64; 2] {
        let w = self.wave_vector(k);
        let v = self.value_at(k, x, y);
        [w[0] * v, w[1] * v]
    }

    fn has_axis_pair(&self) -> bool {
        let e1 = [C64::new(1.0, 0.0), ZERO];
        let e2 = [ZERO, C64::new(1.0, 0.0)];
        self.u.len() >= 2 && self.u[0] == e1 && self.u[1] == e2
    }
}

/// `exp(x·Q u_k)` sampled on the grid.
pub fn cgo_field(basis: &CgoBasis, k: usize, grid: Grid2D) -> ComplexScalarField {
    ComplexScalarField::from_fn(grid, |x, y| basis.value_at(k, x, y))
}

/// Closed form of `M̃_j = (Z̃_j H̃ᵀ)^sym` for `u₁ = e₁`, `u₂ = e₂`, with
/// `j` counting the extra illuminations from 0:
///
/// ```text
/// M̃_j = H_{3+j} Q [[a(a-1), ab], [ab, b(b-1)]] Qᵀ,   (a, b) = u_{3+j}.
/// ```
///
/// The gradient form is used here; the curl form consumed by the
/// reconstruction is `J M̃_j Jᵀ`.
pub fn analytic_m_tilde(basis: &CgoBasis, j: usize, x: f64, y: f64) -> Result<[C64; 3]> {
    if !basis.has_axis_pair() {
        return Err(Error::Config(
            "analytic M~ requires u1 = e1 and u2 = e2".into(),
        ));
    }
    let u = basis.u[2 + j];
    let (a, b) = (u[0], u[1]);
    let one = C64::new(1.0, 0.0);
    let inner: Mat2 = [[a * (a - one), a * b], [a * b, b * (b - one)]];
    let h = basis.value_at(2 + j, x, y);
    let m = mat2_mul(&mat2_mul(&basis.q, &inner), &mat2_transpose(&basis.q));
    Ok([m[0][0] * h, (m[0][1] + m[1][0]) * 0.5 * h, m[1][1] * h])
}

/// `J M Jᵀ` for symmetric `M`: maps the gradient form to the curl form.
pub fn rotate_to_curl_form(m: [C64; 3]) -> [C64; 3] {
    [m[2], -m[1], m[0]]
}

/// Frobenius-isometric coordinates `(M₁₁, √2 M₁₂, M₂₂)` of a symmetric matrix.
pub fn vectorize_sym(m: [C64; 3]) -> [C64; 3] {
    [m[0], m[1] * core::f64::consts::SQRT_2, m[2]]
}

/// Smallest singular value of the 3×3 matrix whose rows are the
/// vectorized `M₁, M₂, M₃`.
pub fn check_independence(ms: &[[C64; 3]; 3]) -> f64 {
    independence_singular_values(ms).0
}

/// `(σ_min, σ_max)` of the stacked vectorized matrices.
pub fn independence_singular_values(ms: &[[C64; 3]; 3]) -> (f64, f64) {
    let rows: [[C64; 3]; 3] = core::array::from_fn(|k| vectorize_sym(ms[k]));
    let ls = jacobi_least_squares(&rows, &[ZERO; 3], 0.0);
    (ls.sigma_min(), ls.sigma_max())
}

/// Per-node [`check_independence`] over three symmetric tensor fields
/// given as slices of `(a11, a12, a22)` triples.
pub fn check_independence_field(m: [&[[C64; 3]]; 3]) -> Vec<f64> {
    (0..m[0].len())
        .map(|k| check_independence(&[m[0][k], m[1][k], m[2][k]]))
        .collect()
}

/// Result of the illumination search.
#[derive(Debug, Clone)]
pub struct Illuminations {
    pub basis: CgoBasis,
    /// Angles of `u₃, u₄, u₅`.
    pub angles: [f64; 3],
    /// Number of schedule rotations applied (0 = defaults accepted).
    pub attempts: usize,
    /// Smallest relative `σ_min / σ_max` over the probe grid.
    pub min_relative_sigma: f64,
    /// `σ_min` table over the probe grid, row-major by y then x.
    pub sigma_table: Vec<f64>,
    pub probe_grid: Grid2D,
}

impl Illuminations {
    /// Dirichlet traces of the five CGO fields on `grid`.
    pub fn traces(&self, grid: Grid2D) -> Vec<BoundaryTrace> {
        (0..self.basis.directions().len())
            .map(|k| BoundaryTrace::from_fn(grid, |x, y| self.basis.value_at(k, x, y)))
            .collect()
    }
}

fn probe(basis: &CgoBasis, probe_grid: Grid2D) -> Result<(f64, Vec<f64>)> {
    let mut table = Vec::with_capacity(probe_grid.len());
    let mut worst = f64::INFINITY;
    for idx in 0..probe_grid.len() {
        let (i, j) = probe_grid.ij(idx);
        let (x, y) = probe_grid.node(i, j);
        let ms = [
            analytic_m_tilde(basis, 0, x, y)?,
            analytic_m_tilde(basis, 1, x, y)?,
            analytic_m_tilde(basis, 2, x, y)?,
        ];
        let (smin, smax) = independence_singular_values(&ms);
        let rel = if smax > 0.0 { smin / smax } else { 0.0 };
        worst = worst.min(rel);
        table.push(smin);
    }
    Ok((worst, table))
}

/// Verifies a fixed angle set on a 21×21 probe grid without rotating it.
pub fn check_illumination_angles(
    gamma_ref: [C64; 3],
    params: &PhysicsParams,
    angles: [f64; 3],
) -> Result<Illuminations> {
    let probe_grid = Grid2D::new(20)?;
    let basis = CgoBasis::for_tensor(gamma_ref, params, &angles)?;
    let (worst, table) = probe(&basis, probe_grid)?;
    if !(worst > INDEPENDENCE_TOL) {
        return Err(Error::NoAdmissibleIlluminations {
            sigma_min: table.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    Ok(Illuminations {
        basis,
        angles,
        attempts: 0,
        min_relative_sigma: worst,
        sigma_table: table,
        probe_grid,
    })
}

/// Builds `Q` for `γ̃(gamma_ref)`, takes `u₁ = e₁`, `u₂ = e₂` and the extra
/// directions at `angles`, and checks independence of the analytic `M̃_j`
/// on the probe grid. On failure all three angles are rotated by
/// [`ANGLE_SCHEDULE_STEP`], up to [`MAX_ANGLE_ATTEMPTS`] attempts.
pub fn choose_illuminations_from(
    gamma_ref: [C64; 3],
    params: &PhysicsParams,
    angles: [f64; 3],
) -> Result<Illuminations> {
    let mut best = 0.0f64;
    for attempt in 0..MAX_ANGLE_ATTEMPTS {
        let shift = attempt as f64 * ANGLE_SCHEDULE_STEP;
        let rotated = angles.map(|t| t + shift);
        match check_illumination_angles(gamma_ref, params, rotated) {
            Ok(mut ill) => {
                ill.attempts = attempt;
                return Ok(ill);
            }
            Err(Error::NoAdmissibleIlluminations { sigma_min }) => best = best.max(sigma_min),
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoAdmissibleIlluminations { sigma_min: best })
}

/// [`choose_illuminations_from`] with [`DEFAULT_ANGLES`].
pub fn choose_illuminations(gamma_ref: [C64; 3], params: &PhysicsParams) -> Result<Illuminations> {
    choose_illuminations_from(gamma_ref, params, DEFAULT_ANGLES)
}

/// `‖Q Qᵀ - γ̃‖_F / ‖γ̃‖_F`.
pub fn factorization_error(q: &Mat2, gamma_tilde: [C64; 3]) -> f64 {
    let qqt = mat2_mul(q, &mat2_transpose(q));
    let gt: Mat2 = [
        [gamma_tilde[0], gamma_tilde[1]],
        [gamma_tilde[1], gamma_tilde[2]],
    ];
    let diff: Mat2 = [
        [qqt[0][0] - gt[0][0], qqt[0][1] - gt[0][1]],
        [qqt[1][0] - gt[1][0], qqt[1][1] - gt[1][1]],
    ];
    frobenius(&diff) / frobenius(&gt)
}
