//! Synthetic data generation: the Maxwell pair reduced to one scalar
//! equation for `H`,
//!
//! ```text
//! ∇·(Jᵀ γ⁻¹ J ∇H) + iωμ₀ H = 0   in X,      H = g   on ∂X,
//! ```
//!
//! with `E = γ⁻¹ ∇×H`. For symmetric 2×2 `γ` the diffusion tensor is
//! `Jᵀ γ⁻¹ J = γ / det γ`.

use alloc::vec::Vec;

use crate::diff::vector_curl;
use crate::grid::{
    validate_ellipticity, ComplexScalarField, ComplexVectorField, Grid2D, PhysicsParams,
    SymTensorField,
};
use crate::linalg::{solve_sparse, sym2_det, sym2_inverse, SparseMatrix};
use crate::{Error, Result, C64};

/// Relative residual the discrete solve has to reach.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Dirichlet data for `H` on the `4N` boundary nodes, counter-clockwise
/// from `(-1, -1)` (see [`Grid2D::boundary_nodes`]).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    grid: Grid2D,
    values: Vec<C64>,
}

impl BoundaryTrace {
    pub fn new(grid: Grid2D, values: Vec<C64>) -> Result<Self> {
        let expected = 4 * grid.intervals();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Restriction of a field to the boundary ring.
    pub fn from_field(field: &ComplexScalarField) -> Self {
        let grid = field.grid();
        let values = grid
            .boundary_nodes()
            .into_iter()
            .map(|(i, j)| field.at(i, j))
            .collect();
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> C64) -> Self {
        let values = grid
            .boundary_nodes()
            .into_iter()
            .map(|(i, j)| {
                let (x, y) = grid.node(i, j);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: alloc::vec![C64::new(0.0, 0.0); 4 * grid.intervals()],
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// The pair `(H, E)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSolution {
    pub h: ComplexScalarField,
    pub e: ComplexVectorField,
}

/// Assembled discrete operator: interior rows discretize
/// `∇·(A∇H) + iωμ₀H` with `A = γ / det γ`, boundary rows are identity.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid2D,
    matrix: SparseMatrix,
}

impl DiscreteOperator {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Right-hand side carrying Dirichlet data on boundary rows.
    pub fn rhs(&self, g: &BoundaryTrace) -> Result<Vec<C64>> {
        if g.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut b = alloc::vec![C64::new(0.0, 0.0); self.grid.len()];
        for (&(i, j), &v) in self.grid.boundary_nodes().iter().zip(g.values()) {
            b[self.grid.index(i, j)] = v;
        }
        Ok(b)
    }

    /// Residual `L H` at every node (boundary rows give `H` itself).
    pub fn apply(&self, h: &ComplexScalarField) -> Result<ComplexScalarField> {
        if h.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        ComplexScalarField::from_values(self.grid, self.matrix.matvec(h.values()))
    }
}

/// Builds the 9-point operator. Mixed derivatives use the centered
/// four-corner cross difference with `a12` taken at the neighbouring nodes;
/// `a11`, `a22` are averaged onto the half-nodes.
pub fn assemble_operator(gamma: &SymTensorField, params: &PhysicsParams) -> Result<DiscreteOperator> {
    let grid = gamma.grid();
    let n = grid.n();
    let h2 = grid.spacing() * grid.spacing();
    // Diffusion tensor A = γ / det γ.
    let mut a = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let t = gamma.at(idx);
        let det = sym2_det(t);
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(Error::InvalidParameter {
                name: "det(gamma)",
                value: det.norm(),
            });
        }
        let inv = det.inv();
        a.push([t[0] * inv, t[1] * inv, t[2] * inv]);
    }
    let zeroth = params.i_omega_mu();
    let mut trip = Vec::with_capacity(9 * grid.len());
    for j in 0..n {
        for i in 0..n {
            let row = grid.index(i, j);
            if grid.is_boundary(i, j) {
                trip.push((row, row, C64::new(1.0, 0.0)));
                continue;
            }
            let at = |ii: usize, jj: usize| a[grid.index(ii, jj)];
            let c = at(i, j);
            let ae = (c[0] + at(i + 1, j)[0]) * 0.5 / h2;
            let aw = (c[0] + at(i - 1, j)[0]) * 0.5 / h2;
            let an = (c[2] + at(i, j + 1)[2]) * 0.5 / h2;
            let as_ = (c[2] + at(i, j - 1)[2]) * 0.5 / h2;
            let q = 0.25 / h2;
            let ne = (at(i + 1, j)[1] + at(i, j + 1)[1]) * q;
            let sw = (at(i - 1, j)[1] + at(i, j - 1)[1]) * q;
            let nw = -(at(i - 1, j)[1] + at(i, j + 1)[1]) * q;
            let se = -(at(i + 1, j)[1] + at(i, j - 1)[1]) * q;
            trip.push((row, row, -(ae + aw + an + as_) + zeroth));
            trip.push((row, grid.index(i + 1, j), ae));
            trip.push((row, grid.index(i - 1, j), aw));
            trip.push((row, grid.index(i, j + 1), an));
            trip.push((row, grid.index(i, j - 1), as_));
            for (col, v) in [
                (grid.index(i + 1, j + 1), ne),
                (grid.index(i - 1, j - 1), sw),
                (grid.index(i - 1, j + 1), nw),
                (grid.index(i + 1, j - 1), se),
            ] {
                if v != C64::new(0.0, 0.0) {
                    trip.push((row, col, v));
                }
            }
        }
    }
    Ok(DiscreteOperator {
        grid,
        matrix: SparseMatrix::from_triplets(grid.len(), trip),
    })
}

/// `E = γ⁻¹ ∇×H` at every node.
pub fn electric_field(gamma: &SymTensorField, h: &ComplexScalarField) -> Result<ComplexVectorField> {
    if gamma.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let curl = vector_curl(h);
    let mut ex = Vec::with_capacity(h.grid().len());
    let mut ey = Vec::with_capacity(h.grid().len());
    for idx in 0..h.grid().len() {
        let inv = sym2_inverse(gamma.at(idx)).ok_or(Error::InvalidParameter {
            name: "det(gamma)",
            value: 0.0,
        })?;
        let [cx, cy] = curl.at(idx);
        ex.push(inv[0] * cx + inv[1] * cy);
        ey.push(inv[1] * cx + inv[2] * cy);
    }
    ComplexVectorField::from_components(h.grid(), ex, ey)
}

/// Solves for `H` with Dirichlet data `g` and recovers `E`.
///
/// `gamma` must satisfy the ellipticity bounds for some finite `κ`; a
/// tensor with a non-positive eigenvalue in `Re γ` or `Im γ / ω` is
/// rejected before assembly.
pub fn solve_maxwell(
    gamma: &SymTensorField,
    params: &PhysicsParams,
    g: &BoundaryTrace,
) -> Result<ForwardSolution> {
    let op = assemble_operator(gamma, params)?;
    solve_with_operator(&op, gamma, g)
}

/// Same as [`solve_maxwell`] but reuses an assembled operator.
pub fn solve_with_operator(
    op: &DiscreteOperator,
    gamma: &SymTensorField,
    g: &BoundaryTrace,
) -> Result<ForwardSolution> {
    let grid = op.grid();
    if gamma.grid() != grid || g.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let report = validate_ellipticity(gamma, 1.0, f64::MAX);
    // With κ = f64::MAX only non-positive or non-finite eigenvalues fail;
    // ω only rescales the imaginary part, positivity is unaffected.
    if !report.ok {
        return Err(Error::InvalidParameter {
            name: "gamma eigenvalue",
            value: report.worst_eigenvalue,
        });
    }
    let b = op.rhs(g)?;
    let values = solve_sparse(op.matrix(), &b, RESIDUAL_TOL)?;
    let h = ComplexScalarField::from_values(grid, values)?;
    let e = electric_field(gamma, &h)?;
    Ok(ForwardSolution { h, e })
}
