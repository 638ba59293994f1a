//! Explicit pointwise reconstruction of `γ` from `J ≥ 5` magnetic fields.
//!
//! With `V_i = ∇×H_i` the extra fields decompose as
//! `V_{2+j} = λ^j_1 V_1 + λ^j_2 V_2` (Cramer's rule, `γ⁻¹` cancels). Taking
//! the scalar curl of that decomposition gives, at every node,
//!
//! ```text
//! γ⁻¹ : M_j = r_j,   M_j = (Z_j Hᵀ)^sym,   r_j = iωμ₀ (λ^j_1 H_1 + λ^j_2 H_2 - H_{2+j})
//! ```
//!
//! with `Z_j = [∇×λ^j_1 | ∇×λ^j_2]` and `H = [V_1 | V_2]`. Three or more
//! independent `M_j` determine `γ⁻¹` by least squares.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::diff::{stencil_jet, Closure, Jet, LocalFit};
use crate::grid::{
    AdmissibleMask, ComplexScalarField, ComplexVectorField, Grid2D, PhysicsParams, RealField,
    SymTensorField,
};
use crate::linalg::{jacobi_least_squares, sym2_det, sym2_inverse};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Boundary closure of every derivative taken here. The reconstruction
/// differentiates twice, so the boundary ring needs one order more than the
/// interior to keep the overall error at `O(h²)` with a small constant.
pub const CLOSURE: Closure = Closure::ThirdOrder;

/// Window half-width of the smoothing differentiator for noisy data.
pub const DEFAULT_NOISY_FIT_RADIUS: usize = 10;

/// Default polynomial degree of the smoothing differentiator.
pub const DEFAULT_FIT_DEGREE: usize = 4;

/// Default relative determinant threshold: `c₀ = 1e-6 · max |det(V₁, V₂)|`.
pub const DEFAULT_C0_REL: f64 = 1e-6;

/// Default relative singular-value floor for the per-node solve.
pub const DEFAULT_SIGMA_TOL_REL: f64 = 1e-8;

/// Cramer coefficients `λ^j_1, λ^j_2` for every extra field `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSet {
    pub lambda: Vec<[ComplexScalarField; 2]>,
}

impl LambdaSet {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// Per-node matrices `M_j` and right-hand sides `r_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MSystem {
    grid: Grid2D,
    /// `m[j][node]` as `(M11, M12, M22)`.
    pub m: Vec<Vec<[C64; 3]>>,
    /// `r[j][node]`.
    pub r: Vec<Vec<C64>>,
    /// Admissible nodes (`|det(∇×H₁, ∇×H₂)| ≥ c₀`).
    pub mask: AdmissibleMask,
}

impl MSystem {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn equations(&self) -> usize {
        self.m.len()
    }

    /// Row `(M11, 2 M12, M22)` of equation `j` at `node`.
    pub fn row(&self, j: usize, node: usize) -> [C64; 3] {
        let m = self.m[j][node];
        [m[0], m[1] * 2.0, m[2]]
    }
}

fn det2(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0] * b[1] - a[1] * b[0]
}

fn check_fields(fields: &[ComplexScalarField]) -> Result<Grid2D> {
    if fields.len() < 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            found: fields.len(),
        });
    }
    let grid = fields[0].grid();
    if fields.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    Ok(grid)
}

/// How derivatives of the measured fields are taken.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Differentiator {
    /// Pointwise stencils with the [`CLOSURE`] boundary closure.
    #[default]
    Stencil,
    /// Least-squares cubic fit over a window; regularizes the two
    /// differentiations on noisy data.
    LocalFit(LocalFit),
}

impl Differentiator {
    /// Stencils for `radius == 0`, otherwise a local fit of that radius.
    pub fn with_radius(radius: usize, degree: usize) -> Result<Self> {
        if radius == 0 {
            return Ok(Self::Stencil);
        }
        LocalFit::with_degree(radius, degree)
            .map(Self::LocalFit)
            .ok_or(Error::InvalidParameter {
                name: "fit_radius",
                value: radius as f64,
            })
    }

    pub fn radius(&self) -> usize {
        match self {
            Self::Stencil => 0,
            Self::LocalFit(fit) => fit.radius(),
        }
    }

    pub fn jet(&self, f: &ComplexScalarField) -> Result<Jet> {
        let grid = f.grid();
        match self {
            Self::Stencil => Ok(stencil_jet(grid, f.values(), CLOSURE)),
            Self::LocalFit(fit) => fit.jet(grid, f.values()).ok_or(Error::InvalidGrid(grid.intervals())),
        }
    }
}

/// `∇×H` and its first derivatives at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct CurlJet {
    /// `∇×H = (-H_y, H_x)`.
    pub v: ComplexVectorField,
    /// `∂(∇×H)/∂x = (-H_xy, H_xx)`.
    pub dx: ComplexVectorField,
    /// `∂(∇×H)/∂y = (-H_yy, H_xy)`.
    pub dy: ComplexVectorField,
}

impl CurlJet {
    pub fn new(h: &ComplexScalarField, diff: &Differentiator) -> Result<Self> {
        let grid = h.grid();
        let Jet { dx, dy, dxx, dxy, dyy } = diff.jet(h)?;
        let neg = |v: &[C64]| v.iter().map(|z| -z).collect::<Vec<_>>();
        Ok(Self {
            v: ComplexVectorField::from_components(grid, neg(&dy), dx)?,
            dx: ComplexVectorField::from_components(grid, neg(&dxy), dxx)?,
            dy: ComplexVectorField::from_components(grid, neg(&dyy), dxy)?,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.v.grid()
    }
}

fn det_derivatives(a: &CurlJet, b: &CurlJet, k: usize) -> [C64; 2] {
    let (va, vb) = (a.v.at(k), b.v.at(k));
    [
        det2(a.dx.at(k), vb) + det2(va, b.dx.at(k)),
        det2(a.dy.at(k), vb) + det2(va, b.dy.at(k)),
    ]
}

fn jets_of(fields: &[ComplexScalarField], diff: &Differentiator) -> Result<Vec<CurlJet>> {
    check_fields(fields)?;
    fields.iter().map(|f| CurlJet::new(f, diff)).collect()
}

/// `|det(∇×H₁, ∇×H₂)|` at every node.
pub fn determinant_map(h1: &ComplexScalarField, h2: &ComplexScalarField) -> Result<RealField> {
    if h1.grid() != h2.grid() {
        return Err(Error::GridMismatch);
    }
    let diff = Differentiator::Stencil;
    determinant_map_of(&CurlJet::new(h1, &diff)?, &CurlJet::new(h2, &diff)?)
}

fn determinant_map_of(a: &CurlJet, b: &CurlJet) -> Result<RealField> {
    let values = (0..a.grid().len())
        .map(|k| det2(a.v.at(k), b.v.at(k)).norm())
        .collect();
    RealField::from_values(a.grid(), values)
}

/// `c₀ = c0_rel · max |det(∇×H₁, ∇×H₂)|`.
pub fn relative_c0(h1: &ComplexScalarField, h2: &ComplexScalarField, c0_rel: f64) -> Result<f64> {
    let det = determinant_map(h1, h2)?;
    Ok(c0_rel * det.values().iter().copied().fold(0.0, f64::max))
}

/// Cramer's rule for every extra field; nodes with `|det| < c₀` are masked
/// and their coefficients set to zero.
pub fn compute_lambdas(
    fields: &[ComplexScalarField],
    c0: f64,
) -> Result<(LambdaSet, AdmissibleMask)> {
    lambdas_from_jets(&jets_of(fields, &Differentiator::Stencil)?, c0)
}

/// [`compute_lambdas`] from precomputed curl jets.
pub fn lambdas_from_jets(jets: &[CurlJet], c0: f64) -> Result<(LambdaSet, AdmissibleMask)> {
    if jets.len() < 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            found: jets.len(),
        });
    }
    let grid = jets[0].grid();
    let len = grid.len();
    let mut admissible = vec![false; len];
    let mut max_det = 0.0f64;
    let mut dets = Vec::with_capacity(len);
    for k in 0..len {
        let d = det2(jets[0].v.at(k), jets[1].v.at(k));
        max_det = max_det.max(d.norm());
        admissible[k] = d.norm() >= c0 && d.norm() > 0.0 && d.is_finite();
        dets.push(d);
    }
    if !admissible.iter().any(|&b| b) {
        return Err(Error::EmptyAdmissibleRegion { c0, max_det });
    }
    let mut lambda = Vec::with_capacity(jets.len() - 2);
    for extra in &jets[2..] {
        let mut l1 = vec![ZERO; len];
        let mut l2 = vec![ZERO; len];
        for k in 0..len {
            if !admissible[k] {
                continue;
            }
            let inv = dets[k].inv();
            l1[k] = det2(extra.v.at(k), jets[1].v.at(k)) * inv;
            l2[k] = det2(jets[0].v.at(k), extra.v.at(k)) * inv;
        }
        lambda.push([
            ComplexScalarField::from_values(grid, l1)?,
            ComplexScalarField::from_values(grid, l2)?,
        ]);
    }
    Ok((LambdaSet { lambda }, AdmissibleMask::new(grid, admissible, c0)?))
}

/// Assembles `M_j = (Z_j Hᵀ)^sym` and `r_j` at every node.
pub fn build_m_system(
    fields: &[ComplexScalarField],
    lambdas: &LambdaSet,
    mask: &AdmissibleMask,
    params: &PhysicsParams,
) -> Result<MSystem> {
    let jets = jets_of(fields, &Differentiator::Stencil)?;
    build_m_system_from_jets(fields, &jets, lambdas, mask, params)
}

/// [`build_m_system`] from precomputed curl jets.
pub fn build_m_system_from_jets(
    fields: &[ComplexScalarField],
    jets: &[CurlJet],
    lambdas: &LambdaSet,
    mask: &AdmissibleMask,
    params: &PhysicsParams,
) -> Result<MSystem> {
    let grid = check_fields(fields)?;
    if lambdas.len() != fields.len() - 2 {
        return Err(Error::DimensionMismatch {
            expected: fields.len() - 2,
            found: lambdas.len(),
        });
    }
    if jets.len() != fields.len() {
        return Err(Error::DimensionMismatch {
            expected: fields.len(),
            found: jets.len(),
        });
    }
    if mask.grid() != grid || jets.iter().any(|j| j.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let (j1, j2) = (&jets[0], &jets[1]);
    let iwm = params.i_omega_mu();
    let len = grid.len();
    let mut m_all = Vec::with_capacity(lambdas.len());
    let mut r_all = Vec::with_capacity(lambdas.len());
    for (j, [l1, l2]) in lambdas.lambda.iter().enumerate() {
        let jx = &jets[2 + j];
        let h1 = fields[0].values();
        let h2 = fields[1].values();
        let hx = fields[2 + j].values();
        let mut m = Vec::with_capacity(len);
        let mut r = Vec::with_capacity(len);
        for k in 0..len {
            if !mask.is_admissible(k) {
                m.push([ZERO; 3]);
                r.push(ZERO);
                continue;
            }
            // ∇λ by the quotient rule, so only pointwise Hessians of H enter.
            let d = det2(j1.v.at(k), j2.v.at(k));
            let dd = det_derivatives(j1, j2, k);
            let dn1 = det_derivatives(jx, j2, k);
            let dn2 = det_derivatives(j1, jx, k);
            let (lv1, lv2) = (l1.values()[k], l2.values()[k]);
            let g1 = [0, 1].map(|c| (dn1[c] - lv1 * dd[c]) / d);
            let g2 = [0, 1].map(|c| (dn2[c] - lv2 * dd[c]) / d);
            // ∇×λ = (-∂λ/∂y, ∂λ/∂x)
            let z1 = [-g1[1], g1[0]];
            let z2 = [-g2[1], g2[0]];
            let (a, b) = (j1.v.at(k), j2.v.at(k));
            // Z Hᵀ = z1 aᵀ + z2 bᵀ
            let p = |r: usize, c: usize| z1[r] * a[c] + z2[r] * b[c];
            m.push([p(0, 0), (p(0, 1) + p(1, 0)) * 0.5, p(1, 1)]);
            r.push(iwm * (lv1 * h1[k] + lv2 * h2[k] - hx[k]));
        }
        m_all.push(m);
        r_all.push(r);
    }
    Ok(MSystem {
        grid,
        m: m_all,
        r: r_all,
        mask: mask.clone(),
    })
}

/// Output of the per-node least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseSolution {
    pub gamma_inv: SymTensorField,
    /// Smallest singular value of the `J-2 × 3` system at every node
    /// (zero where the node was masked out).
    pub conditioning: RealField,
    /// Nodes whose value was copied from the nearest valid neighbour.
    pub flagged: Vec<bool>,
}

impl PointwiseSolution {
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

/// Copies values from the nearest unflagged node (breadth-first over the
/// 8-neighbourhood) into every flagged node.
fn fill_flagged(grid: Grid2D, flagged: &[bool], mut write: impl FnMut(usize, usize)) -> Result<()> {
    let n = grid.n() as isize;
    let mut source: Vec<Option<usize>> = flagged.iter().enumerate().map(|(k, &f)| (!f).then_some(k)).collect();
    let mut queue: VecDeque<usize> = (0..flagged.len()).filter(|&k| !flagged[k]).collect();
    if queue.is_empty() {
        return Err(Error::EmptyAdmissibleRegion {
            c0: f64::NAN,
            max_det: 0.0,
        });
    }
    while let Some(k) = queue.pop_front() {
        let (i, j) = grid.ij(k);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            let (ii, jj) = (i as isize + di, j as isize + dj);
            if ii < 0 || jj < 0 || ii >= n || jj >= n {
                continue;
            }
            let nb = grid.index(ii as usize, jj as usize);
            if source[nb].is_none() {
                source[nb] = source[k];
                queue.push_back(nb);
            }
        }
    }
    for (k, &f) in flagged.iter().enumerate() {
        if f {
            write(k, source[k].expect("grid is connected"));
        }
    }
    Ok(())
}

/// Solves `a M11 + 2b M12 + c M22 = r_j` for `γ⁻¹ = [[a, b], [b, c]]` at
/// every admissible node. Nodes with `σ_min < sigma_tol_rel · max row norm`
/// or outside the mask are flagged and filled from the nearest valid node.
pub fn solve_gamma_pointwise(msys: &MSystem, sigma_tol_rel: f64) -> Result<PointwiseSolution> {
    let grid = msys.grid();
    let neq = msys.equations();
    if neq < 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: neq,
        });
    }
    let len = grid.len();
    let mut out = SymTensorField::zeros(grid);
    let mut cond = vec![0.0; len];
    let mut flagged = vec![false; len];
    let mut rows = vec![[ZERO; 3]; neq];
    let mut rhs = vec![ZERO; neq];
    for k in 0..len {
        if !msys.mask.is_admissible(k) {
            flagged[k] = true;
            continue;
        }
        let mut row_norm = 0.0f64;
        for j in 0..neq {
            rows[j] = msys.row(j, k);
            rhs[j] = msys.r[j][k];
            let nrm = rows[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            row_norm = row_norm.max(nrm);
        }
        let tol = sigma_tol_rel * row_norm;
        let ls = jacobi_least_squares(&rows, &rhs, tol);
        cond[k] = ls.sigma_min();
        if !(ls.sigma_min() >= tol) || row_norm == 0.0 || ls.x.iter().any(|v| !v.is_finite()) {
            flagged[k] = true;
            continue;
        }
        out.set(k, ls.x);
    }
    let snapshot = out.clone();
    fill_flagged(grid, &flagged, |dst, src| out.set(dst, snapshot.at(src)))?;
    Ok(PointwiseSolution {
        gamma_inv: out,
        conditioning: RealField::from_values(grid, cond)?,
        flagged,
    })
}

/// `γ`, `σ = Re γ` and `ε = Im γ / ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub gamma: SymTensorField,
    pub sigma: SymTensorField,
    pub epsilon: SymTensorField,
    /// Nodes where `γ⁻¹` was (nearly) singular and were filled.
    pub flagged: Vec<bool>,
}

impl Coefficients {
    /// The six real coefficient fields `σ₁ σ₂ σ₃ ε₁ ε₂ ε₃` (stored as
    /// complex with zero imaginary part).
    pub fn six(&self) -> [ComplexScalarField; 6] {
        [
            self.sigma.component(0),
            self.sigma.component(1),
            self.sigma.component(2),
            self.epsilon.component(0),
            self.epsilon.component(1),
            self.epsilon.component(2),
        ]
    }

    /// Rebuilds `γ`, `σ`, `ε` from six (possibly regularized) coefficient
    /// fields; only real parts are used.
    pub fn from_six(fields: &[ComplexScalarField; 6], omega: f64) -> Result<Self> {
        let grid = fields[0].grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        let re = |f: &ComplexScalarField| -> Vec<C64> {
            f.values().iter().map(|v| C64::new(v.re, 0.0)).collect()
        };
        let sigma = SymTensorField::from_components(grid, re(&fields[0]), re(&fields[1]), re(&fields[2]))?;
        let epsilon = SymTensorField::from_components(grid, re(&fields[3]), re(&fields[4]), re(&fields[5]))?;
        let gamma = sigma.add(&epsilon.scale(C64::new(0.0, omega)))?;
        Ok(Self {
            gamma,
            sigma,
            epsilon,
            flagged: vec![false; grid.len()],
        })
    }
}

/// Inverts `γ⁻¹` nodewise and splits `γ` into `σ` and `ε`.
pub fn finalize(gamma_inv: &SymTensorField, omega: f64) -> Result<Coefficients> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            value: omega,
        });
    }
    let grid = gamma_inv.grid();
    let len = grid.len();
    let mut gamma = SymTensorField::zeros(grid);
    let mut flagged = vec![false; len];
    for k in 0..len {
        let t = gamma_inv.at(k);
        let scale = t.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let det = sym2_det(t);
        match sym2_inverse(t) {
            Some(g) if det.norm() > 1e-12 * scale => gamma.set(k, g),
            _ => flagged[k] = true,
        }
    }
    let snapshot = gamma.clone();
    fill_flagged(grid, &flagged, |dst, src| gamma.set(dst, snapshot.at(src)))?;
    let mut sigma = SymTensorField::zeros(grid);
    let mut epsilon = SymTensorField::zeros(grid);
    for k in 0..len {
        let g = gamma.at(k);
        sigma.set(k, g.map(|v| C64::new(v.re, 0.0)));
        epsilon.set(k, g.map(|v| C64::new(v.im / omega, 0.0)));
    }
    Ok(Coefficients {
        gamma,
        sigma,
        epsilon,
        flagged,
    })
}

/// Thresholds of the reconstruction pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconOptions {
    /// `c₀` relative to the largest `|det(∇×H₁, ∇×H₂)|`.
    pub c0_rel: f64,
    /// Singular-value floor relative to the largest row norm.
    pub sigma_tol_rel: f64,
    /// Half-width of the smoothing differentiator window; `0` selects the
    /// plain stencils.
    pub fit_radius: usize,
    /// Polynomial degree of the smoothing differentiator.
    pub fit_degree: usize,
}

impl Default for ReconOptions {
    fn default() -> Self {
        Self {
            c0_rel: DEFAULT_C0_REL,
            sigma_tol_rel: DEFAULT_SIGMA_TOL_REL,
            fit_radius: 0,
            fit_degree: DEFAULT_FIT_DEGREE,
        }
    }
}

/// Every intermediate of one reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub lambdas: LambdaSet,
    pub admissible: AdmissibleMask,
    pub msys: MSystem,
    pub pointwise: PointwiseSolution,
    pub coefficients: Coefficients,
}

/// Full pipeline: λ → M system → pointwise least squares → `σ, ε`.
pub fn reconstruct(
    fields: &[ComplexScalarField],
    params: &PhysicsParams,
    opts: &ReconOptions,
) -> Result<Reconstruction> {
    let diff = Differentiator::with_radius(opts.fit_radius, opts.fit_degree)?;
    let jets = jets_of(fields, &diff)?;
    let det = determinant_map_of(&jets[0], &jets[1])?;
    let c0 = opts.c0_rel * det.values().iter().copied().fold(0.0, f64::max);
    let (lambdas, admissible) = lambdas_from_jets(&jets, c0)?;
    let msys = build_m_system_from_jets(fields, &jets, &lambdas, &admissible, params)?;
    let pointwise = solve_gamma_pointwise(&msys, opts.sigma_tol_rel)?;
    let coefficients = finalize(&pointwise.gamma_inv, params.omega)?;
    Ok(Reconstruction {
        lambdas,
        admissible,
        msys,
        pointwise,
        coefficients,
    })
}

/// `max_j |γ⁻¹ : M_j - r_j|` at every node for a given `γ⁻¹` (zero off
/// the mask).
pub fn consistency_residual(msys: &MSystem, gamma_inv: &SymTensorField) -> Result<Vec<f64>> {
    if gamma_inv.grid() != msys.grid() {
        return Err(Error::GridMismatch);
    }
    Ok((0..msys.grid().len())
        .map(|k| {
            if !msys.mask.is_admissible(k) {
                return 0.0;
            }
            let g = gamma_inv.at(k);
            (0..msys.equations())
                .map(|j| {
                    let row = msys.row(j, k);
                    (row[0] * g[0] + row[1] * g[1] + row[2] * g[2] - msys.r[j][k]).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}
