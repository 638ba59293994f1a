//! Computational grid on `[-1, 1]²` and the node-centered field containers.
//!
//! Fields are stored row-major by `y` then `x`: node `(i, j)` with
//! `x = -1 + i h`, `y = -1 + j h` lives at index `j * n + i`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// Uniform tensor-product grid with `N` intervals per axis on `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid2D {
    intervals: usize,
}

impl Grid2D {
    /// Builds the grid with `N` intervals; `N` must be even and at least 4.
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 4 || intervals % 2 != 0 {
            return Err(Error::InvalidGrid(intervals));
        }
        Ok(Self { intervals })
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Nodes per axis, `N + 1`.
    pub fn n(&self) -> usize {
        self.intervals + 1
    }

    /// Total node count, `(N + 1)²`.
    pub fn len(&self) -> usize {
        self.n() * self.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing `h = 2 / N`.
    pub fn spacing(&self) -> f64 {
        2.0 / self.intervals as f64
    }

    /// Coordinate of grid line `i`, evaluated as `(2i - N) / N` so that
    /// rational lines such as `y = -0.5` are exact.
    pub fn coord(&self, i: usize) -> f64 {
        (2.0 * i as f64 - self.intervals as f64) / self.intervals as f64
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.coord(i), self.coord(j))
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n() + i
    }

    /// Inverse of [`Grid2D::index`].
    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n(), idx / self.n())
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.intervals || j == self.intervals
    }

    /// Grid line index whose coordinate equals `c`, if any.
    pub fn line_of(&self, c: f64) -> Option<usize> {
        let t = (c + 1.0) / self.spacing();
        let i = t.round();
        if i < 0.0 || i > self.intervals as f64 {
            return None;
        }
        let i = i as usize;
        if (self.coord(i) - c).abs() <= 1e-12 {
            Some(i)
        } else {
            None
        }
    }

    /// Boundary node indices in counter-clockwise order starting at `(-1, -1)`.
    /// There are `4N` of them.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let m = self.intervals;
        let mut out = Vec::with_capacity(4 * m);
        for i in 0..m {
            out.push((i, 0));
        }
        for j in 0..m {
            out.push((m, j));
        }
        for i in (1..=m).rev() {
            out.push((i, m));
        }
        for j in (1..=m).rev() {
            out.push((0, j));
        }
        out
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Known physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub omega: f64,
    pub mu0: f64,
}

impl PhysicsParams {
    pub fn new(omega: f64, mu0: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: omega,
            });
        }
        if !(mu0 > 0.0 && mu0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mu0",
                value: mu0,
            });
        }
        Ok(Self { omega, mu0 })
    }

    /// `iωμ₀`, the zeroth-order coefficient of the magnetic equation.
    pub fn i_omega_mu(&self) -> C64 {
        C64::new(0.0, self.omega * self.mu0)
    }
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            mu0: 1.0,
        }
    }
}

/// Complex scalar field sampled at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalarField {
    grid: Grid2D,
    values: Vec<C64>,
}

impl ComplexScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<C64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                let (x, y) = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination; fields on different grids are rejected.
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    /// Mean of `|H|` over all nodes.
    pub fn mean_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Complex 2-vector field; components `x` (first) and `y` (second).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVectorField {
    grid: Grid2D,
    x: Vec<C64>,
    y: Vec<C64>,
}

impl ComplexVectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            x: vec![C64::new(0.0, 0.0); grid.len()],
            y: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_components(grid: Grid2D, x: Vec<C64>, y: Vec<C64>) -> Result<Self> {
        grid.check_len(x.len())?;
        grid.check_len(y.len())?;
        Ok(Self { grid, x, y })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> (C64, C64)) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (i, j) = grid.ij(idx);
            let (x, y) = grid.node(i, j);
            let (a, b) = f(x, y);
            out.x[idx] = a;
            out.y[idx] = b;
        }
        out
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn x(&self) -> &[C64] {
        &self.x
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [C64; 2] {
        [self.x[idx], self.y[idx]]
    }

    pub fn component(&self, k: usize) -> ComplexScalarField {
        let values = if k == 0 { self.x.clone() } else { self.y.clone() };
        ComplexScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            grid: self.grid,
            x: self.x.iter().map(|v| v * c).collect(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }
}

/// Complex symmetric 2×2 tensor field stored as `(a11, a12, a22)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    grid: Grid2D,
    pub a11: Vec<C64>,
    pub a12: Vec<C64>,
    pub a22: Vec<C64>,
}

impl SymTensorField {
    pub fn zeros(grid: Grid2D) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            a11: z.clone(),
            a12: z.clone(),
            a22: z,
        }
    }

    pub fn from_components(
        grid: Grid2D,
        a11: Vec<C64>,
        a12: Vec<C64>,
        a22: Vec<C64>,
    ) -> Result<Self> {
        grid.check_len(a11.len())?;
        grid.check_len(a12.len())?;
        grid.check_len(a22.len())?;
        Ok(Self {
            grid,
            a11,
            a12,
            a22,
        })
    }

    /// Same tensor at every node.
    pub fn constant(grid: Grid2D, t: [C64; 3]) -> Self {
        Self {
            grid,
            a11: vec![t[0]; grid.len()],
            a12: vec![t[1]; grid.len()],
            a22: vec![t[2]; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> [C64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (i, j) = grid.ij(idx);
            let (x, y) = grid.node(i, j);
            let t = f(x, y);
            out.a11[idx] = t[0];
            out.a12[idx] = t[1];
            out.a22[idx] = t[2];
        }
        out
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [C64; 3] {
        [self.a11[idx], self.a12[idx], self.a22[idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, t: [C64; 3]) {
        self.a11[idx] = t[0];
        self.a12[idx] = t[1];
        self.a22[idx] = t[2];
    }

    /// Component `k` (0 → a11, 1 → a12, 2 → a22) as a scalar field.
    pub fn component(&self, k: usize) -> ComplexScalarField {
        let values = match k {
            0 => self.a11.clone(),
            1 => self.a12.clone(),
            _ => self.a22.clone(),
        };
        ComplexScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn with_component(mut self, k: usize, field: &ComplexScalarField) -> Result<Self> {
        if field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let dst = match k {
            0 => &mut self.a11,
            1 => &mut self.a12,
            _ => &mut self.a22,
        };
        dst.copy_from_slice(field.values());
        Ok(self)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let add = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            grid: self.grid,
            a11: add(&self.a11, &other.a11),
            a12: add(&self.a12, &other.a12),
            a22: add(&self.a22, &other.a22),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let s = |a: &[C64]| a.iter().map(|x| x * c).collect();
        Self {
            grid: self.grid,
            a11: s(&self.a11),
            a12: s(&self.a12),
            a22: s(&self.a22),
        }
    }
}

/// Real scalar field, used for conditioning maps and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RealField {
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Nodes where `|det(∇×H₁, ∇×H₂)| ≥ c₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleMask {
    grid: Grid2D,
    admissible: Vec<bool>,
    c0: f64,
}

impl AdmissibleMask {
    pub fn new(grid: Grid2D, admissible: Vec<bool>, c0: f64) -> Result<Self> {
        grid.check_len(admissible.len())?;
        Ok(Self {
            grid,
            admissible,
            c0,
        })
    }

    pub fn full(grid: Grid2D) -> Self {
        Self {
            grid,
            admissible: vec![true; grid.len()],
            c0: 0.0,
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    #[inline]
    pub fn is_admissible(&self, idx: usize) -> bool {
        self.admissible[idx]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.admissible
    }

    pub fn count(&self) -> usize {
        self.admissible.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.admissible.len() as f64
    }
}

/// Outcome of [`validate_ellipticity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityReport {
    pub ok: bool,
    /// Node whose eigenvalue lies farthest outside (or closest to the edge
    /// of) `[1/κ, κ]`.
    pub worst_node: usize,
    pub worst_eigenvalue: f64,
    /// `false` for `Re γ`, `true` for `Im γ / ω`.
    pub worst_in_permittivity: bool,
}

/// Eigenvalues of the real symmetric matrix `[[a, b], [b, c]]`, ascending.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    (mean - r, mean + r)
}

/// Checks that both eigenvalues of `Re γ` and `Im γ / ω` lie in `[1/κ, κ]`
/// at every node.
pub fn validate_ellipticity(gamma: &SymTensorField, omega: f64, kappa: f64) -> EllipticityReport {
    let lo = 1.0 / kappa;
    let mut report = EllipticityReport {
        ok: true,
        worst_node: 0,
        worst_eigenvalue: f64::NAN,
        worst_in_permittivity: false,
    };
    // Margin: negative means outside the band.
    let mut worst_margin = f64::INFINITY;
    for idx in 0..gamma.grid().len() {
        let [a, b, c] = gamma.at(idx);
        for (perm, (l1, l2)) in [
            (false, sym2_eigenvalues(a.re, b.re, c.re)),
            (true, sym2_eigenvalues(a.im / omega, b.im / omega, c.im / omega)),
        ] {
            for l in [l1, l2] {
                let margin = if l.is_finite() {
                    (l - lo).min(kappa - l)
                } else {
                    f64::NEG_INFINITY
                };
                if margin < worst_margin {
                    worst_margin = margin;
                    report.worst_node = idx;
                    report.worst_eigenvalue = l;
                    report.worst_in_permittivity = perm;
                }
            }
        }
    }
    report.ok = worst_margin >= 0.0;
    report
}
