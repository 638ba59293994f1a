//! Post-reconstruction denoising of coefficient fields.
//!
//! `Γ` is the forward-difference gradient with zero rows on the last grid
//! line of each direction (Neumann closure), so `ΓᵀΓ` is the five-point
//! Neumann Laplacian and `I + ρΓᵀΓ` is symmetric positive definite. Complex
//! fields are processed as two independent real channels.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{ComplexScalarField, Grid2D};
use crate::{Error, Result, C64};

pub const DEFAULT_RHO_TIKHONOV: f64 = 1e-4;
pub const DEFAULT_RHO_TV: f64 = 5e-3;

/// Regularizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    None,
    Tikhonov,
    Tv,
}

/// Parameters of the denoising step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegConfig {
    pub method: Method,
    /// Weight of the penalty term.
    pub rho: f64,
    /// Split-Bregman coupling weight. With `Γ` scaled by `1/h`, values near
    /// `rho` converge fastest; [`RegConfig::tv`] uses `rho`.
    pub bregman_mu: f64,
    pub max_iters: usize,
    /// Relative iterate change that ends the split-Bregman loop.
    pub tol: f64,
    /// Isotropic (`‖(∂x, ∂y)‖₂`) instead of anisotropic TV.
    pub isotropic: bool,
}

impl RegConfig {
    pub fn tikhonov(rho: f64) -> Self {
        Self {
            method: Method::Tikhonov,
            rho,
            ..Self::default()
        }
    }

    pub fn tv(rho: f64) -> Self {
        Self {
            method: Method::Tv,
            rho,
            bregman_mu: if rho > 0.0 { rho } else { DEFAULT_RHO_TV },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: self.rho,
            });
        }
        if !(self.bregman_mu > 0.0) {
            return Err(Error::InvalidParameter {
                name: "bregman_mu",
                value: self.bregman_mu,
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                value: 0.0,
            });
        }
        Ok(())
    }
}

impl Default for RegConfig {
    fn default() -> Self {
        Self {
            method: Method::None,
            rho: DEFAULT_RHO_TIKHONOV,
            bregman_mu: DEFAULT_RHO_TV,
            max_iters: 1000,
            tol: 1e-6,
            isotropic: false,
        }
    }
}

/// Forward-difference gradient `Γf` of a real channel.
pub fn forward_gradient(grid: Grid2D, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let inv_h = 1.0 / grid.spacing();
    let mut gx = vec![0.0; f.len()];
    let mut gy = vec![0.0; f.len()];
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if i + 1 < n {
                gx[k] = (f[k + 1] - f[k]) * inv_h;
            }
            if j + 1 < n {
                gy[k] = (f[k + n] - f[k]) * inv_h;
            }
        }
    }
    (gx, gy)
}

/// `Γᵀ(px, py)`.
pub fn gradient_adjoint(grid: Grid2D, px: &[f64], py: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let inv_h = 1.0 / grid.spacing();
    let mut out = vec![0.0; px.len()];
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if i + 1 < n {
                out[k] -= px[k] * inv_h;
                out[k + 1] += px[k] * inv_h;
            }
            if j + 1 < n {
                out[k] -= py[k] * inv_h;
                out[k + n] += py[k] * inv_h;
            }
        }
    }
    out
}

/// Applies `I + w ΓᵀΓ` into `out`.
pub fn apply_shifted_laplacian(grid: Grid2D, w: f64, f: &[f64], out: &mut [f64]) {
    let n = grid.n();
    let s = w / (grid.spacing() * grid.spacing());
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let mut acc = 0.0;
            if i > 0 {
                acc += f[k] - f[k - 1];
            }
            if i + 1 < n {
                acc += f[k] - f[k + 1];
            }
            if j > 0 {
                acc += f[k] - f[k - n];
            }
            if j + 1 < n {
                acc += f[k] - f[k + n];
            }
            out[k] = f[k] + s * acc;
        }
    }
}

/// Direct solver for `(I + w ΓᵀΓ) f = b`.
///
/// The 1-D Neumann Laplacian on `n` nodes is diagonalized by the orthonormal
/// cosine basis `v_k(i) ∝ cos(πk(i + ½)/n)` with eigenvalues
/// `(2 - 2cos(πk/n))/h²`; the 2-D operator is the Kronecker sum, so one
/// solve costs four dense `n×n` products.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacian {
    n: usize,
    /// Row-major `basis[i * n + k] = v_k(i)`.
    basis: Vec<f64>,
    /// `1 / (1 + w(λ_k + λ_l))`, row-major in `(l, k)`.
    inv_diag: Vec<f64>,
}

impl ShiftedLaplacian {
    pub fn new(grid: Grid2D, w: f64) -> Self {
        let n = grid.n();
        let nf = n as f64;
        let h2 = grid.spacing() * grid.spacing();
        let mut basis = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let norm = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                basis[i * n + k] = norm * (core::f64::consts::PI * k as f64 * (i as f64 + 0.5) / nf).cos();
            }
        }
        let eig: Vec<f64> = (0..n)
            .map(|k| (2.0 - 2.0 * (core::f64::consts::PI * k as f64 / nf).cos()) / h2)
            .collect();
        let mut inv_diag = vec![0.0; n * n];
        for l in 0..n {
            for k in 0..n {
                inv_diag[l * n + k] = 1.0 / (1.0 + w * (eig[k] + eig[l]));
            }
        }
        Self { n, basis, inv_diag }
    }

    /// `out = Aᵀ X` (`transpose`) or `A X` for the basis `A`, `X` row-major.
    fn left(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            let row = &mut out[r * n..(r + 1) * n];
            for m in 0..n {
                let a = if transpose { self.basis[m * n + r] } else { self.basis[r * n + m] };
                if a == 0.0 {
                    continue;
                }
                for (o, v) in row.iter_mut().zip(&x[m * n..(m + 1) * n]) {
                    *o += a * v;
                }
            }
        }
        out
    }

    /// `out = X A` (`transpose = false`) or `X Aᵀ`.
    fn right(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            let xr = &x[r * n..(r + 1) * n];
            let row = &mut out[r * n..(r + 1) * n];
            for m in 0..n {
                let v = xr[m];
                if v == 0.0 {
                    continue;
                }
                if transpose {
                    for (c, o) in row.iter_mut().enumerate() {
                        *o += v * self.basis[c * n + m];
                    }
                } else {
                    for (o, a) in row.iter_mut().zip(&self.basis[m * n..(m + 1) * n]) {
                        *o += v * a;
                    }
                }
            }
        }
        out
    }

    /// `b` is indexed `j * n + i`, as grid fields are.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n * self.n);
        let mut hat = self.right(&self.left(b, true), false);
        for (v, d) in hat.iter_mut().zip(&self.inv_diag) {
            *v *= d;
        }
        self.right(&self.left(&hat, false), true)
    }
}

/// Solves `(I + w ΓᵀΓ) f = b`.
pub fn solve_shifted_laplacian(grid: Grid2D, w: f64, b: &[f64]) -> Vec<f64> {
    ShiftedLaplacian::new(grid, w).solve(b)
}

fn split_channels(f: &ComplexScalarField) -> (Vec<f64>, Vec<f64>) {
    f.values().iter().map(|v| (v.re, v.im)).unzip()
}

fn join_channels(grid: Grid2D, re: &[f64], im: &[f64]) -> Result<ComplexScalarField> {
    ComplexScalarField::from_values(grid, re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

/// Explicit Tikhonov smoothing `f = (I + ρΓᵀΓ)⁻¹ f_rc`.
pub fn tikhonov(f_rc: &ComplexScalarField, rho: f64) -> Result<ComplexScalarField> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
        });
    }
    if rho == 0.0 {
        return Ok(f_rc.clone());
    }
    let grid = f_rc.grid();
    let (re, im) = split_channels(f_rc);
    let op = ShiftedLaplacian::new(grid, rho);
    let re = op.solve(&re);
    let im = if im.iter().all(|&v| v == 0.0) { im } else { op.solve(&im) };
    join_channels(grid, &re, &im)
}

/// Soft thresholding `sign(v) max(|v| - t, 0)`.
pub fn shrink(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// `½‖f - g‖² + ρ‖Γf‖₁` of one real channel.
pub fn tv_objective(grid: Grid2D, f: &[f64], g: &[f64], rho: f64, isotropic: bool) -> f64 {
    let fid: f64 = f.iter().zip(g).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * 0.5;
    fid + rho * total_variation(grid, f, isotropic)
}

/// `‖Γf‖₁` (anisotropic) or `Σ‖(Γf)_k‖₂` (isotropic).
pub fn total_variation(grid: Grid2D, f: &[f64], isotropic: bool) -> f64 {
    let (gx, gy) = forward_gradient(grid, f);
    gx.iter()
        .zip(&gy)
        .map(|(a, b)| if isotropic { a.hypot(*b) } else { a.abs() + b.abs() })
        .sum()
}

/// Result of the split-Bregman iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TvOutcome {
    /// Lowest-objective iterate, per channel.
    pub field: ComplexScalarField,
    pub converged: bool,
    pub iterations: usize,
    /// Objective of the real channel after every iteration.
    pub objective_history: Vec<f64>,
}

struct ChannelResult {
    f: Vec<f64>,
    converged: bool,
    iterations: usize,
    history: Vec<f64>,
}

fn split_bregman_channel(grid: Grid2D, g: &[f64], cfg: &RegConfig) -> Result<ChannelResult> {
    let len = g.len();
    let mu = cfg.bregman_mu;
    let thresh = cfg.rho / mu;
    let op = ShiftedLaplacian::new(grid, mu);
    let g_norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut f = g.to_vec();
    let (mut dx, mut dy) = (vec![0.0; len], vec![0.0; len]);
    let (mut bx, mut by) = (vec![0.0; len], vec![0.0; len]);
    let mut best = f.clone();
    let mut best_obj = tv_objective(grid, &f, g, cfg.rho, cfg.isotropic);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iters {
        iterations = it + 1;
        let qx: Vec<f64> = dx.iter().zip(&bx).map(|(d, b)| d - b).collect();
        let qy: Vec<f64> = dy.iter().zip(&by).map(|(d, b)| d - b).collect();
        let adj = gradient_adjoint(grid, &qx, &qy);
        let rhs: Vec<f64> = g.iter().zip(&adj).map(|(gi, a)| gi + mu * a).collect();
        let next = op.solve(&rhs);
        let (gx, gy) = forward_gradient(grid, &next);
        for k in 0..len {
            let (vx, vy) = (gx[k] + bx[k], gy[k] + by[k]);
            if cfg.isotropic {
                let s = vx.hypot(vy);
                let scale = if s > 0.0 { (s - thresh).max(0.0) / s } else { 0.0 };
                dx[k] = vx * scale;
                dy[k] = vy * scale;
            } else {
                dx[k] = shrink(vx, thresh);
                dy[k] = shrink(vy, thresh);
            }
            bx[k] = vx - dx[k];
            by[k] = vy - dy[k];
        }
        let change = next
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        // Against the input too: a channel flattened towards zero never
        // meets a test relative to its own norm.
        let scale = f.iter().map(|a| a * a).sum::<f64>().sqrt().max(g_norm).max(f64::MIN_POSITIVE);
        f = next;
        let obj = tv_objective(grid, &f, g, cfg.rho, cfg.isotropic);
        history.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&f);
        }
        if change <= cfg.tol * scale {
            converged = true;
            break;
        }
    }
    Ok(ChannelResult {
        f: best,
        converged,
        iterations,
        history,
    })
}

/// Minimizes `½‖f - f_rc‖² + ρ‖Γf‖₁` by split Bregman: quadratic solve,
/// shrinkage of `Γf + b`, Bregman update `b += Γf - d`.
pub fn split_bregman_tv(f_rc: &ComplexScalarField, cfg: &RegConfig) -> Result<TvOutcome> {
    cfg.validate()?;
    if cfg.rho == 0.0 {
        return Ok(TvOutcome {
            field: f_rc.clone(),
            converged: true,
            iterations: 0,
            objective_history: Vec::new(),
        });
    }
    let grid = f_rc.grid();
    let (re, im) = split_channels(f_rc);
    let r = split_bregman_channel(grid, &re, cfg)?;
    let (im_out, im_conv, im_iters) = if im.iter().all(|&v| v == 0.0) {
        (im, true, 0)
    } else {
        let c = split_bregman_channel(grid, &im, cfg)?;
        (c.f, c.converged, c.iterations)
    };
    Ok(TvOutcome {
        field: join_channels(grid, &r.f, &im_out)?,
        converged: r.converged && im_conv,
        iterations: r.iterations.max(im_iters),
        objective_history: r.history,
    })
}

/// Applies the configured regularizer to one field.
pub fn regularize(f_rc: &ComplexScalarField, cfg: &RegConfig) -> Result<ComplexScalarField> {
    match cfg.method {
        Method::None => Ok(f_rc.clone()),
        Method::Tikhonov => tikhonov(f_rc, cfg.rho),
        Method::Tv => split_bregman_tv(f_rc, cfg).map(|o| o.field),
    }
}
