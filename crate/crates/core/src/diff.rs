//! Finite differences on the node grid.
//!
//! Interior nodes use centered differences. The boundary ring uses a
//! one-sided closure: three points (second order, exact on quadratics) by
//! default, or four/five points (third order) via [`Closure::ThirdOrder`].

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{ComplexScalarField, ComplexVectorField, Grid2D};
use crate::linalg::solve_dense_real;
use crate::C64;

/// One-sided stencil used on the boundary ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Three-point first derivative, four-point second derivative.
    #[default]
    SecondOrder,
    /// Four-point first derivative, five-point second derivative.
    ThirdOrder,
}

/// `∂f/∂x` of node values laid out on `grid`.
pub fn d_dx(grid: Grid2D, f: &[C64]) -> Vec<C64> {
    d_dx_with(grid, f, Closure::SecondOrder)
}

/// `∂f/∂y` of node values laid out on `grid`.
pub fn d_dy(grid: Grid2D, f: &[C64]) -> Vec<C64> {
    d_dy_with(grid, f, Closure::SecondOrder)
}

pub fn d_dx_with(grid: Grid2D, f: &[C64], closure: Closure) -> Vec<C64> {
    let n = grid.n();
    let inv2h = 1.0 / (2.0 * grid.spacing());
    let mut out = Vec::with_capacity(f.len());
    for j in 0..n {
        let row = &f[j * n..(j + 1) * n];
        for i in 0..n {
            out.push(axis_derivative(row, i, 1, inv2h, closure));
        }
    }
    out
}

pub fn d_dy_with(grid: Grid2D, f: &[C64], closure: Closure) -> Vec<C64> {
    let n = grid.n();
    let inv2h = 1.0 / (2.0 * grid.spacing());
    let mut out = Vec::with_capacity(f.len());
    for j in 0..n {
        for i in 0..n {
            out.push(axis_derivative(&f[i..], j, n, inv2h, closure));
        }
    }
    out
}

#[inline]
fn axis_derivative(line: &[C64], k: usize, stride: usize, inv2h: f64, closure: Closure) -> C64 {
    let at = |m: usize| line[m * stride];
    let last = (line.len() - 1) / stride;
    let one_sided = |p: &dyn Fn(usize) -> C64| match closure {
        Closure::SecondOrder => (-3.0 * p(0) + 4.0 * p(1) - p(2)) * inv2h,
        Closure::ThirdOrder => {
            (-11.0 * p(0) + 18.0 * p(1) - 9.0 * p(2) + 2.0 * p(3)) * (inv2h / 3.0)
        }
    };
    if k == 0 {
        one_sided(&|m| at(m))
    } else if k == last {
        -one_sided(&|m| at(last - m))
    } else {
        (at(k + 1) - at(k - 1)) * inv2h
    }
}

/// `∂²f/∂x²`: compact three-point stencil inside, one-sided closure on the
/// boundary ring.
pub fn d2_dx2(grid: Grid2D, f: &[C64], closure: Closure) -> Vec<C64> {
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = Vec::with_capacity(f.len());
    for j in 0..n {
        let row = &f[j * n..(j + 1) * n];
        for i in 0..n {
            out.push(axis_second_derivative(row, i, 1, inv_h2, closure));
        }
    }
    out
}

/// `∂²f/∂y²`, same stencils as [`d2_dx2`].
pub fn d2_dy2(grid: Grid2D, f: &[C64], closure: Closure) -> Vec<C64> {
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut out = Vec::with_capacity(f.len());
    for j in 0..n {
        for i in 0..n {
            out.push(axis_second_derivative(&f[i..], j, n, inv_h2, closure));
        }
    }
    out
}

/// `∂²f/∂x∂y` as `∂/∂y` of `∂f/∂x`. Each factor acts along one axis, so the
/// closure order carries over.
pub fn d2_dxdy(grid: Grid2D, f: &[C64], closure: Closure) -> Vec<C64> {
    d_dy_with(grid, &d_dx_with(grid, f, closure), closure)
}

#[inline]
fn axis_second_derivative(line: &[C64], k: usize, stride: usize, inv_h2: f64, closure: Closure) -> C64 {
    let at = |m: usize| line[m * stride];
    let last = (line.len() - 1) / stride;
    let one_sided = |p: &dyn Fn(usize) -> C64| match closure {
        Closure::SecondOrder => (2.0 * p(0) - 5.0 * p(1) + 4.0 * p(2) - p(3)) * inv_h2,
        Closure::ThirdOrder => {
            (35.0 * p(0) - 104.0 * p(1) + 114.0 * p(2) - 56.0 * p(3) + 11.0 * p(4))
                * (inv_h2 / 12.0)
        }
    };
    if k == 0 {
        one_sided(&|m| at(m))
    } else if k == last {
        one_sided(&|m| at(last - m))
    } else {
        (at(k + 1) - 2.0 * at(k) + at(k - 1)) * inv_h2
    }
}

/// First and second derivatives `(f_x, f_y, f_xx, f_xy, f_yy)` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub dx: Vec<C64>,
    pub dy: Vec<C64>,
    pub dxx: Vec<C64>,
    pub dxy: Vec<C64>,
    pub dyy: Vec<C64>,
}

/// Pointwise stencil jet with the given boundary closure.
pub fn stencil_jet(grid: Grid2D, f: &[C64], closure: Closure) -> Jet {
    Jet {
        dx: d_dx_with(grid, f, closure),
        dy: d_dy_with(grid, f, closure),
        dxx: d2_dx2(grid, f, closure),
        dxy: d2_dxdy(grid, f, closure),
        dyy: d2_dy2(grid, f, closure),
    }
}

/// Smoothing differentiator: least-squares fit of a bivariate polynomial
/// over the `(2r+1)²` window around each node, shifted inward near the
/// boundary so that it never leaves the grid. Exact on polynomials of the
/// fit degree; noise in the second derivatives drops like `r⁻³`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    radius: usize,
    degree: usize,
    /// Weights indexed by the node offset inside its window, then by
    /// derivative, then by window position.
    weights: Vec<[Vec<f64>; 5]>,
}

/// Monomials `xᵃ yᵇ` with `a + b ≤ degree`, ordered by total degree, then by
/// decreasing power of `x`.
fn poly_basis(degree: usize, x: f64, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for total in 0..=degree {
        for b in 0..=total {
            out.push(x.powi((total - b) as i32) * y.powi(b as i32));
        }
    }
    out
}

impl LocalFit {
    /// Cubic fit; `radius ≥ 2` so the fit is determined.
    pub fn new(radius: usize) -> Option<Self> {
        Self::with_degree(radius, 3)
    }

    /// Fit of total degree `2 ≤ degree ≤ 2·radius`.
    pub fn with_degree(radius: usize, degree: usize) -> Option<Self> {
        if radius < 2 || degree < 2 || degree > 2 * radius {
            return None;
        }
        let w = 2 * radius + 1;
        let mut weights = Vec::with_capacity(w * w);
        for oy in 0..w {
            for ox in 0..w {
                weights.push(Self::offset_weights(radius, degree, ox, oy)?);
            }
        }
        Some(Self {
            radius,
            degree,
            weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Fit weights for a node sitting at `(ox, oy)` inside its window, in
    /// local units of `h` centered on the node.
    fn offset_weights(radius: usize, degree: usize, ox: usize, oy: usize) -> Option<[Vec<f64>; 5]> {
        let w = 2 * radius + 1;
        let rows: Vec<Vec<f64>> = (0..w * w)
            .map(|p| {
                let (px, py) = (p % w, p / w);
                // Offsets in units of `radius·h` keep the normal matrix tame.
                let r = radius as f64;
                poly_basis(degree, (px as f64 - ox as f64) / r, (py as f64 - oy as f64) / r)
            })
            .collect();
        let terms = rows[0].len();
        let mut normal = vec![0.0; terms * terms];
        for r in &rows {
            for a in 0..terms {
                for b in 0..terms {
                    normal[a * terms + b] += r[a] * r[b];
                }
            }
        }
        // (f_x, f_y, f_xx, f_xy, f_yy) = (c₁, c₂, 2c₃, c₄, 2c₅), rescaled to
        // units of `h`.
        let (r1, r2) = (1.0 / radius as f64, 1.0 / (radius * radius) as f64);
        let picks = [(1, r1), (2, r1), (3, 2.0 * r2), (4, r2), (5, 2.0 * r2)];
        let mut out: [Vec<f64>; 5] = Default::default();
        for (slot, &(term, factor)) in picks.iter().enumerate() {
            let mut e = vec![0.0; terms];
            e[term] = factor;
            // Row of (AᵀA)⁻¹ picking `term`, then times Aᵀ.
            let g = solve_dense_real(normal.clone(), e)?;
            out[slot] = rows
                .iter()
                .map(|r| r.iter().zip(&g).map(|(a, b)| a * b).sum())
                .collect();
        }
        Some(out)
    }

    /// Derivatives of `f` on `grid`. Requires `grid.n() > 2·radius`.
    pub fn jet(&self, grid: Grid2D, f: &[C64]) -> Option<Jet> {
        let n = grid.n();
        let r = self.radius;
        let w = 2 * r + 1;
        if n < w {
            return None;
        }
        let (h, h2) = (grid.spacing(), grid.spacing() * grid.spacing());
        let len = grid.len();
        let mut out: [Vec<C64>; 5] = core::array::from_fn(|_| Vec::with_capacity(len));
        for j in 0..n {
            let cy = j.clamp(r, n - 1 - r);
            for i in 0..n {
                let cx = i.clamp(r, n - 1 - r);
                let (x0, y0) = (cx - r, cy - r);
                let wts = &self.weights[(j - y0) * w + (i - x0)];
                for (slot, wt) in wts.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for py in 0..w {
                        let row = &f[(y0 + py) * n + x0..(y0 + py) * n + x0 + w];
                        for (px, v) in row.iter().enumerate() {
                            acc += v * wt[py * w + px];
                        }
                    }
                    out[slot].push(acc);
                }
            }
        }
        let [dx, dy, dxx, dxy, dyy] = out;
        let s1 = |v: Vec<C64>| v.into_iter().map(|z| z / h).collect::<Vec<_>>();
        let s2 = |v: Vec<C64>| v.into_iter().map(|z| z / h2).collect::<Vec<_>>();
        Some(Jet {
            dx: s1(dx),
            dy: s1(dy),
            dxx: s2(dxx),
            dxy: s2(dxy),
            dyy: s2(dyy),
        })
    }
}

/// `∇f = (∂f/∂x, ∂f/∂y)`.
pub fn gradient(f: &ComplexScalarField) -> ComplexVectorField {
    let g = f.grid();
    let dx = d_dx(g, f.values());
    let dy = d_dy(g, f.values());
    ComplexVectorField::from_components(g, dx, dy).expect("same grid")
}

/// Vector curl `∇×H = (-∂H/∂y, ∂H/∂x)`, i.e. `J ∇H` with `J = [[0,-1],[1,0]]`.
pub fn vector_curl(h: &ComplexScalarField) -> ComplexVectorField {
    vector_curl_with(h, Closure::SecondOrder)
}

pub fn vector_curl_with(h: &ComplexScalarField, closure: Closure) -> ComplexVectorField {
    let g = h.grid();
    let dx = d_dx_with(g, h.values(), closure);
    let dy = d_dy_with(g, h.values(), closure);
    let x = dy.into_iter().map(|v| -v).collect();
    ComplexVectorField::from_components(g, x, dx).expect("same grid")
}

/// Scalar curl `∇×F = ∂F²/∂x - ∂F¹/∂y`.
pub fn scalar_curl(f: &ComplexVectorField) -> ComplexScalarField {
    let g = f.grid();
    let d2 = d_dx(g, f.y());
    let d1 = d_dy(g, f.x());
    let values = d2.iter().zip(&d1).map(|(a, b)| a - b).collect();
    ComplexScalarField::from_values(g, values).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n).unwrap()
    }

    fn max_err(a: &[C64], f: impl Fn(usize) -> C64) -> f64 {
        a.iter()
            .enumerate()
            .map(|(k, v)| (v - f(k)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn curl_of_linear_fields() {
        let g = grid(8);
        let hx = ComplexScalarField::from_fn(g, |x, _| c(x));
        let v = vector_curl(&hx);
        assert!(max_err(v.x(), |_| c(0.0)) < 1e-12);
        assert!(max_err(v.y(), |_| c(1.0)) < 1e-12);
        let hy = ComplexScalarField::from_fn(g, |_, y| c(y));
        let v = vector_curl(&hy);
        assert!(max_err(v.x(), |_| c(-1.0)) < 1e-12);
        assert!(max_err(v.y(), |_| c(0.0)) < 1e-12);
    }

    #[test]
    fn curl_of_bilinear_at_point() {
        let g = grid(8);
        let h = ComplexScalarField::from_fn(g, |x, y| c(x * y));
        let v = vector_curl(&h);
        // (0.5, 0.25) is node (6, 5) for N = 8.
        let idx = g.index(6, 5);
        assert_eq!(g.node(6, 5), (0.5, 0.25));
        assert!((v.x()[idx] - c(-0.5)).norm() < 1e-13);
        assert!((v.y()[idx] - c(0.25)).norm() < 1e-13);
    }

    #[test]
    fn scalar_curl_examples() {
        let g = grid(8);
        let f = ComplexVectorField::from_fn(g, |_, y| (c(y), c(0.0)));
        assert!(max_err(scalar_curl(&f).values(), |_| c(-1.0)) < 1e-12);
        let f = ComplexVectorField::from_fn(g, |x, _| (c(0.0), c(x)));
        assert!(max_err(scalar_curl(&f).values(), |_| c(1.0)) < 1e-12);
    }

    #[test]
    fn scalar_curl_of_vector_curl_is_laplacian() {
        // ∇×(∇×H) = ΔH; x² + y² has Laplacian 4 and the stencils are exact
        // on quadratics, boundary ring included.
        let g = grid(10);
        let h = ComplexScalarField::from_fn(g, |x, y| c(x * x + y * y));
        let lap = scalar_curl(&vector_curl(&h));
        assert!(max_err(lap.values(), |_| c(4.0)) < 1e-11);
    }

    #[test]
    fn second_derivatives_exact_on_cubics() {
        let g = grid(8);
        let f = ComplexScalarField::from_fn(g, |x, y| c(x * x * x + 2.0 * x * x * y - y * y * y));
        let node = |k: usize| {
            let (i, j) = g.ij(k);
            g.node(i, j)
        };
        for closure in [Closure::SecondOrder, Closure::ThirdOrder] {
            let fxx = d2_dx2(g, f.values(), closure);
            let fyy = d2_dy2(g, f.values(), closure);
            let fxy = d2_dxdy(g, f.values(), closure);
            assert!(max_err(&fxx, |k| {
                let (x, y) = node(k);
                c(6.0 * x + 4.0 * y)
            }) < 1e-10);
            assert!(max_err(&fyy, |k| c(-6.0 * node(k).1)) < 1e-10);
            assert!(max_err(&fxy, |k| c(4.0 * node(k).0)) < 1e-10);
        }
    }

    #[test]
    fn third_order_closure_exact_on_cubics() {
        let g = grid(8);
        let f = ComplexScalarField::from_fn(g, |x, _| c(x * x * x));
        let d = d_dx_with(g, f.values(), Closure::ThirdOrder);
        for k in 0..g.len() {
            let (i, _) = g.ij(k);
            if i == 0 || i == g.intervals() {
                let x = g.coord(i);
                assert!((d[k] - c(3.0 * x * x)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn local_fit_exact_on_its_degree() {
        let g = grid(20);
        let f = ComplexScalarField::from_fn(g, |x, y| {
            C64::new(x.powi(4) - 2.0 * x * x * y * y + y.powi(3), x * y * y * y)
        });
        let jet = LocalFit::with_degree(3, 4).unwrap().jet(g, f.values()).unwrap();
        for k in 0..g.len() {
            let (i, j) = g.ij(k);
            let (x, y) = g.node(i, j);
            let want = [
                C64::new(4.0 * x.powi(3) - 4.0 * x * y * y, y.powi(3)),
                C64::new(-4.0 * x * x * y + 3.0 * y * y, 3.0 * x * y * y),
                C64::new(12.0 * x * x - 4.0 * y * y, 0.0),
                C64::new(-8.0 * x * y, 3.0 * y * y),
                C64::new(-4.0 * x * x + 6.0 * y, 6.0 * x * y),
            ];
            let got = [jet.dx[k], jet.dy[k], jet.dxx[k], jet.dxy[k], jet.dyy[k]];
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9, "{a} vs {b} at ({x}, {y})");
            }
        }
    }

    #[test]
    fn local_fit_rejects_bad_shapes() {
        assert!(LocalFit::new(1).is_none());
        assert!(LocalFit::with_degree(2, 5).is_none());
        let fit = LocalFit::new(5).unwrap();
        let g = grid(8);
        assert!(fit.jet(g, &vec![C64::new(0.0, 0.0); g.len()]).is_none());
    }

    #[test]
    fn gradient_examples() {
        let g = grid(8);
        let f = ComplexScalarField::from_fn(g, |_, _| C64::new(2.0, -1.0));
        let d = gradient(&f);
        assert!(max_err(d.x(), |_| c(0.0)) < 1e-12);
        assert!(max_err(d.y(), |_| c(0.0)) < 1e-12);
        let f = ComplexScalarField::from_fn(g, |x, y| c(x + 2.0 * y));
        let d = gradient(&f);
        assert!(max_err(d.x(), |_| c(1.0)) < 1e-12);
        assert!(max_err(d.y(), |_| c(2.0)) < 1e-12);
    }

    #[test]
    fn gradient_of_sine_at_origin() {
        for n in [20usize, 40, 80] {
            let g = grid(n);
            let h = g.spacing();
            let f = ComplexScalarField::from_fn(g, |x, _| c((PI * x).sin()));
            let d = gradient(&f);
            let idx = g.index(n / 2, n / 2);
            // Centered-difference remainder: h²/6 · |f'''| = h² π³ / 6.
            let bound = h * h * PI.powi(3) / 6.0 * 1.0001;
            assert!((d.x()[idx] - c(PI)).norm() <= bound);
            assert!(d.y()[idx].norm() < 1e-12);
        }
    }
}
