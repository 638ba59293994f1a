//! Small dense kernels and the sparse/banded solvers used by the forward
//! model and the regularizers.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense complex 2×2 matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn mat2_vec(a: &Mat2, v: [C64; 2]) -> [C64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn mat2_det(a: &Mat2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn frobenius(a: &Mat2) -> f64 {
    a.iter()
        .flatten()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn sym_to_mat2(t: [C64; 3]) -> Mat2 {
    [[t[0], t[1]], [t[1], t[2]]]
}

/// `(a11, a12, a22)` of a matrix assumed symmetric; the off-diagonal is
/// averaged.
pub fn mat2_to_sym(a: &Mat2) -> [C64; 3] {
    [a[0][0], (a[0][1] + a[1][0]) * 0.5, a[1][1]]
}

pub fn sym2_det(t: [C64; 3]) -> C64 {
    t[0] * t[2] - t[1] * t[1]
}

/// Inverse of a complex symmetric 2×2 matrix, `None` when `det == 0`.
pub fn sym2_inverse(t: [C64; 3]) -> Option<[C64; 3]> {
    let det = sym2_det(t);
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = det.inv();
    Some([t[2] * inv, -t[1] * inv, t[0] * inv])
}

/// Eigenpairs of a complex symmetric 2×2 matrix with eigenvectors normalized
/// by the bilinear form (`vᵀv = 1`), so that `A = V diag(λ) Vᵀ`.
///
/// Eigenvalues are ordered by descending real part, then descending
/// imaginary part. Fails when an eigenvector is (nearly) isotropic, i.e. the
/// matrix is not complex-orthogonally diagonalizable.
pub fn complex_symmetric_eigen(t: [C64; 3]) -> Result<([C64; 2], Mat2)> {
    let [a, b, c] = t;
    let scale = a.norm().max(b.norm()).max(c.norm());
    if scale == 0.0 {
        return Ok(([ZERO, ZERO], [[ONE, ZERO], [ZERO, ONE]]));
    }
    let half_tr = (a + c) * 0.5;
    let disc = ((a - c) * 0.5).powi(2) + b * b;
    let root = disc.sqrt();
    let mut lams = [half_tr + root, half_tr - root];
    if order_key(lams[1]) > order_key(lams[0]) {
        lams.swap(0, 1);
    }
    if b.norm() <= 1e-15 * scale {
        // Already diagonal: eigenvectors are the coordinate axes.
        let (l0, l1) = (a, c);
        let v = if order_key(l1) > order_key(l0) {
            ([l1, l0], [[ZERO, ONE], [ONE, ZERO]])
        } else {
            ([l0, l1], [[ONE, ZERO], [ZERO, ONE]])
        };
        return Ok(v);
    }
    let mut v = [[ZERO; 2]; 2];
    for (k, &l) in lams.iter().enumerate() {
        // Pick the better conditioned of the two null-vector candidates.
        let c1 = [b, l - a];
        let c2 = [l - c, b];
        let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
        let cand = if n1 >= n2 { c1 } else { c2 };
        let bil = cand[0] * cand[0] + cand[1] * cand[1];
        let herm = cand[0].norm_sqr() + cand[1].norm_sqr();
        let cond = herm / bil.norm();
        if !(cond.is_finite()) || cond > 1e8 {
            return Err(Error::DefectiveMatrix { condition: cond });
        }
        let s = bil.sqrt().inv();
        v[0][k] = cand[0] * s;
        v[1][k] = cand[1] * s;
    }
    Ok((lams, v))
}

fn order_key(z: C64) -> (OrdF64, OrdF64) {
    (OrdF64(z.re), OrdF64(z.im))
}

#[derive(PartialEq, PartialOrd, Clone, Copy)]
struct OrdF64(f64);

/// Symmetric square root `Q = V diag(√λ) Vᵀ` with principal branches, so
/// that `Q Qᵀ = A`.
pub fn complex_symmetric_sqrt(t: [C64; 3]) -> Result<Mat2> {
    let (lams, v) = complex_symmetric_eigen(t)?;
    let d = [lams[0].sqrt(), lams[1].sqrt()];
    let mut q = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            q[r][c] = v[r][0] * d[0] * v[c][0] + v[r][1] * d[1] * v[c][1];
        }
    }
    Ok(q)
}

/// Solves the dense real `n × n` system `a x = b` (row-major) by Gaussian
/// elimination with partial pivoting; `None` when a pivot vanishes.
pub fn solve_dense_real(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))?;
        if a[piv * n + col] == 0.0 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * b[c]).sum();
        b[r] = (b[r] - s) / a[r * n + r];
    }
    Some(b)
}

/// Result of a small dense least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeastSquares<const N: usize> {
    pub x: [C64; N],
    pub singular_values: [f64; N],
}

impl<const N: usize> LeastSquares<N> {
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }
}

/// Singular values and minimum-norm least-squares solution of the `m × N`
/// system `rows · x = rhs` by one-sided (Hestenes) Jacobi.
///
/// Directions whose singular value is below `rank_tol` are dropped from the
/// solution.
pub fn jacobi_least_squares<const N: usize>(
    rows: &[[C64; N]],
    rhs: &[C64],
    rank_tol: f64,
) -> LeastSquares<N> {
    let m = rows.len();
    // Column-major copy of the matrix.
    let mut cols: [Vec<C64>; N] = core::array::from_fn(|k| rows.iter().map(|r| r[k]).collect());
    let mut v = [[ZERO; N]; N];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = ONE;
    }
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..N {
            for q in p + 1..N {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Phase-align column q so the cross product is real.
                let phase = (gamma / g).conj();
                for z in cols[q].iter_mut() {
                    *z *= phase;
                }
                for row in v.iter_mut() {
                    row[q] *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..m {
                    let (a, b) = (cols[p][r], cols[q][r]);
                    cols[p][r] = a * cs - b * sn;
                    cols[q][r] = a * sn + b * cs;
                }
                for row in v.iter_mut() {
                    let (a, b) = (row[p], row[q]);
                    row[p] = a * cs - b * sn;
                    row[q] = a * sn + b * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [0.0; N];
    let mut x = [ZERO; N];
    for k in 0..N {
        let s2: f64 = cols[k].iter().map(|z| z.norm_sqr()).sum();
        sv[k] = s2.sqrt();
        if sv[k] <= rank_tol || s2 == 0.0 {
            continue;
        }
        let proj: C64 = cols[k].iter().zip(rhs).map(|(a, r)| a.conj() * r).sum::<C64>() / s2;
        for (i, row) in v.iter().enumerate() {
            x[i] += row[k] * proj;
        }
    }
    LeastSquares {
        x,
        singular_values: sv,
    }
}

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// entries within a row are sorted by column.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or(ZERO)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Lower and upper bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for (r, c, _) in self.triplets() {
            if c < r {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization of a banded matrix with partial pivoting.
///
/// Row `r` stores columns `r - kl ..= r + kl + ku`; pivoting can push fill up
/// to `kl + ku` above the diagonal.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    band: Vec<C64>,
    pivots: Vec<usize>,
    smallest_pivot: f64,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut band = vec![ZERO; n * width];
        for (r, c, v) in a.triplets() {
            band[r * width + (c + kl - r)] = v;
        }
        let mut pivots = vec![0usize; n];
        let mut smallest = f64::INFINITY;
        let mut largest = 0.0f64;
        let at = |r: usize, c: usize| r * width + (c + kl - r);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut pmax = band[at(k, k)].norm();
            for r in k + 1..=last_row {
                let v = band[at(r, k)].norm();
                if v > pmax {
                    pmax = v;
                    p = r;
                }
            }
            pivots[k] = p;
            smallest = smallest.min(pmax);
            largest = largest.max(pmax);
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::SingularSystem {
                    smallest_pivot: pmax,
                    residual: f64::INFINITY,
                });
            }
            if p != k {
                for c in k..=last_col {
                    band.swap(at(k, c), at(p, c));
                }
            }
            let inv = band[at(k, k)].inv();
            for r in k + 1..=last_row {
                let l = band[at(r, k)] * inv;
                if l == ZERO {
                    continue;
                }
                band[at(r, k)] = l;
                for c in k + 1..=last_col {
                    let u = band[at(k, c)];
                    band[at(r, c)] -= l * u;
                }
            }
        }
        if smallest <= 1e-14 * largest {
            return Err(Error::SingularSystem {
                smallest_pivot: smallest,
                residual: f64::INFINITY,
            });
        }
        Ok(Self {
            n,
            kl,
            width,
            band,
            pivots,
            smallest_pivot: smallest,
        })
    }

    pub fn smallest_pivot(&self) -> f64 {
        self.smallest_pivot
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let ku_ext = width - 1 - kl;
        let at = |r: usize, c: usize| r * width + (c + kl - r);
        let mut x = rhs.to_vec();
        // Forward: apply the row interchanges and unit-lower factor.
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            for r in k + 1..=(k + kl).min(n - 1) {
                x[r] -= self.band[at(r, k)] * xk;
            }
        }
        // Back substitution with the upper factor.
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + ku_ext).min(n - 1) {
                s -= self.band[at(k, c)] * x[c];
            }
            x[k] = s / self.band[at(k, k)];
        }
        x
    }
}

/// Direct banded solve followed by iterative refinement until the relative
/// residual is at most `tol`.
pub fn solve_sparse(a: &SparseMatrix, b: &[C64], tol: f64) -> Result<Vec<C64>> {
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![ZERO; b.len()]);
    }
    let lu = BandedLu::factor(a)?;
    let mut x = lu.solve(b);
    let mut res = 0.0;
    for _ in 0..5 {
        let ax = a.matvec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        res = norm2(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Err(Error::SingularSystem {
        smallest_pivot: lu.smallest_pivot(),
        residual: res,
    })
}

/// Jacobi-preconditioned conjugate gradients for a real symmetric positive
/// definite operator. Returns the iterate and final relative residual.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0.0));
    }
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    for _ in 0..max_iter {
        if res <= tol {
            return Ok((x, res));
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        Ok((x, res))
    } else {
        Err(Error::NotConverged {
            iterations: max_iter,
            residual: res,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sqrt_of_minus_i_identity() {
        let q = complex_symmetric_sqrt([c(0.0, -1.0), ZERO, c(0.0, -1.0)]).unwrap();
        let expected = C64::from_polar(1.0, -core::f64::consts::FRAC_PI_4);
        assert!((q[0][0] - expected).norm() < 1e-15);
        assert!((q[1][1] - expected).norm() < 1e-15);
        assert!(q[0][1].norm() < 1e-15 && q[1][0].norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_positive_diagonal() {
        let q = complex_symmetric_sqrt([c(4.0, 0.0), ZERO, c(9.0, 0.0)]).unwrap();
        assert!((q[0][0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((q[1][1] - c(3.0, 0.0)).norm() < 1e-15);
        assert!(q[0][1].norm() < 1e-15);
    }

    #[test]
    fn defective_symmetric_matrix_rejected() {
        // [[1, i], [i, -1]] is nilpotent with isotropic eigenvector (1, i).
        let err = complex_symmetric_sqrt([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
        assert!(matches!(err, Err(Error::DefectiveMatrix { .. })));
    }

    #[test]
    fn canonical_basis_least_squares() {
        let rows = [
            [c(1.0, 0.0), ZERO, ZERO],
            [ZERO, ZERO, c(1.0, 0.0)],
            [ZERO, c(2.0, 0.0), ZERO],
        ];
        let rhs = [c(1.0, 2.0), c(-3.0, 0.5), c(0.4, -0.2)];
        let ls = jacobi_least_squares(&rows, &rhs, 1e-14);
        assert!((ls.x[0] - rhs[0]).norm() < 1e-15);
        assert!((ls.x[2] - rhs[1]).norm() < 1e-15);
        assert!((ls.x[1] - rhs[2] / 2.0).norm() < 1e-15);
    }

    #[test]
    fn rank_deficiency_gives_zero_sigma() {
        let r = [c(1.0, 0.5), c(0.2, 0.0), c(-0.3, 1.0)];
        let rows = [r, r, [c(0.0, 1.0), ZERO, c(1.0, 0.0)]];
        let ls = jacobi_least_squares(&rows, &[ZERO; 3], 1e-12);
        assert!(ls.sigma_min() < 1e-14);
    }

    #[test]
    fn banded_lu_matches_dense() {
        // Tridiagonal complex system with a zero leading diagonal entry to
        // force a row interchange.
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            let d = if i == 0 { ZERO } else { c(4.0, 1.0) };
            t.push((i, i, d));
            if i + 1 < n {
                t.push((i, i + 1, c(1.0, -0.5)));
                t.push((i + 1, i, c(2.0, 0.3)));
            }
        }
        let a = SparseMatrix::from_triplets(n, t);
        let x_true: Vec<C64> = (0..n).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        let b = a.matvec(&x_true);
        let x = solve_sparse(&a, &b, 1e-13).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))]);
        let err = solve_sparse(&a, &[c(1.0, 0.0), c(1.0, 0.0)], 1e-10).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }));
    }

    #[test]
    fn cg_solves_spd() {
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = 4.0 * x[0] + x[1];
            y[1] = x[0] + 3.0 * x[1];
        };
        let (x, res) =
            conjugate_gradient(apply, &[4.0, 3.0], &[1.0, 2.0], None, 1e-14, 50).unwrap();
        assert!(res <= 1e-14);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }
}
