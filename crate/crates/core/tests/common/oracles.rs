//! Independent reference solvers for the regularizers.

/// Exact minimizer of `½‖f - g‖² + λ Σ|f_{i+1} - f_i|` by the taut-string
/// construction: `f` is the slope of the shortest path through the tube
/// `[R - λ, R + λ]` around the cumulative sum `R` of `g`, pinned at both ends.
pub fn taut_string(g: &[f64], lambda: f64) -> Vec<f64> {
    let n = g.len();
    let mut r = vec![0.0; n + 1];
    for i in 0..n {
        r[i + 1] = r[i] + g[i];
    }
    let lo: Vec<f64> = (0..=n).map(|k| if k == 0 || k == n { r[k] } else { r[k] - lambda }).collect();
    let hi: Vec<f64> = (0..=n).map(|k| if k == 0 || k == n { r[k] } else { r[k] + lambda }).collect();
    let mut f = vec![0.0; n];
    let (mut k0, mut y0) = (0usize, 0.0f64);
    'outer: while k0 < n {
        let (mut s_lo, mut k_lo) = (f64::NEG_INFINITY, k0);
        let (mut s_hi, mut k_hi) = (f64::INFINITY, k0);
        for k in k0 + 1..=n {
            let d = (k - k0) as f64;
            let (a, b) = ((lo[k] - y0) / d, (hi[k] - y0) / d);
            if a > s_hi {
                // The lower wall passes above the tightest upper slope: bend down at k_hi.
                f[k0..k_hi].fill(s_hi);
                y0 = hi[k_hi];
                k0 = k_hi;
                continue 'outer;
            }
            if b < s_lo {
                f[k0..k_lo].fill(s_lo);
                y0 = lo[k_lo];
                k0 = k_lo;
                continue 'outer;
            }
            if a >= s_lo {
                s_lo = a;
                k_lo = k;
            }
            if b <= s_hi {
                s_hi = b;
                k_hi = k;
            }
        }
        f[k0..n].fill((r[n] - y0) / (n - k0) as f64);
        break;
    }
    f
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= m * a[col][c];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Violation of the 1-D TV optimality conditions `g - f = Dᵀp`, `|p| ≤ λ`,
/// `p = λ sign(Df)` wherever `Df ≠ 0`, with `(Df)_i = f_{i+1} - f_i`.
pub fn tv1d_certificate_gap(g: &[f64], f: &[f64], lambda: f64) -> f64 {
    let n = g.len();
    // (Dᵀp)_i = p_{i-1} - p_i, so p_i is minus the cumulative residual.
    let mut p = vec![0.0; n - 1];
    let mut acc = 0.0;
    for i in 0..n - 1 {
        acc += g[i] - f[i];
        p[i] = -acc;
    }
    let mut gap = (acc + g[n - 1] - f[n - 1]).abs();
    for i in 0..n - 1 {
        gap = gap.max((p[i].abs() - lambda).max(0.0));
        let d = f[i + 1] - f[i];
        if d.abs() > 1e-9 {
            gap = gap.max((p[i] - lambda * d.signum()).abs());
        }
    }
    gap
}
