mod common;

use admittivity_core::regularize::{
    forward_gradient, split_bregman_tv, tikhonov, total_variation, tv_objective, RegConfig,
};
use admittivity_core::{ComplexScalarField, Grid2D, C64};
use common::oracles::{dense_solve, taut_string, tv1d_certificate_gap};

/// Dense `Γ` (forward differences over `h`, zero rows on the last line of
/// each direction), built straight from its definition.
fn dense_gamma(grid: Grid2D) -> Vec<Vec<f64>> {
    let n = grid.n();
    let len = grid.len();
    let h = grid.spacing();
    let mut rows = Vec::new();
    for dir in 0..2 {
        for j in 0..n {
            for i in 0..n {
                let mut row = vec![0.0; len];
                let k = j * n + i;
                let last = if dir == 0 { i + 1 == n } else { j + 1 == n };
                if !last {
                    let next = if dir == 0 { k + 1 } else { k + n };
                    row[k] = -1.0 / h;
                    row[next] = 1.0 / h;
                }
                rows.push(row);
            }
        }
    }
    rows
}

#[test]
fn tikhonov_matches_dense_solve() {
    let grid = Grid2D::new(8).unwrap();
    let len = grid.len();
    let rho = 0.1;
    let centre = grid.index(4, 4);
    let f = ComplexScalarField::from_fn(grid, |x, y| C64::new(if x == 0.0 && y == 0.0 { 1.0 } else { 0.0 }, 0.0));
    assert_eq!(f.values()[centre], C64::new(1.0, 0.0));
    let g = dense_gamma(grid);
    let mut a = vec![vec![0.0; len]; len];
    for r in 0..len {
        a[r][r] = 1.0;
        for c in 0..len {
            a[r][c] += rho * g.iter().map(|row| row[r] * row[c]).sum::<f64>();
        }
    }
    let b: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let want = dense_solve(a, b);
    let got = tikhonov(&f, rho).unwrap();
    for k in 0..len {
        assert!((got.values()[k].re - want[k]).abs() <= 1e-10, "node {k}");
        assert_eq!(got.values()[k].im, 0.0);
    }
}

#[test]
fn tikhonov_preserves_mean_and_constants() {
    let grid = Grid2D::new(30).unwrap();
    let f = ComplexScalarField::from_fn(grid, |x, y| C64::new((3.0 * x).sin() + y * y, x - (2.0 * y).cos()));
    let mean = |f: &ComplexScalarField| f.values().iter().sum::<C64>() / f.values().len() as f64;
    for rho in [1e-4, 1e-2, 1.0] {
        let out = tikhonov(&f, rho).unwrap();
        assert!((mean(&out) - mean(&f)).norm() <= 1e-8);
    }
    let c = ComplexScalarField::from_fn(grid, |_, _| C64::new(1.7, -0.2));
    let out = tikhonov(&c, 0.5).unwrap();
    assert!(out.values().iter().all(|v| (v - C64::new(1.7, -0.2)).norm() < 1e-12));
}

fn step_row(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let base = if i < n / 3 { 1.0 } else if i < 2 * n / 3 { 2.5 } else { 0.5 };
            base + 0.1 * ((i * 7919) % 23) as f64 / 23.0 - 0.05
        })
        .collect()
}

#[test]
fn taut_string_satisfies_optimality() {
    let g = step_row(81);
    for lambda in [0.01, 0.2, 1.0, 50.0] {
        let f = taut_string(&g, lambda);
        assert!(tv1d_certificate_gap(&g, &f, lambda) < 1e-9, "lambda {lambda}");
    }
}

#[test]
fn split_bregman_matches_taut_string_on_rows() {
    let grid = Grid2D::new(80).unwrap();
    let n = grid.n();
    let row = step_row(n);
    // Identical rows: the y-differences vanish and each row solves the 1-D
    // problem with weight ρ/h.
    let f = ComplexScalarField::from_values(grid, (0..grid.len()).map(|k| C64::new(row[k % n], 0.0)).collect()).unwrap();
    let rho = 5e-3;
    let want = taut_string(&row, rho / grid.spacing());
    let out = split_bregman_tv(&f, &RegConfig::tv(rho)).unwrap();
    let worst = (0..grid.len())
        .map(|k| (out.field.values()[k].re - want[k % n]).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "max deviation {worst}");
}

fn noisy_square(grid: Grid2D) -> ComplexScalarField {
    ComplexScalarField::from_fn(grid, |x, y| {
        let inside = x.abs() < 0.4 && y.abs() < 0.5;
        let wobble = 0.1 * (37.0 * x).sin() * (53.0 * y).cos();
        C64::new(if inside { 2.0 } else { 1.0 } + wobble, 0.5 * wobble)
    })
}

#[test]
fn both_methods_contract_total_variation() {
    let grid = Grid2D::new(40).unwrap();
    let f = noisy_square(grid);
    let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = f.values().iter().map(|v| v.im).collect();
    let tv = |g: &ComplexScalarField| {
        let r: Vec<f64> = g.values().iter().map(|v| v.re).collect();
        let i: Vec<f64> = g.values().iter().map(|v| v.im).collect();
        (total_variation(grid, &r, false), total_variation(grid, &i, false))
    };
    let before = (total_variation(grid, &re, false), total_variation(grid, &im, false));
    for out in [tikhonov(&f, 1e-3).unwrap(), split_bregman_tv(&f, &RegConfig::tv(5e-3)).unwrap().field] {
        let after = tv(&out);
        assert!(after.0 <= before.0 && after.1 <= before.1);
    }
}

#[test]
fn split_bregman_returns_no_worse_than_its_input() {
    let grid = Grid2D::new(40).unwrap();
    let f = noisy_square(grid);
    let cfg = RegConfig::tv(5e-3);
    let out = split_bregman_tv(&f, &cfg).unwrap();
    let g: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let r: Vec<f64> = out.field.values().iter().map(|v| v.re).collect();
    assert!(tv_objective(grid, &r, &g, cfg.rho, false) <= tv_objective(grid, &g, &g, cfg.rho, false));
    assert!(out.converged);
    let min = out.objective_history.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(tv_objective(grid, &r, &g, cfg.rho, false), min);
}

#[test]
fn gradient_has_zero_last_rows() {
    let grid = Grid2D::new(6).unwrap();
    let n = grid.n();
    let f: Vec<f64> = (0..grid.len()).map(|k| (k * k) as f64).collect();
    let (gx, gy) = forward_gradient(grid, &f);
    for j in 0..n {
        assert_eq!(gx[j * n + n - 1], 0.0);
        assert_eq!(gy[(n - 1) * n + j], 0.0);
    }
}
