use admittivity_core::cgo::{cgo_field, CgoBasis};
use admittivity_core::forward::{assemble_operator, solve_maxwell, BoundaryTrace};
use admittivity_core::phantom::{simulation1, simulation2};
use admittivity_core::{ComplexScalarField, Grid2D, PhysicsParams, SymTensorField, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn interior(grid: Grid2D) -> impl Iterator<Item = usize> {
    (0..grid.len()).filter(move |&k| {
        let (i, j) = grid.ij(k);
        !grid.is_boundary(i, j)
    })
}

#[test]
fn second_order_part_annihilates_constants() {
    let params = PhysicsParams::new(1.3, 0.7).unwrap();
    let grid = Grid2D::new(20).unwrap();
    for gamma in [simulation1(grid, 1.3), simulation2(grid, 1.3)] {
        let op = assemble_operator(&gamma, &params).unwrap();
        let m = op.matrix();
        for k in interior(grid) {
            let sum: C64 = m.row(k).map(|(_, v)| v).sum();
            let scale: f64 = m.row(k).map(|(_, v)| v.norm()).sum();
            assert!((sum - params.i_omega_mu()).norm() <= 1e-13 * scale, "row {k}");
        }
    }
}

#[test]
fn off_diagonal_tensor_fills_corner_entries() {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(8).unwrap();
    let gamma = SymTensorField::constant(grid, [c(2.0, 1.0), c(0.4, 0.1), c(1.5, 1.2)]);
    let op = assemble_operator(&gamma, &params).unwrap();
    let n = grid.n();
    let k = grid.index(4, 4);
    for corner in [k + n + 1, k + n - 1, k - n + 1, k - n - 1] {
        assert!(op.matrix().get(k, corner).norm() > 0.0);
    }
}

#[test]
fn interior_block_is_complex_symmetric() {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(16).unwrap();
    let real_sigma = SymTensorField::from_fn(grid, |x, y| {
        [c(2.0 + 0.5 * x, 0.0), c(0.3 * (x * y).sin(), 0.0), c(1.5 + 0.2 * y * y, 0.0)]
    });
    for gamma in [real_sigma, simulation1(grid, 1.0)] {
        let op = assemble_operator(&gamma, &params).unwrap();
        let m = op.matrix();
        for r in interior(grid) {
            for (col, v) in m.row(r) {
                let (i, j) = grid.ij(col);
                if grid.is_boundary(i, j) || col == r {
                    continue;
                }
                assert!((v - m.get(col, r)).norm() <= 1e-12 * v.norm().max(1.0), "({r}, {col})");
            }
        }
    }
}

/// Max interior error of the forward solve against `exp(x·Q e₁)` for
/// `γ = (1 + i) I`, i.e. `σ = ε = I` at `ω = 1`.
fn cgo_error(intervals: usize) -> f64 {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(intervals).unwrap();
    let one = c(1.0, 1.0);
    let zero = c(0.0, 0.0);
    let basis = CgoBasis::for_tensor([one, zero, one], &params, &[]).unwrap();
    let exact = cgo_field(&basis, 0, grid);
    let gamma = SymTensorField::constant(grid, [one, zero, one]);
    let sol = solve_maxwell(&gamma, &params, &BoundaryTrace::from_field(&exact)).unwrap();
    interior(grid)
        .map(|k| (sol.h.values()[k] - exact.values()[k]).norm())
        .fold(0.0, f64::max)
}

#[test]
fn cgo_solution_converges_at_second_order() {
    let (e40, e80) = (cgo_error(40), cgo_error(80));
    assert!(e80 <= 1.0 * 0.025f64.powi(2), "error {e80}");
    let ratio = e40 / e80;
    assert!((ratio - 4.0).abs() <= 0.2 * 4.0, "ratio {ratio}");
}

#[test]
fn electric_field_satisfies_constitutive_law() {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(16).unwrap();
    let gamma = simulation1(grid, 1.0);
    let g = BoundaryTrace::from_fn(grid, |x, y| c(1.0 + x, 0.5 * y));
    let sol = solve_maxwell(&gamma, &params, &g).unwrap();
    let curl = admittivity_core::diff::vector_curl(&sol.h);
    for k in interior(grid) {
        let t = gamma.at(k);
        let [ex, ey] = sol.e.at(k);
        let [cx, cy] = curl.at(k);
        assert!((t[0] * ex + t[1] * ey - cx).norm() < 1e-10);
        assert!((t[1] * ex + t[2] * ey - cy).norm() < 1e-10);
    }
}

#[test]
fn residual_meets_contract() {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(24).unwrap();
    let gamma = simulation2(grid, 1.0);
    let g = BoundaryTrace::from_fn(grid, |x, y| c((x - y).exp(), x * y));
    let sol = solve_maxwell(&gamma, &params, &g).unwrap();
    let op = assemble_operator(&gamma, &params).unwrap();
    let lh = op.apply(&sol.h).unwrap();
    let b = op.rhs(&g).unwrap();
    let bf = ComplexScalarField::from_values(grid, b).unwrap();
    let res = lh.sub(&bf).unwrap();
    let nr: f64 = res.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = bf.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(nr <= 1e-10 * nb);
}
