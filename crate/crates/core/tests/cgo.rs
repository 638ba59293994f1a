mod common;

use admittivity_core::cgo::{cgo_field, choose_illuminations};
use admittivity_core::forward::assemble_operator;
use admittivity_core::recon::determinant_map;
use admittivity_core::{Grid2D, PhysicsParams, SymTensorField, C64};

#[test]
fn determinant_condition_holds_at_every_node() {
    let grid = Grid2D::new(80).unwrap();
    let basis = common::default_basis();
    let det = determinant_map(&cgo_field(&basis, 0, grid), &cgo_field(&basis, 1, grid)).unwrap();
    // |det(J∇H₁, J∇H₂)| = |det Q| |H₁ H₂| exactly; the stencils stay close.
    let q = basis.q();
    let det_q = (q[0][0] * q[1][1] - q[0][1] * q[1][0]).norm();
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        let (x, y) = grid.node(i, j);
        let exact = det_q * (basis.value_at(0, x, y) * basis.value_at(1, x, y)).norm();
        assert!(det.values()[k] > 0.0);
        assert!((det.values()[k] - exact).abs() <= 1e-2 * exact);
    }
}

/// Max interior `|L H|` of the sampled CGO field under the assembled
/// operator, relative to the largest diagonal entry times `|H|`.
fn pde_residual(intervals: usize) -> f64 {
    let params = PhysicsParams::default();
    let grid = Grid2D::new(intervals).unwrap();
    let basis = common::default_basis();
    let gamma = SymTensorField::constant(grid, common::GAMMA);
    let op = assemble_operator(&gamma, &params).unwrap();
    let mut worst = 0.0f64;
    for k in 0..basis.directions().len() {
        let h = cgo_field(&basis, k, grid);
        let lh = op.apply(&h).unwrap();
        for idx in 0..grid.len() {
            let (i, j) = grid.ij(idx);
            if grid.is_boundary(i, j) {
                continue;
            }
            worst = worst.max(lh.values()[idx].norm() / h.values()[idx].norm());
        }
    }
    worst
}

#[test]
fn cgo_fields_are_consistent_with_the_discrete_operator() {
    let (r40, r80) = (pde_residual(40), pde_residual(80));
    assert!(r80 <= 1.0 * 0.025 * 0.025, "{r80}");
    assert!((r40 / r80 - 4.0).abs() < 0.2 * 4.0, "{}", r40 / r80);
}

#[test]
fn identity_reference_passes_without_rotation() {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let ill = choose_illuminations([one, zero, one], &PhysicsParams::default()).unwrap();
    assert_eq!(ill.attempts, 0);
    assert_eq!(ill.sigma_table.len(), 21 * 21);
    assert!(ill.sigma_table.iter().all(|&s| s > 0.0));
}
