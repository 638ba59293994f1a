mod common;

use admittivity_core::cgo::{analytic_m_tilde, rotate_to_curl_form};
use admittivity_core::linalg::mat2_vec;
use admittivity_core::recon::{
    build_m_system, compute_lambdas, reconstruct, MSystem, ReconOptions,
};
use admittivity_core::{ComplexScalarField, Grid2D, PhysicsParams, C64};

fn msystem(intervals: usize) -> (Grid2D, MSystem) {
    let grid = Grid2D::new(intervals).unwrap();
    let fields = common::fields(&common::default_basis(), grid);
    let (lambdas, mask) = compute_lambdas(&fields, 0.0).unwrap();
    let msys = build_m_system(&fields, &lambdas, &mask, &PhysicsParams::default()).unwrap();
    (grid, msys)
}

/// `max |γ⁻¹ : M_j - r_j| / (‖row_j‖ ‖γ⁻¹‖) / h²` over all nodes and `j`.
fn consistency_constant(intervals: usize) -> f64 {
    let (grid, msys) = msystem(intervals);
    let g = common::gamma_inv();
    let gn = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        for j in 0..msys.equations() {
            let row = msys.row(j, k);
            let rn = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let res = (row[0] * g[0] + row[1] * g[1] + row[2] * g[2] - msys.r[j][k]).norm();
            worst = worst.max(res / (rn * gn));
        }
    }
    worst / (grid.spacing() * grid.spacing())
}

#[test]
fn exact_data_consistency_is_second_order() {
    let (c80, c160) = (consistency_constant(80), consistency_constant(160));
    assert!(c80 < 1.0 && c160 < 1.0);
    assert!((c80 / c160 - 1.0).abs() < 0.1, "{c80} vs {c160}");
}

#[test]
fn lambdas_match_closed_form() {
    let theta = 0.7f64;
    let basis = common::basis(&[theta, 2.0, 2.5]);
    let (c, s) = (theta.cos(), theta.sin());
    let mut errs = Vec::new();
    for n in [40, 80] {
        let grid = Grid2D::new(n).unwrap();
        let (l, mask) = compute_lambdas(&common::fields(&basis, grid), 0.0).unwrap();
        assert_eq!(mask.count(), grid.len());
        let q = basis.q();
        let u3 = basis.directions()[2];
        let w31 = mat2_vec(q, [u3[0] - 1.0, u3[1]]);
        let w32 = mat2_vec(q, [u3[0], u3[1] - 1.0]);
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let (x, y) = grid.node(i, j);
            let l1 = (w31[0] * x + w31[1] * y).exp() * c;
            let l2 = (w32[0] * x + w32[1] * y).exp() * s;
            worst = worst
                .max((l.lambda[0][0].values()[k] - l1).norm() / l1.norm())
                .max((l.lambda[0][1].values()[k] - l2).norm() / l2.norm());
        }
        errs.push(worst);
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

/// Max over nodes of `|M_j - J M̃_j Jᵀ| / |M̃_j|`, interior nodes only.
fn m_tilde_mismatch(intervals: usize) -> f64 {
    let (grid, msys) = msystem(intervals);
    let basis = common::default_basis();
    let mut worst = 0.0f64;
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        let (x, y) = grid.node(i, j);
        for eq in 0..3 {
            let exact = rotate_to_curl_form(analytic_m_tilde(&basis, eq, x, y).unwrap());
            let got = msys.m[eq][k];
            let num: f64 = (0..3).map(|c| (got[c] - exact[c]).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = exact.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(num / den);
        }
    }
    worst
}

#[test]
fn assembled_m_matches_closed_form() {
    let (e40, e80) = (m_tilde_mismatch(40), m_tilde_mismatch(80));
    assert!(e80 < 10.0 * 0.025 * 0.025, "{e80}");
    assert!(e40 / e80 > 3.0, "{e40} {e80}");
}

fn opts() -> ReconOptions {
    ReconOptions {
        c0_rel: 0.0,
        ..ReconOptions::default()
    }
}

#[test]
fn reconstruction_is_local() {
    let grid = Grid2D::new(24).unwrap();
    let fields = common::fields(&common::default_basis(), grid);
    let params = PhysicsParams::default();
    let full = reconstruct(&fields, &params, &opts()).unwrap();
    let (ci, cj) = (11usize, 13usize);
    let centre = grid.index(ci, cj);
    let scrambled: Vec<ComplexScalarField> = fields
        .iter()
        .enumerate()
        .map(|(f, h)| {
            let mut out = h.clone();
            for (k, v) in out.values_mut().iter_mut().enumerate() {
                let (i, j) = grid.ij(k);
                if i.abs_diff(ci) > 2 || j.abs_diff(cj) > 2 {
                    *v = *v * C64::new(1.0 + 0.01 * ((k * 7 + f) % 13) as f64, 0.02);
                }
            }
            out
        })
        .collect();
    let local = reconstruct(&scrambled, &params, &opts()).unwrap();
    assert_eq!(local.coefficients.gamma.at(centre), full.coefficients.gamma.at(centre));
    // Something outside the window must have changed.
    assert_ne!(local.coefficients.gamma.at(0), full.coefficients.gamma.at(0));
}

#[test]
fn basis_change_leaves_gamma_unchanged() {
    let grid = Grid2D::new(32).unwrap();
    let fields = common::fields(&common::default_basis(), grid);
    let params = PhysicsParams::default();
    let base = reconstruct(&fields, &params, &opts()).unwrap();
    let mix = [
        [C64::new(1.0, 0.2), C64::new(0.5, 0.0), C64::new(0.0, -0.3)],
        [C64::new(-0.4, 0.0), C64::new(1.0, 0.0), C64::new(0.6, 0.1)],
        [C64::new(0.2, 0.0), C64::new(0.0, 0.4), C64::new(1.2, 0.0)],
    ];
    let mut mixed = fields[..2].to_vec();
    for row in &mix {
        let mut acc = ComplexScalarField::zeros(grid);
        for (w, h) in row.iter().zip(&fields[2..]) {
            acc = acc.add(&h.scale(*w)).unwrap();
        }
        mixed.push(acc);
    }
    let other = reconstruct(&mixed, &params, &opts()).unwrap();
    for k in 0..grid.len() {
        let (a, b) = (base.coefficients.gamma.at(k), other.coefficients.gamma.at(k));
        for c in 0..3 {
            assert!((a[c] - b[c]).norm() <= 1e-8 * a[c].norm().max(1.0), "node {k}");
        }
    }
}

#[test]
fn output_tensors_are_symmetric_by_storage() {
    let grid = Grid2D::new(16).unwrap();
    let r = reconstruct(&common::fields(&common::default_basis(), grid), &PhysicsParams::default(), &opts()).unwrap();
    let six = r.coefficients.six();
    assert_eq!(six[1], r.coefficients.sigma.component(1));
    assert_eq!(six[4], r.coefficients.epsilon.component(1));
}

#[test]
fn extra_measurements_append_rows() {
    let grid = Grid2D::new(24).unwrap();
    let basis = common::basis(&[std::f64::consts::FRAC_PI_4, 1.0, 2.0, 2.6]);
    let fields = common::fields(&basis, grid);
    assert_eq!(fields.len(), 6);
    let r = reconstruct(&fields, &PhysicsParams::default(), &opts()).unwrap();
    assert_eq!(r.msys.equations(), 4);
    let g = common::GAMMA;
    let mid = grid.index(12, 12);
    for c in 0..3 {
        assert!((r.coefficients.gamma.at(mid)[c] - g[c]).norm() < 1e-2 * g[c].norm());
    }
}
