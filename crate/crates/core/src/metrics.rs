//! Error measures against ground truth.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::grid::{AdmissibleMask, ComplexScalarField};
use crate::{Error, Result, C64};

/// `‖recon - truth‖₂ / ‖truth‖₂` over the masked nodes (all nodes when
/// `mask` is `None`). The uniform `h²` quadrature weight cancels.
pub fn relative_l2(
    recon: &ComplexScalarField,
    truth: &ComplexScalarField,
    mask: Option<&AdmissibleMask>,
) -> Result<f64> {
    if recon.grid() != truth.grid() || mask.is_some_and(|m| m.grid() != truth.grid()) {
        return Err(Error::GridMismatch);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (k, (r, t)) in recon.values().iter().zip(truth.values()).enumerate() {
        if mask.is_some_and(|m| !m.is_admissible(k)) {
            continue;
        }
        num += (r - t).norm_sqr();
        den += t.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Node values along the grid row `y = const` as `(x, value)` pairs.
pub fn cross_section(field: &ComplexScalarField, y: f64) -> Result<Vec<(f64, C64)>> {
    let grid = field.grid();
    let j = grid.line_of(y).ok_or(Error::OffGrid(y))?;
    Ok((0..grid.n()).map(|i| (grid.coord(i), field.at(i, j))).collect())
}

/// Nodes within `radius` grid steps (Chebyshev distance) of a jump of
/// `truth`, i.e. of a pair of neighbouring nodes with different values.
pub fn discontinuity_band(truth: &ComplexScalarField, radius: usize) -> Vec<bool> {
    let grid = truth.grid();
    let n = grid.n();
    let mut edge = alloc::vec![false; grid.len()];
    for j in 0..n {
        for i in 0..n {
            let v = truth.at(i, j);
            if i + 1 < n && truth.at(i + 1, j) != v {
                edge[grid.index(i, j)] = true;
                edge[grid.index(i + 1, j)] = true;
            }
            if j + 1 < n && truth.at(i, j + 1) != v {
                edge[grid.index(i, j)] = true;
                edge[grid.index(i, j + 1)] = true;
            }
        }
    }
    let mut band = alloc::vec![false; grid.len()];
    for j in 0..n {
        for i in 0..n {
            if !edge[grid.index(i, j)] {
                continue;
            }
            let (i0, i1) = (i.saturating_sub(radius), (i + radius).min(n - 1));
            let (j0, j1) = (j.saturating_sub(radius), (j + radius).min(n - 1));
            for jj in j0..=j1 {
                for ii in i0..=i1 {
                    band[grid.index(ii, jj)] = true;
                }
            }
        }
    }
    band
}

/// Fraction of the squared error `Σ|recon - truth|²` carried by the nodes
/// flagged in `region`.
pub fn error_mass_fraction(
    recon: &ComplexScalarField,
    truth: &ComplexScalarField,
    region: &[bool],
) -> Result<f64> {
    if recon.grid() != truth.grid() {
        return Err(Error::GridMismatch);
    }
    let (mut inside, mut total) = (0.0, 0.0);
    for (k, (r, t)) in recon.values().iter().zip(truth.values()).enumerate() {
        let e = (r - t).norm_sqr();
        total += e;
        if region[k] {
            inside += e;
        }
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(inside / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn field(g: Grid2D) -> ComplexScalarField {
        ComplexScalarField::from_fn(g, |x, y| C64::new(2.0 + x * y, 0.3 * x))
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let t = field(Grid2D::new(8).unwrap());
        assert_eq!(relative_l2(&t, &t, None).unwrap(), 0.0);
    }

    #[test]
    fn scaled_field_error() {
        let t = field(Grid2D::new(8).unwrap());
        let r = t.scale(C64::new(1.1, 0.0));
        assert!((relative_l2(&r, &t, None).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn impulse_error_by_direct_summation() {
        let g = Grid2D::new(8).unwrap();
        let h = g.spacing();
        let t = field(g);
        let mut r = t.clone();
        r.values_mut()[g.index(3, 5)] += C64::new(h, 0.0);
        let norm: f64 = t.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((relative_l2(&r, &t, None).unwrap() - h / norm).abs() < 1e-15);
    }

    #[test]
    fn masked_error_ignores_excluded_nodes() {
        let g = Grid2D::new(4).unwrap();
        let t = field(g);
        let mut r = t.clone();
        r.values_mut()[0] += C64::new(5.0, 0.0);
        let mut keep = alloc::vec![true; g.len()];
        keep[0] = false;
        let mask = AdmissibleMask::new(g, keep, 0.0).unwrap();
        assert_eq!(relative_l2(&r, &t, Some(&mask)).unwrap(), 0.0);
    }

    #[test]
    fn zero_truth_rejected() {
        let z = ComplexScalarField::zeros(Grid2D::new(4).unwrap());
        assert_eq!(relative_l2(&z, &z, None), Err(Error::ZeroNorm));
    }

    #[test]
    fn cross_section_profile() {
        let g = Grid2D::new(80).unwrap();
        let c = ComplexScalarField::from_fn(g, |_, _| C64::new(4.0, 0.0));
        let p = cross_section(&c, -0.5).unwrap();
        assert_eq!(p.len(), 81);
        assert!(p.iter().all(|(_, v)| *v == C64::new(4.0, 0.0)));
        assert_eq!(cross_section(&c, 0.013), Err(Error::OffGrid(0.013)));
    }
}
