//! Ground-truth admittivity fields.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::{Grid2D, SymTensorField};
use crate::C64;

/// One of the six real coefficients of `γ = [σ₁ σ₂; σ₂ σ₃] + iω[ε₁ ε₂; ε₂ ε₃]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Coefficient {
    Sigma1,
    Sigma2,
    Sigma3,
    Epsilon1,
    Epsilon2,
    Epsilon3,
}

impl Coefficient {
    pub const ALL: [Coefficient; 6] = [
        Coefficient::Sigma1,
        Coefficient::Sigma2,
        Coefficient::Sigma3,
        Coefficient::Epsilon1,
        Coefficient::Epsilon2,
        Coefficient::Epsilon3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::Sigma1 => "sigma1",
            Coefficient::Sigma2 => "sigma2",
            Coefficient::Sigma3 => "sigma3",
            Coefficient::Epsilon1 => "epsilon1",
            Coefficient::Epsilon2 => "epsilon2",
            Coefficient::Epsilon3 => "epsilon3",
        }
    }
}

/// Assembles `γ` from the six real coefficient values.
pub fn gamma_from_coefficients(c: [f64; 6], omega: f64) -> [C64; 3] {
    [
        C64::new(c[0], omega * c[3]),
        C64::new(c[1], omega * c[4]),
        C64::new(c[2], omega * c[5]),
    ]
}

/// Smooth coefficients of the first experiment at `(x, y)`.
pub fn simulation1_coefficients(x: f64, y: f64) -> [f64; 6] {
    let bump = |k: f64, cx: f64, cy: f64| (-k * ((x - cx).powi(2) + (y - cy).powi(2))).exp();
    let s = (PI * x).sin() * (PI * y).sin();
    [
        2.0 + s,
        0.5 * (2.0 * PI * x).sin(),
        1.8 + bump(15.0, 0.0, 0.0) + bump(15.0, 0.6, 0.5) - bump(15.0, -0.4, -0.6),
        2.0 - s,
        0.5 * (2.0 * PI * y).sin(),
        1.8 + bump(12.0, 0.0, 0.0) + bump(12.0, -0.6, 0.5) - bump(12.0, 0.4, -0.6),
    ]
}

/// Smooth phantom `γ = σ + iωε`.
pub fn simulation1(grid: Grid2D, omega: f64) -> SymTensorField {
    SymTensorField::from_fn(grid, |x, y| gamma_from_coefficients(simulation1_coefficients(x, y), omega))
}

/// Inclusion geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "shape", rename_all = "lowercase"))]
pub enum Shape {
    Disc { cx: f64, cy: f64, r: f64 },
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disc { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Rect { x0, x1, y0, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
        }
    }
}

/// A constant value of one coefficient over a shape.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Inclusion {
    pub coefficient: Coefficient,
    pub value: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub shape: Shape,
}

/// Piecewise-constant phantom: background values plus inclusions. Later
/// inclusions override earlier ones where they overlap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PiecewisePhantom {
    /// Background `σ₁ σ₂ σ₃ ε₁ ε₂ ε₃`.
    pub background: [f64; 6],
    pub inclusions: Vec<Inclusion>,
}

impl PiecewisePhantom {
    pub fn coefficients_at(&self, x: f64, y: f64) -> [f64; 6] {
        let mut c = self.background;
        for inc in &self.inclusions {
            if inc.shape.contains(x, y) {
                c[inc.coefficient.index()] = inc.value;
            }
        }
        c
    }

    pub fn sample(&self, grid: Grid2D, omega: f64) -> SymTensorField {
        SymTensorField::from_fn(grid, |x, y| gamma_from_coefficients(self.coefficients_at(x, y), omega))
    }
}

fn rect(coefficient: Coefficient, value: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> Inclusion {
    Inclusion {
        coefficient,
        value,
        shape: Shape::Rect { x0, x1, y0, y1 },
    }
}

/// Default piecewise-constant phantom of the second experiment: background
/// `diag(2, 2)` for both `σ` and `ε` and two squares of side 0.7 shared by
/// all six coefficients. Square edges sit halfway between nodes of the
/// `N = 80` grid. Mirrored in `configs/simulation2_phantom.toml`.
pub fn simulation2_default() -> PiecewisePhantom {
    use Coefficient::*;
    PiecewisePhantom {
        background: [2.0, 0.0, 2.0, 2.0, 0.0, 2.0],
        inclusions: alloc::vec![
            rect(Sigma1, 3.0, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Sigma1, 1.5, 0.1125, 0.8125, -0.8125, -0.1125),
            rect(Sigma2, 1.0, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Sigma2, -0.8, 0.1125, 0.8125, -0.8125, -0.1125),
            rect(Sigma3, 1.5, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Sigma3, 3.0, 0.1125, 0.8125, -0.8125, -0.1125),
            rect(Epsilon1, 2.8, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Epsilon1, 1.4, 0.1125, 0.8125, -0.8125, -0.1125),
            rect(Epsilon2, -0.8, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Epsilon2, 1.0, 0.1125, 0.8125, -0.8125, -0.1125),
            rect(Epsilon3, 1.4, -0.8125, -0.1125, 0.1125, 0.8125),
            rect(Epsilon3, 2.8, 0.1125, 0.8125, -0.8125, -0.1125),
        ],
    }
}

/// [`simulation2_default`] sampled on `grid`.
pub fn simulation2(grid: Grid2D, omega: f64) -> SymTensorField {
    simulation2_default().sample(grid, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::validate_ellipticity;

    #[test]
    fn simulation1_point_values() {
        let c = simulation1_coefficients(0.5, 0.5);
        assert!((c[0] - 3.0).abs() < 1e-15);
        for y in [-0.9, -0.2, 0.3, 0.77] {
            assert!((simulation1_coefficients(0.25, y)[1] - 0.5).abs() < 1e-15);
        }
        for x in [-0.9, -0.2, 0.3, 0.77] {
            assert!((simulation1_coefficients(x, 0.25)[4] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn simulation1_is_elliptic() {
        let g = Grid2D::new(80).unwrap();
        assert!(validate_ellipticity(&simulation1(g, 1.0), 1.0, 5.0).ok);
    }

    #[test]
    fn simulation2_background_and_inclusion() {
        let p = simulation2_default();
        assert_eq!(p.coefficients_at(-0.95, 0.95), [2.0, 0.0, 2.0, 2.0, 0.0, 2.0]);
        assert_eq!(p.coefficients_at(0.0, 0.0), [2.0, 0.0, 2.0, 2.0, 0.0, 2.0]);
        assert_eq!(p.coefficients_at(-0.5, 0.5), [3.0, 1.0, 1.5, 2.8, -0.8, 1.4]);
        assert_eq!(p.coefficients_at(0.5, -0.5), [1.5, -0.8, 3.0, 1.4, 1.0, 2.8]);
    }

    #[test]
    fn simulation2_is_elliptic() {
        let g = Grid2D::new(80).unwrap();
        assert!(validate_ellipticity(&simulation2(g, 1.0), 1.0, 5.0).ok);
    }

    #[test]
    fn phantoms_are_deterministic() {
        let g = Grid2D::new(40).unwrap();
        assert_eq!(simulation1(g, 1.3), simulation1(g, 1.3));
        assert_eq!(simulation2(g, 0.7), simulation2(g, 0.7));
    }
}
