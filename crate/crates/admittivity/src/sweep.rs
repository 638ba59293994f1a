//! Regularization-weight sweep on a fixed reconstruction: for each `ρ`,
//! data misfit, penalty size and error against the truth, the data for an
//! L-curve.

use admittivity_core::phantom::Coefficient;
use admittivity_core::regularize::{forward_gradient, total_variation, Method, RegConfig};
use admittivity_core::ComplexScalarField;
use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::runner::{headline_errors, regularize_six, RunOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub coefficient: Coefficient,
    /// `‖f - f_rc‖₂ / ‖f_rc‖₂`.
    pub residual: f64,
    /// `‖Γf‖₂` for Tikhonov, the TV seminorm otherwise; real and imaginary
    /// parts summed. Scaled by the `h²` quadrature weight.
    pub penalty: f64,
    pub error: f64,
}

fn parts(f: &ComplexScalarField) -> [Vec<f64>; 2] {
    [
        f.values().iter().map(|v| v.re).collect(),
        f.values().iter().map(|v| v.im).collect(),
    ]
}

fn penalty(f: &ComplexScalarField, cfg: &RegConfig) -> f64 {
    let grid = f.grid();
    let h2 = grid.spacing().powi(2);
    parts(f)
        .iter()
        .map(|p| match cfg.method {
            Method::Tikhonov | Method::None => {
                let (gx, gy) = forward_gradient(grid, p);
                (h2 * gx.iter().chain(&gy).map(|v| v * v).sum::<f64>()).sqrt()
            }
            Method::Tv => h2 * total_variation(grid, p, cfg.isotropic),
        })
        .sum()
}

fn relative_misfit(f: &ComplexScalarField, f_rc: &ComplexScalarField) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in f.values().iter().zip(f_rc.values()) {
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}

/// One row per `(ρ, coefficient)`, ordered by `ρ` as given.
pub fn sweep(
    run: &RunOutcome,
    truth: &[ComplexScalarField; 6],
    base: &RegConfig,
    rhos: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(rhos.len() * 6);
    for &rho in rhos {
        let cfg = RegConfig { rho, ..*base };
        let regularized = regularize_six(&run.raw, &cfg)?;
        let probe = RunOutcome {
            regularized,
            ..run.clone()
        };
        let errors = headline_errors(truth, &probe)?;
        for c in Coefficient::ALL {
            let k = c.index();
            rows.push(SweepRow {
                rho,
                coefficient: c,
                residual: relative_misfit(&probe.regularized[k], &run.raw[k]),
                penalty: penalty(&probe.regularized[k], &cfg),
                error: errors[k],
            });
        }
    }
    Ok(rows)
}
