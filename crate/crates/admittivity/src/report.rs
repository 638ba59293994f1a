//! Machine-readable run summaries.

use std::path::Path;

use admittivity_core::phantom::Coefficient;
use admittivity_core::regularize::Method;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::PhantomKind;

/// Headline relative L² error of one coefficient after regularization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub coefficient: Coefficient,
    pub noiseless_error: f64,
    /// `None` when the run had no noise.
    pub noisy_error: Option<f64>,
    /// Admissible fraction of the noiseless run.
    pub mask_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDiagnostics {
    pub coefficient: Coefficient,
    /// Errors before regularization.
    pub noiseless_unregularized: f64,
    pub noisy_unregularized: Option<f64>,
    /// Errors restricted to the admissible nodes.
    pub noiseless_masked: f64,
    pub noisy_masked: Option<f64>,
    /// Share of the squared error within a few nodes of a jump. Piecewise
    /// phantoms only.
    pub noiseless_edge_fraction: Option<f64>,
    pub noisy_edge_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub fit_radius: usize,
    pub admissible_fraction: f64,
    pub c0: f64,
    /// Nodes whose pointwise system fell below the singular-value floor.
    pub flagged_nodes: usize,
    /// Nodes where the recovered `γ⁻¹` could not be inverted.
    pub singular_inverse_nodes: usize,
    /// Smallest and median `σ_min` of the pointwise systems over the mask.
    pub min_sigma: f64,
    pub median_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub phantom: PhantomKind,
    pub grid_n: usize,
    pub omega: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub seed: u64,
    pub regularization: Method,
    pub rho: f64,
    pub bregman_mu: f64,
    pub angles: [f64; 3],
    pub illumination_attempts: usize,
    pub illumination_min_relative_sigma: f64,
    pub errors: Vec<ErrorRow>,
    pub diagnostics: Vec<CoefficientDiagnostics>,
    pub noiseless_run: RunDiagnostics,
    pub noisy_run: Option<RunDiagnostics>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Plain-text table of the headline errors.
    pub fn table(&self) -> String {
        let mut s = format!("{:<10} {:>10} {:>10} {:>8}\n", "coef", "noiseless", "noisy", "mask");
        for row in &self.errors {
            let noisy = row.noisy_error.map_or("-".to_string(), |e| format!("{:.4}", e));
            s += &format!(
                "{:<10} {:>10.4} {:>10} {:>8.3}\n",
                row.coefficient.name(),
                row.noiseless_error,
                noisy,
                row.mask_fraction
            );
        }
        s
    }
}

/// Wall-clock seconds per stage. Kept out of [`Report`] so that replays
/// compare byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_s: f64,
    pub forward_s: f64,
    pub reconstruction_s: f64,
}
