//! Experiment configuration: a TOML file with one table per stage. Every
//! key is optional; command-line flags override file values.

use std::path::{Path, PathBuf};

use admittivity_core::cgo::WELL_CONDITIONED_ANGLES;
use admittivity_core::phantom::{simulation1, PiecewisePhantom};
use admittivity_core::recon::{
    ReconOptions, DEFAULT_C0_REL, DEFAULT_FIT_DEGREE, DEFAULT_NOISY_FIT_RADIUS, DEFAULT_SIGMA_TOL_REL,
};
use admittivity_core::regularize::{Method, RegConfig, DEFAULT_RHO_TIKHONOV, DEFAULT_RHO_TV};
use admittivity_core::{Grid2D, PhysicsParams, SymTensorField};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub phantom: PhantomSection,
    pub noise: NoiseSection,
    pub illumination: IlluminationSection,
    pub reconstruction: ReconSection,
    pub regularization: RegSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Intervals per axis; the grid has `n + 1` nodes.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega: f64,
    pub mu0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomKind {
    Sim1,
    Sim2,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomSection {
    pub kind: PhantomKind,
    /// Phantom definition for `kind = "file"`; relative paths are resolved
    /// against the directory of the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Noise level relative to `mean |H|`; `0` skips the noisy run.
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IlluminationSection {
    /// Angles of the three extra directions `(cos θ, sin θ)`, radians.
    pub angles: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconSection {
    pub c0_rel: f64,
    pub sigma_tol_rel: f64,
    /// Smoothing-differentiator half-width. Unset: plain stencils for
    /// noiseless data and the default window for noisy data.
    pub fit_radius: Option<usize>,
    pub fit_degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegSection {
    pub method: Method,
    /// Unset: the per-method default.
    pub rho: Option<f64>,
    /// Unset: equal to `rho`.
    pub bregman_mu: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub isotropic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub out_dir: PathBuf,
    pub dump_intermediate: bool,
    pub heatmaps: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 80 }
    }
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { omega: 1.0, mu0: 1.0 }
    }
}

impl Default for PhantomSection {
    fn default() -> Self {
        Self {
            kind: PhantomKind::Sim1,
            file: None,
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { alpha: 0.0, seed: 7 }
    }
}

impl Default for IlluminationSection {
    fn default() -> Self {
        Self {
            angles: WELL_CONDITIONED_ANGLES,
        }
    }
}

impl Default for ReconSection {
    fn default() -> Self {
        Self {
            c0_rel: DEFAULT_C0_REL,
            sigma_tol_rel: DEFAULT_SIGMA_TOL_REL,
            fit_radius: None,
            fit_degree: DEFAULT_FIT_DEGREE,
        }
    }
}

impl Default for RegSection {
    fn default() -> Self {
        let base = RegConfig::default();
        Self {
            method: Method::Tikhonov,
            rho: None,
            bregman_mu: None,
            max_iters: base.max_iters,
            tol: base.tol,
            isotropic: false,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            dump_intermediate: false,
            heatmaps: false,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            physics: PhysicsSection::default(),
            phantom: PhantomSection::default(),
            noise: NoiseSection::default(),
            illumination: IlluminationSection::default(),
            reconstruction: ReconSection::default(),
            regularization: RegSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file and resolves the phantom path against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let (Some(file), Some(dir)) = (&cfg.phantom.file, path.parent()) {
            if file.is_relative() {
                cfg.phantom.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        Grid2D::new(self.grid.n).context("grid")?;
        PhysicsParams::new(self.physics.omega, self.physics.mu0).context("physics")?;
        if !(self.noise.alpha >= 0.0) || !self.noise.alpha.is_finite() {
            bail!("noise: alpha must be finite and >= 0, got {}", self.noise.alpha);
        }
        if self.phantom.kind == PhantomKind::File && self.phantom.file.is_none() {
            bail!("phantom: kind = \"file\" needs a file");
        }
        if self.angles_are_degenerate() {
            bail!("illumination: angles must be distinct");
        }
        self.reg_config().validate().context("regularization")?;
        Ok(())
    }

    fn angles_are_degenerate(&self) -> bool {
        let a = self.illumination.angles;
        (0..3).any(|i| (i + 1..3).any(|j| a[i] == a[j]))
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Ok(Grid2D::new(self.grid.n)?)
    }

    pub fn params(&self) -> Result<PhysicsParams> {
        Ok(PhysicsParams::new(self.physics.omega, self.physics.mu0)?)
    }

    /// Fit radius for a run with noise level `alpha`.
    pub fn fit_radius(&self, alpha: f64) -> usize {
        match self.reconstruction.fit_radius {
            Some(r) => r,
            None if alpha > 0.0 => DEFAULT_NOISY_FIT_RADIUS,
            None => 0,
        }
    }

    pub fn recon_options(&self, alpha: f64) -> ReconOptions {
        ReconOptions {
            c0_rel: self.reconstruction.c0_rel,
            sigma_tol_rel: self.reconstruction.sigma_tol_rel,
            fit_radius: self.fit_radius(alpha),
            fit_degree: self.reconstruction.fit_degree,
        }
    }

    pub fn reg_config(&self) -> RegConfig {
        let r = &self.regularization;
        let rho = r.rho.unwrap_or(match r.method {
            Method::Tv => DEFAULT_RHO_TV,
            _ => DEFAULT_RHO_TIKHONOV,
        });
        RegConfig {
            method: r.method,
            rho,
            bregman_mu: r.bregman_mu.unwrap_or(if rho > 0.0 { rho } else { DEFAULT_RHO_TV }),
            max_iters: r.max_iters,
            tol: r.tol,
            isotropic: r.isotropic,
        }
    }

    /// Samples the configured phantom.
    pub fn phantom(&self) -> Result<Phantom> {
        let grid = self.grid()?;
        let omega = self.physics.omega;
        Ok(match self.phantom.kind {
            PhantomKind::Sim1 => Phantom {
                gamma: simulation1(grid, omega),
                piecewise: false,
            },
            PhantomKind::Sim2 => Phantom {
                gamma: admittivity_core::phantom::simulation2(grid, omega),
                piecewise: true,
            },
            PhantomKind::File => {
                let path = self.phantom.file.as_ref().context("phantom file")?;
                Phantom {
                    gamma: load_phantom(path)?.sample(grid, omega),
                    piecewise: true,
                }
            }
        })
    }
}

/// A sampled ground truth.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub gamma: SymTensorField,
    /// Piecewise constant, so discontinuity diagnostics apply.
    pub piecewise: bool,
}

pub fn load_phantom(path: &Path) -> Result<PiecewisePhantom> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing phantom {}", path.display()))
}
