//! End-to-end experiment: phantom → illuminations → forward solves →
//! (noise) → reconstruction → regularization → metrics.
//!
//! The noiseless reconstruction is always performed; a noisy one follows
//! when `alpha > 0`. Every stage is deterministic for a fixed config, so a
//! replay gives a bit-identical [`Report`]. Wall-clock timings live in a
//! separate [`Timings`] value for that reason.

use std::path::Path;
use std::thread;
use std::time::Instant;

use admittivity_core::cgo::{choose_illuminations_from, Illuminations};
use admittivity_core::forward::{assemble_operator, solve_with_operator, DiscreteOperator};
use admittivity_core::metrics::{discontinuity_band, error_mass_fraction, relative_l2};
use admittivity_core::noise::add_noise_stream;
use admittivity_core::phantom::Coefficient;
use admittivity_core::recon::{reconstruct, Reconstruction};
use admittivity_core::regularize::{regularize, RegConfig};
use admittivity_core::{ComplexScalarField, Grid2D, PhysicsParams, SymTensorField, C64};
use anyhow::{anyhow, Context, Result};

use crate::config::{ExperimentConfig, Phantom};
use crate::report::{CoefficientDiagnostics, ErrorRow, Report, RunDiagnostics, Timings};

/// Width, in grid steps, of the discontinuity band used for the artifact
/// localization diagnostic.
pub const EDGE_BAND_RADIUS: usize = 3;

/// Six real coefficient fields `σ₁ σ₂ σ₃ ε₁ ε₂ ε₃` of `gamma`.
pub fn coefficient_fields(gamma: &SymTensorField, omega: f64) -> [ComplexScalarField; 6] {
    std::array::from_fn(|c| {
        let comp = gamma.component(c % 3);
        if c < 3 {
            comp.map(|v| C64::new(v.re, 0.0))
        } else {
            comp.map(|v| C64::new(v.im / omega, 0.0))
        }
    })
}

/// Domain average of a tensor field, used as the reference for the
/// illumination design.
pub fn mean_tensor(gamma: &SymTensorField) -> [C64; 3] {
    let len = gamma.grid().len() as f64;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for k in 0..gamma.grid().len() {
        for (a, v) in acc.iter_mut().zip(gamma.at(k)) {
            *a += v / len;
        }
    }
    acc
}

fn stage<T>(name: &str, r: admittivity_core::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{name}: {e}"))
}

/// Ground truth, illuminations and the noiseless fields.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub grid: Grid2D,
    pub params: PhysicsParams,
    pub phantom: Phantom,
    pub truth: [ComplexScalarField; 6],
    pub illuminations: Illuminations,
    pub operator: DiscreteOperator,
    pub clean: Vec<ComplexScalarField>,
    pub timings: Timings,
}

/// Runs the illumination design and the forward solves, the latter
/// concurrently over the illuminations.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let grid = config.grid()?;
    let params = config.params()?;
    let phantom = config.phantom().context("phantom")?;
    let truth = coefficient_fields(&phantom.gamma, params.omega);
    let illuminations = design_illuminations(config, &phantom.gamma)?;
    timings.setup_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let operator = stage("forward assembly", assemble_operator(&phantom.gamma, &params))?;
    let traces = illuminations.traces(grid);
    let clean = thread::scope(|s| {
        let handles: Vec<_> = traces
            .iter()
            .map(|g| s.spawn(|| solve_with_operator(&operator, &phantom.gamma, g)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("forward solve panicked").map(|sol| sol.h))
            .collect::<admittivity_core::Result<Vec<_>>>()
    });
    let clean = stage("forward solve", clean)?;
    timings.forward_s = t.elapsed().as_secs_f64();
    Ok(Prepared {
        config: config.clone(),
        grid,
        params,
        phantom,
        truth,
        illuminations,
        operator,
        clean,
        timings,
    })
}

pub fn design_illuminations(config: &ExperimentConfig, gamma: &SymTensorField) -> Result<Illuminations> {
    let params = config.params()?;
    stage(
        "illumination design",
        choose_illuminations_from(mean_tensor(gamma), &params, config.illumination.angles),
    )
}

/// Independent noise per illumination: stream `k` of `seed` for field `k`.
pub fn noisy_fields(clean: &[ComplexScalarField], alpha: f64, seed: u64) -> Result<Vec<ComplexScalarField>> {
    clean
        .iter()
        .enumerate()
        .map(|(k, h)| stage("noise", add_noise_stream(h, alpha, seed, k as u64)))
        .collect()
}

/// One reconstruction with its regularized coefficients.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub recon: Reconstruction,
    pub fit_radius: usize,
    /// Unregularized `σ₁ … ε₃`.
    pub raw: [ComplexScalarField; 6],
    pub regularized: [ComplexScalarField; 6],
}

/// Regularizes the six coefficient fields concurrently.
pub fn regularize_six(raw: &[ComplexScalarField; 6], cfg: &RegConfig) -> Result<[ComplexScalarField; 6]> {
    let out = thread::scope(|s| {
        let handles: Vec<_> = raw.iter().map(|f| s.spawn(move || regularize(f, cfg))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("regularization panicked"))
            .collect::<admittivity_core::Result<Vec<_>>>()
    });
    let out = stage("regularization", out)?;
    Ok(out.try_into().expect("six fields"))
}

/// Reconstruction of `fields` as measured at noise level `alpha` (which
/// only selects the default differentiator).
pub fn reconstruct_run(
    config: &ExperimentConfig,
    params: &PhysicsParams,
    fields: &[ComplexScalarField],
    alpha: f64,
) -> Result<RunOutcome> {
    let opts = config.recon_options(alpha);
    let recon = stage("reconstruction", reconstruct(fields, params, &opts))?;
    let raw = recon.coefficients.six();
    let regularized = regularize_six(&raw, &config.reg_config())?;
    Ok(RunOutcome {
        recon,
        fit_radius: opts.fit_radius,
        raw,
        regularized,
    })
}

/// Relative L² errors of the regularized fields over the whole grid.
pub fn headline_errors(truth: &[ComplexScalarField; 6], run: &RunOutcome) -> Result<[f64; 6]> {
    let mut out = [0.0; 6];
    for c in 0..6 {
        out[c] = stage("metrics", relative_l2(&run.regularized[c], &truth[c], None))?;
    }
    Ok(out)
}

fn run_diagnostics(run: &RunOutcome) -> RunDiagnostics {
    let cond = run.recon.pointwise.conditioning.values();
    let mut admissible: Vec<f64> = cond
        .iter()
        .enumerate()
        .filter(|&(k, _)| run.recon.admissible.is_admissible(k))
        .map(|(_, &v)| v)
        .collect();
    admissible.sort_by(f64::total_cmp);
    RunDiagnostics {
        fit_radius: run.fit_radius,
        admissible_fraction: run.recon.admissible.fraction(),
        c0: run.recon.admissible.c0(),
        flagged_nodes: run.recon.pointwise.flagged_count(),
        singular_inverse_nodes: run.recon.coefficients.flagged.iter().filter(|&&f| f).count(),
        min_sigma: admissible.first().copied().unwrap_or(0.0),
        median_sigma: admissible.get(admissible.len() / 2).copied().unwrap_or(0.0),
    }
}

/// Everything one experiment produces.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub prepared: Prepared,
    pub clean: RunOutcome,
    pub noisy: Option<(Vec<ComplexScalarField>, RunOutcome)>,
    pub report: Report,
}

/// Runs the full pipeline without touching the file system.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    let prepared = prepare(config)?;
    let alpha = config.noise.alpha;
    let noisy_input = if alpha > 0.0 {
        Some(noisy_fields(&prepared.clean, alpha, config.noise.seed)?)
    } else {
        None
    };
    finish(prepared, noisy_input)
}

/// Reconstruction stages from given noiseless (and optionally noisy)
/// fields; shared by [`run_experiment`] and [`rerun_from_dir`].
fn finish(mut prepared: Prepared, noisy_input: Option<Vec<ComplexScalarField>>) -> Result<Experiment> {
    let config = prepared.config.clone();
    let params = prepared.params;
    let t = Instant::now();
    let (clean, noisy) = thread::scope(|s| {
        let noisy = noisy_input.as_ref().map(|fields| {
            let (cfg, params) = (&config, &params);
            s.spawn(move || reconstruct_run(cfg, params, fields, cfg.noise.alpha))
        });
        let clean = reconstruct_run(&config, &params, &prepared.clean, 0.0);
        (clean, noisy.map(|h| h.join().expect("noisy reconstruction panicked")))
    });
    let clean = clean?;
    let noisy = match (noisy_input, noisy) {
        (Some(fields), Some(run)) => Some((fields, run?)),
        _ => None,
    };
    prepared.timings.reconstruction_s = t.elapsed().as_secs_f64();
    let report = build_report(&prepared, &clean, noisy.as_ref().map(|(_, r)| r))?;
    Ok(Experiment {
        prepared,
        clean,
        noisy,
        report,
    })
}

fn edge_fraction(truth: &ComplexScalarField, recon: &ComplexScalarField) -> Result<Option<f64>> {
    let band = discontinuity_band(truth, EDGE_BAND_RADIUS);
    if !band.iter().any(|&b| b) {
        return Ok(None);
    }
    Ok(Some(stage("metrics", error_mass_fraction(recon, truth, &band))?))
}

fn build_report(prepared: &Prepared, clean: &RunOutcome, noisy: Option<&RunOutcome>) -> Result<Report> {
    let truth = &prepared.truth;
    let clean_err = headline_errors(truth, clean)?;
    let noisy_err = noisy.map(|r| headline_errors(truth, r)).transpose()?;
    let mut errors = Vec::with_capacity(6);
    let mut diagnostics = Vec::with_capacity(6);
    for (c, coefficient) in Coefficient::ALL.into_iter().enumerate() {
        errors.push(ErrorRow {
            coefficient,
            noiseless_error: clean_err[c],
            noisy_error: noisy_err.map(|e| e[c]),
            mask_fraction: clean.recon.admissible.fraction(),
        });
        let masked = |run: &RunOutcome| {
            stage("metrics", relative_l2(&run.regularized[c], &truth[c], Some(&run.recon.admissible)))
        };
        let raw = |run: &RunOutcome| stage("metrics", relative_l2(&run.raw[c], &truth[c], None));
        let edge = |run: &RunOutcome| -> Result<Option<f64>> {
            if prepared.phantom.piecewise {
                edge_fraction(&truth[c], &run.regularized[c])
            } else {
                Ok(None)
            }
        };
        diagnostics.push(CoefficientDiagnostics {
            coefficient,
            noiseless_unregularized: raw(clean)?,
            noisy_unregularized: noisy.map(raw).transpose()?,
            noiseless_masked: masked(clean)?,
            noisy_masked: noisy.map(masked).transpose()?,
            noiseless_edge_fraction: edge(clean)?,
            noisy_edge_fraction: match noisy {
                Some(r) => edge(r)?,
                None => None,
            },
        });
    }
    let cfg = &prepared.config;
    let reg = cfg.reg_config();
    let ill = &prepared.illuminations;
    Ok(Report {
        phantom: cfg.phantom.kind,
        grid_n: cfg.grid.n,
        omega: cfg.physics.omega,
        mu0: cfg.physics.mu0,
        alpha: cfg.noise.alpha,
        seed: cfg.noise.seed,
        regularization: reg.method,
        rho: reg.rho,
        bregman_mu: reg.bregman_mu,
        angles: ill.angles,
        illumination_attempts: ill.attempts,
        illumination_min_relative_sigma: ill.min_relative_sigma,
        errors,
        diagnostics,
        noiseless_run: run_diagnostics(clean),
        noisy_run: noisy.map(run_diagnostics),
    })
}

/// Names of the dumped measurement files.
pub fn measurement_file(k: usize, noisy: bool) -> String {
    format!("h{}_{}.csv", k + 1, if noisy { "noisy" } else { "clean" })
}

/// Repeats the reconstruction stages from measurement files written by
/// [`crate::output::write_outputs`] with `dump_intermediate` set. The truth
/// and illumination metadata are recomputed from `config`.
pub fn rerun_from_dir(config: &ExperimentConfig, fields_dir: &Path) -> Result<Experiment> {
    config.validate()?;
    let grid = config.grid()?;
    let params = config.params()?;
    let phantom = config.phantom()?;
    let truth = coefficient_fields(&phantom.gamma, params.omega);
    let illuminations = design_illuminations(config, &phantom.gamma)?;
    let operator = stage("forward assembly", assemble_operator(&phantom.gamma, &params))?;
    let read = |noisy: bool| -> Result<Vec<ComplexScalarField>> {
        (0..illuminations.basis.directions().len())
            .map(|k| {
                let f = crate::fields::read_field(&fields_dir.join(measurement_file(k, noisy)))?;
                if f.field.grid() != grid {
                    anyhow::bail!("{}: grid differs from config", measurement_file(k, noisy));
                }
                Ok(f.field)
            })
            .collect()
    };
    let clean = read(false)?;
    let noisy = if config.noise.alpha > 0.0 { Some(read(true)?) } else { None };
    let prepared = Prepared {
        config: config.clone(),
        grid,
        params,
        phantom,
        truth,
        illuminations,
        operator,
        clean,
        timings: Timings::default(),
    };
    finish(prepared, noisy)
}
