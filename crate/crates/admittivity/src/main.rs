use std::path::{Path, PathBuf};

use admittivity::config::{ExperimentConfig, PhantomKind};
use admittivity::output::write_outputs;
use admittivity::report::Report;
use admittivity::runner::{design_illuminations, mean_tensor, rerun_from_dir, run_experiment};
use admittivity::sweep::sweep;
use admittivity_core::regularize::Method;
use admittivity_core::C64;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Anisotropic admittivity reconstruction from interior magnetic fields.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward solves, reconstruction, regularization and report.
    Run(Overrides),
    /// Re-runs reconstruction from the fields dumped by `run --dump-intermediate`.
    Reconstruct {
        /// Output directory of the earlier run.
        #[arg(long)]
        from: PathBuf,
        /// Defaults to `<from>/reconstruct`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Prints the illumination design: Q, directions and the σ_min table.
    Cgo {
        #[command(flatten)]
        overrides: Overrides,
        /// Use γ_ref = I instead of the phantom average.
        #[arg(long)]
        identity: bool,
    },
    /// Error, misfit and penalty over a list of regularization weights.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated weights.
        #[arg(long, value_delimiter = ',', required = true)]
        rhos: Vec<f64>,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_phantom)]
    phantom: Option<PhantomKind>,
    /// Piecewise phantom TOML, implies `--phantom file`.
    #[arg(long)]
    phantom_file: Option<PathBuf>,
    /// Intervals per axis (even).
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    /// Relative noise level; 0 disables the noisy run.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_method)]
    reg: Option<Method>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    bregman_mu: Option<f64>,
    #[arg(long)]
    reg_iters: Option<usize>,
    #[arg(long)]
    reg_tol: Option<f64>,
    #[arg(long)]
    c0_rel: Option<f64>,
    /// Smoothing differentiator half-width; 0 selects plain stencils.
    #[arg(long)]
    fit_radius: Option<usize>,
    /// Three comma-separated angles in radians for u₃, u₄, u₅.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    angles: Option<Vec<f64>>,
    #[arg(long)]
    dump_intermediate: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    heatmaps: bool,
}

fn parse_phantom(s: &str) -> Result<PhantomKind, String> {
    match s {
        "sim1" | "simulation1" => Ok(PhantomKind::Sim1),
        "sim2" | "simulation2" => Ok(PhantomKind::Sim2),
        "file" => Ok(PhantomKind::File),
        _ => Err(format!("unknown phantom `{s}` (sim1, sim2, file)")),
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "none" => Ok(Method::None),
        "tikhonov" => Ok(Method::Tikhonov),
        "tv" => Ok(Method::Tv),
        _ => Err(format!("unknown regularization `{s}` (none, tikhonov, tv)")),
    }
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(k) = self.phantom {
            cfg.phantom.kind = k;
        }
        if let Some(f) = &self.phantom_file {
            cfg.phantom.kind = PhantomKind::File;
            cfg.phantom.file = Some(f.clone());
        }
        if let Some(n) = self.grid_n {
            cfg.grid.n = n;
        }
        if let Some(v) = self.omega {
            cfg.physics.omega = v;
        }
        if let Some(v) = self.mu0 {
            cfg.physics.mu0 = v;
        }
        if let Some(v) = self.alpha {
            cfg.noise.alpha = v;
        }
        if let Some(v) = self.seed {
            cfg.noise.seed = v;
        }
        let reg = &mut cfg.regularization;
        if let Some(m) = self.reg {
            if m != reg.method {
                // Weights tuned for one method do not carry over.
                reg.rho = None;
                reg.bregman_mu = None;
            }
            reg.method = m;
        }
        reg.rho = self.rho.or(reg.rho);
        reg.bregman_mu = self.bregman_mu.or(reg.bregman_mu);
        if let Some(v) = self.reg_iters {
            reg.max_iters = v;
        }
        if let Some(v) = self.reg_tol {
            reg.tol = v;
        }
        if let Some(v) = self.c0_rel {
            cfg.reconstruction.c0_rel = v;
        }
        if let Some(v) = self.fit_radius {
            cfg.reconstruction.fit_radius = Some(v);
        }
        if let Some(a) = &self.angles {
            cfg.illumination.angles = [a[0], a[1], a[2]];
        }
        cfg.output.dump_intermediate |= self.dump_intermediate;
        cfg.output.heatmaps |= self.heatmaps;
        if let Some(d) = &self.out_dir {
            cfg.output.out_dir = d.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cfg: &ExperimentConfig) -> Result<()> {
    let exp = run_experiment(cfg)?;
    write_outputs(&exp, &cfg.output.out_dir)?;
    print!("{}", exp.report.table());
    let t = &exp.prepared.timings;
    eprintln!(
        "setup {:.2}s, forward {:.2}s, reconstruction {:.2}s; wrote {}",
        t.setup_s,
        t.forward_s,
        t.reconstruction_s,
        cfg.output.out_dir.display()
    );
    Ok(())
}

fn reconstruct(from: &Path, out_dir: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&from.join("config.toml"))?;
    if !cfg.output.dump_intermediate {
        bail!("{} was written without --dump-intermediate", from.display());
    }
    cfg.output.out_dir = out_dir.unwrap_or_else(|| from.join("reconstruct"));
    // The replay writes results only.
    cfg.output.dump_intermediate = false;
    let exp = rerun_from_dir(&cfg, &from.join("fields"))?;
    write_outputs(&exp, &cfg.output.out_dir)?;
    print!("{}", exp.report.table());
    let original = Report::read(&from.join("report.json")).context("original report")?;
    if original == exp.report {
        eprintln!("report matches {}", from.join("report.json").display());
    } else {
        eprintln!("report differs from {}", from.join("report.json").display());
    }
    Ok(())
}

fn fmt_c(z: C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn cgo(cfg: &ExperimentConfig, identity: bool) -> Result<()> {
    let ill = if identity {
        let mut c = cfg.clone();
        c.phantom.kind = PhantomKind::Sim1;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let params = c.params()?;
        admittivity_core::cgo::choose_illuminations_from([one, zero, one], &params, c.illumination.angles)
            .map_err(|e| anyhow::anyhow!("illumination design: {e}"))?
    } else {
        let phantom = cfg.phantom()?;
        let g = mean_tensor(&phantom.gamma);
        println!("gamma_ref = [{}, {}; {}, {}]", fmt_c(g[0]), fmt_c(g[1]), fmt_c(g[1]), fmt_c(g[2]));
        design_illuminations(cfg, &phantom.gamma)?
    };
    let q = ill.basis.q();
    println!("Q = [{}, {}; {}, {}]", fmt_c(q[0][0]), fmt_c(q[0][1]), fmt_c(q[1][0]), fmt_c(q[1][1]));
    for (k, u) in ill.basis.directions().iter().enumerate() {
        println!("u{} = ({}, {})", k + 1, fmt_c(u[0]), fmt_c(u[1]));
    }
    println!(
        "angles = {:.6} {:.6} {:.6}, attempts = {}, min sigma_min/sigma_max = {:.3e}",
        ill.angles[0], ill.angles[1], ill.angles[2], ill.attempts, ill.min_relative_sigma
    );
    let n = ill.probe_grid.n();
    println!("sigma_min over the {n}x{n} probe grid (rows: y from -1 to 1):");
    for row in ill.sigma_table.chunks(n) {
        let line: Vec<String> = row.iter().map(|s| format!("{s:.2e}")).collect();
        println!("{}", line.join(" "));
    }
    Ok(())
}

fn run_sweep(cfg: &ExperimentConfig, rhos: &[f64]) -> Result<()> {
    let exp = run_experiment(cfg)?;
    let run = exp.noisy.as_ref().map_or(&exp.clean, |(_, r)| r);
    let rows = sweep(run, &exp.prepared.truth, &cfg.reg_config(), rhos)?;
    println!("{:>10} {:<10} {:>10} {:>12} {:>10}", "rho", "coef", "residual", "penalty", "error");
    for r in &rows {
        println!(
            "{:>10.3e} {:<10} {:>10.3e} {:>12.4e} {:>10.4}",
            r.rho,
            r.coefficient.name(),
            r.residual,
            r.penalty,
            r.error
        );
    }
    std::fs::create_dir_all(&cfg.output.out_dir)?;
    let path = cfg.output.out_dir.join("sweep.json");
    std::fs::write(&path, serde_json::to_string_pretty(&rows)? + "\n")?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(o) => run(&o.resolve()?),
        Command::Reconstruct { from, out_dir } => reconstruct(&from, out_dir),
        Command::Cgo { overrides, identity } => cgo(&overrides.resolve()?, identity),
        Command::Sweep { overrides, rhos } => run_sweep(&overrides.resolve()?, &rhos),
    }
}
