//! On-disk layout of a run:
//!
//! ```text
//! out_dir/report.json        headline errors and diagnostics
//! out_dir/timings.json
//! out_dir/config.toml        effective configuration
//! out_dir/fields/*.csv       truth and reconstructed coefficients
//! out_dir/heatmaps/*.pgm     with `heatmaps`
//! ```
//!
//! With `dump_intermediate` the fields directory also receives the
//! measurements `h{k}_{clean,noisy}.csv`, the λ maps, masks, conditioning
//! maps, `γ⁻¹`, unregularized coefficients and the forward operator.

use std::path::Path;

use admittivity_core::phantom::Coefficient;
use anyhow::{Context, Result};

use crate::fields::{write_field, write_real, write_triplets};
use crate::heatmap::write_pgm;
use crate::runner::{measurement_file, Experiment, RunOutcome};

fn dump_run(dir: &Path, tag: &str, run: &RunOutcome) -> Result<()> {
    let grid = run.recon.admissible.grid();
    for (j, pair) in run.recon.lambdas.lambda.iter().enumerate() {
        for (i, l) in pair.iter().enumerate() {
            let name = format!("lambda{}_{}_{tag}", j + 1, i + 1);
            write_field(&dir.join(format!("{name}.csv")), &name, l)?;
        }
    }
    let mask: Vec<f64> = run.recon.admissible.as_slice().iter().map(|&b| b as u8 as f64).collect();
    write_real(&dir.join(format!("mask_{tag}.csv")), &format!("mask_{tag}"), grid, &mask)?;
    let cond = run.recon.pointwise.conditioning.values();
    write_real(&dir.join(format!("conditioning_{tag}.csv")), &format!("conditioning_{tag}"), grid, cond)?;
    for (k, comp) in ["11", "12", "22"].iter().enumerate() {
        let name = format!("gamma_inv{comp}_{tag}");
        write_field(&dir.join(format!("{name}.csv")), &name, &run.recon.pointwise.gamma_inv.component(k))?;
    }
    for c in Coefficient::ALL {
        let name = format!("{}_unregularized_{tag}", c.name());
        write_field(&dir.join(format!("{name}.csv")), &name, &run.raw[c.index()])?;
    }
    Ok(())
}

/// Writes the run under `out_dir` per the layout above.
pub fn write_outputs(exp: &Experiment, out_dir: &Path) -> Result<()> {
    let cfg = &exp.prepared.config;
    let fields = out_dir.join("fields");
    std::fs::create_dir_all(&fields).with_context(|| format!("creating {}", fields.display()))?;
    exp.report.write(&out_dir.join("report.json"))?;
    std::fs::write(
        out_dir.join("timings.json"),
        serde_json::to_string_pretty(&exp.prepared.timings)? + "\n",
    )?;
    std::fs::write(out_dir.join("config.toml"), toml::to_string(cfg)?)?;

    let mut runs = vec![("clean", &exp.clean)];
    if let Some((_, run)) = &exp.noisy {
        runs.push(("noisy", run));
    }
    for c in Coefficient::ALL {
        let truth = format!("{}_truth", c.name());
        write_field(&fields.join(format!("{truth}.csv")), &truth, &exp.prepared.truth[c.index()])?;
        for (tag, run) in &runs {
            let name = format!("{}_{tag}", c.name());
            write_field(&fields.join(format!("{name}.csv")), &name, &run.regularized[c.index()])?;
        }
    }

    if cfg.output.dump_intermediate {
        for (k, h) in exp.prepared.clean.iter().enumerate() {
            write_field(&fields.join(measurement_file(k, false)), &format!("h{}", k + 1), h)?;
        }
        if let Some((noisy, _)) = &exp.noisy {
            for (k, h) in noisy.iter().enumerate() {
                write_field(&fields.join(measurement_file(k, true)), &format!("h{}", k + 1), h)?;
            }
        }
        for (tag, run) in &runs {
            dump_run(&fields, tag, run)?;
        }
        write_triplets(&fields.join("operator.txt"), &exp.prepared.operator)?;
    }

    if cfg.output.heatmaps {
        let dir = out_dir.join("heatmaps");
        std::fs::create_dir_all(&dir)?;
        let n = exp.prepared.grid.n();
        let re = |f: &admittivity_core::ComplexScalarField| f.values().iter().map(|v| v.re).collect::<Vec<_>>();
        for c in Coefficient::ALL {
            write_pgm(&dir.join(format!("{}_truth.pgm", c.name())), n, &re(&exp.prepared.truth[c.index()]))?;
            for (tag, run) in &runs {
                write_pgm(&dir.join(format!("{}_{tag}.pgm", c.name())), n, &re(&run.regularized[c.index()]))?;
            }
        }
    }
    Ok(())
}
