//! Grayscale PGM (binary P5) heatmaps, min-max scaled.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Image bytes of `values` laid out row-major by `y` ascending; the image
/// is flipped so that `y` increases upwards. A constant field maps to mid
/// gray.
pub fn encode_pgm(n: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(values.len(), n * n, "heatmap needs an n × n field");
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        for v in &values[j * n..(j + 1) * n] {
            let t = if span > 0.0 && span.is_finite() { (v - lo) / span } else { 0.5 };
            out.push((t.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn write_pgm(path: &Path, n: usize, values: &[f64]) -> Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(&encode_pgm(n, values))?;
    Ok(())
}
