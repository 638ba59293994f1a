//! CSV field files and the operator triplet dump.
//!
//! A field file starts with one comment line `# N=<intervals> h=<spacing>
//! name=<name>`, followed by one record per grid row (increasing `y`) with
//! `re,im` pairs for every node of the row (increasing `x`). Values are
//! written in Rust's shortest round-trip form, so reading a file back gives
//! bit-identical values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use admittivity_core::forward::DiscreteOperator;
use admittivity_core::{ComplexScalarField, Grid2D, C64};
use anyhow::{bail, Context, Result};

/// A field read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedField {
    pub name: String,
    pub field: ComplexScalarField,
}

pub fn write_field(path: &Path, name: &str, field: &ComplexScalarField) -> Result<()> {
    let grid = field.grid();
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# N={} h={} name={}", grid.intervals(), grid.spacing(), name)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let n = grid.n();
    let mut record = Vec::with_capacity(2 * n);
    for j in 0..n {
        record.clear();
        for i in 0..n {
            let v = field.at(i, j);
            record.push(v.re.to_string());
            record.push(v.im.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Real-valued data (masks, conditioning maps) stored with zero imaginary part.
pub fn write_real(path: &Path, name: &str, grid: Grid2D, values: &[f64]) -> Result<()> {
    let field = ComplexScalarField::from_values(grid, values.iter().map(|&v| C64::new(v, 0.0)).collect())?;
    write_field(path, name, &field)
}

fn parse_header(line: &str) -> Result<(usize, String)> {
    let body = line.strip_prefix('#').context("missing header line")?;
    let (mut n, mut name) = (None, None);
    for token in body.split_whitespace() {
        match token.split_once('=') {
            Some(("N", v)) => n = Some(v.parse::<usize>().context("bad N in header")?),
            Some(("name", v)) => name = Some(v.to_string()),
            Some(("h", _)) => {}
            _ => bail!("unexpected header token {token:?}"),
        }
    }
    Ok((n.context("header lacks N")?, name.context("header lacks name")?))
}

pub fn read_field(path: &Path) -> Result<NamedField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (intervals, name) = parse_header(header.trim_end())?;
    let grid = Grid2D::new(intervals)?;
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.len());
    let mut rows = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    for (j, record) in rows.records().enumerate() {
        let record = record?;
        if record.len() != 2 * n {
            bail!("{}: row {j} has {} columns, expected {}", path.display(), record.len(), 2 * n);
        }
        for pair in 0..n {
            let re: f64 = record[2 * pair].trim().parse()?;
            let im: f64 = record[2 * pair + 1].trim().parse()?;
            values.push(C64::new(re, im));
        }
    }
    if values.len() != grid.len() {
        bail!("{}: {} values for a grid of {}", path.display(), values.len(), grid.len());
    }
    Ok(NamedField {
        name,
        field: ComplexScalarField::from_values(grid, values)?,
    })
}

/// One `row col re im` line per stored entry, zero-based indices.
pub fn write_triplets(path: &Path, op: &DiscreteOperator) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# N={} rows={} nnz={}", op.grid().intervals(), op.matrix().dim(), op.matrix().nnz())?;
    for (r, c, v) in op.matrix().triplets() {
        writeln!(out, "{r} {c} {} {}", v.re, v.im)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2D::new(6).unwrap();
        let f = ComplexScalarField::from_fn(grid, |x, y| C64::new((x * 1.1).exp() / 3.0, y * 1e-300 - 0.1));
        let path = dir.path().join("f.csv");
        write_field(&path, "H1", &f).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.name, "H1");
        assert_eq!(back.field, f);
    }

    #[test]
    fn header_records_grid() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid2D::new(4).unwrap();
        let path = dir.path().join("z.csv");
        write_field(&path, "zero", &ComplexScalarField::zeros(grid)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "# N=4 h=0.5 name=zero");
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "# N=4 h=0.5 name=x\n1,0,2,0\n").unwrap();
        assert!(read_field(&path).is_err());
    }
}
