//! Deterministic output: the binary field dump and plain CSV writers.
//!
//! Binary layout (all little-endian): magic `SHOM`, format version (u32),
//! number of axes (u32), the size of each axis (u32 each), then the values
//! as f64 in the field's storage order (last axis fastest). The physical box
//! size travels in the echoed config, not in the dump.
//!
//! Every writer formats numbers with the shortest round-trip representation,
//! so identical data produces byte-identical files on every platform.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{SlowField, SlowGrid};

pub const MAGIC: &[u8; 4] = b"SHOM";
pub const FORMAT_VERSION: u32 = 1;

/// Writes a rectangular array in the binary dump format.
pub fn write_binary(path: &Path, sizes: &[usize], values: &[f64]) -> Result<()> {
    let expected: usize = sizes.iter().product();
    if sizes.is_empty() || expected != values.len() {
        return Err(Error::State(format!(
            "binary dump shape {sizes:?} does not hold {} values",
            values.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for &n in sizes {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary dump back as (sizes, values).
pub fn read_binary(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::State(format!("{}: not a field dump (bad magic)", path.display())));
    }
    let mut u = [0u8; 4];
    r.read_exact(&mut u)?;
    let version = u32::from_le_bytes(u);
    if version != FORMAT_VERSION {
        return Err(Error::State(format!(
            "{}: format version {version}, expected {FORMAT_VERSION}",
            path.display()
        )));
    }
    r.read_exact(&mut u)?;
    let dim = u32::from_le_bytes(u) as usize;
    if dim == 0 || dim > 8 {
        return Err(Error::State(format!("{}: implausible axis count {dim}", path.display())));
    }
    let mut sizes = Vec::with_capacity(dim);
    for _ in 0..dim {
        r.read_exact(&mut u)?;
        sizes.push(u32::from_le_bytes(u) as usize);
    }
    let total: usize = sizes.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut b = [0u8; 8];
    for _ in 0..total {
        r.read_exact(&mut b)?;
        values.push(f64::from_le_bytes(b));
    }
    Ok((sizes, values))
}

/// Dumps a slow field (sizes = one entry per axis).
pub fn write_field_binary(path: &Path, field: &SlowField) -> Result<()> {
    let sizes = vec![field.grid().n_points(); field.grid().dim()];
    write_binary(path, &sizes, field.values())
}

/// Rebuilds a slow field from a dump; the box length comes from the caller
/// (normally the echoed config).
pub fn read_field_binary(path: &Path, box_length: f64) -> Result<SlowField> {
    let (sizes, values) = read_binary(path)?;
    let n = sizes[0];
    if sizes.iter().any(|&s| s != n) {
        return Err(Error::State(format!(
            "{}: dump shape {sizes:?} is not a square slow grid",
            path.display()
        )));
    }
    let grid = SlowGrid::new(sizes.len(), box_length, n)?;
    SlowField::new(grid, values)
}

fn fmt(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        // integers (mode numbers, grid sizes) read back as such
        format!("{}", v as i64)
    } else {
        v.to_string()
    }
}

/// Writes a CSV with the given header and rows.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::State(format!(
                "CSV row with {} fields under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes named fields on a shared grid as one CSV row per grid point,
/// coordinates first.
pub fn write_field_csv(path: &Path, fields: &[(&str, &SlowField)]) -> Result<()> {
    let Some((_, first)) = fields.first() else {
        return Err(Error::State("no fields to write".into()));
    };
    let grid = first.grid().clone();
    let dim = grid.dim();
    let mut header: Vec<&str> = ["x0", "x1"][..dim].to_vec();
    for (name, f) in fields {
        if f.grid() != &grid {
            return Err(Error::GridMismatch(format!("field `{name}` on a different grid")));
        }
        header.push(name);
    }
    let mut rows = Vec::with_capacity(grid.total_points());
    for idx in 0..grid.total_points() {
        let x = grid.point(idx);
        let mut row = Vec::with_capacity(dim + fields.len());
        row.extend_from_slice(&x[..dim]);
        for (_, f) in fields {
            row.push(f.values()[idx]);
        }
        rows.push(row);
    }
    write_csv(path, &header, &rows)
}

/// Writes a line-oriented `key = value` summary.
pub fn write_summary(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a text document as-is.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SlowGrid;
    use std::f64::consts::PI;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("shom-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn binary_round_trip_preserves_bits() {
        let grid = SlowGrid::new_1d(2.0 * PI, 16).unwrap();
        let f = SlowField::from_fn(&grid, |x| (x[0].sin() * 1e-7).exp() - 1.0).unwrap();
        let path = tmp("roundtrip.bin");
        write_field_binary(&path, &f).unwrap();
        let g = read_field_binary(&path, 2.0 * PI).unwrap();
        assert_eq!(f.values(), g.values());
    }

    #[test]
    fn binary_header_is_validated() {
        let path = tmp("header.bin");
        std::fs::write(&path, b"MOHS\x01\x00\x00\x00").unwrap();
        assert!(read_binary(&path).is_err());
        let short = [MAGIC.as_slice(), &2u32.to_le_bytes()].concat();
        std::fs::write(&path, short).unwrap();
        assert!(read_binary(&path).is_err());
    }

    #[test]
    fn csv_output_is_stable() {
        let path = tmp("table.csv");
        write_csv(
            &path,
            &["n", "err"],
            &[vec![16.0, 0.25], vec![32.0, 0.0625], vec![64.0, 1.0 / 3.0]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "n,err\n16,0.25\n32,0.0625\n64,0.3333333333333333\n");
    }

    #[test]
    fn field_csv_has_one_row_per_point() {
        let grid = SlowGrid::new_1d(1.0, 8).unwrap();
        let f = SlowField::from_fn(&grid, |x| x[0]).unwrap();
        let path = tmp("field.csv");
        write_field_csv(&path, &[("f", &f)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("x0,f\n0,0\n0.125,0.125\n"));
    }
}
