//! Binary grid-field files and operator-spec JSON files.
//!
//! Field format (little-endian): magic `MXRF`, `u32` n, `u32` size per axis,
//! `f64` box length, `u32` value dimension, `u32` flags (bit 0: complex),
//! then row-major point-major data: for each grid point, `dim` values of one
//! `f64` (real) or two `f64` (re, im).

use crate::error::{Error, Result};
use crate::grid::{BoxGrid, GridField};
use crate::symbol::OperatorSpec;
use num_complex::Complex64;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub fn write_field(path: &Path, field: &GridField) -> Result<()> {
    let grid = field.grid();
    let mut f = BufWriter::new(std::fs::File::create(path)?);
    f.write_all(b"MXRF")?;
    f.write_all(&(grid.n() as u32).to_le_bytes())?;
    for s in grid.sizes() {
        f.write_all(&(s as u32).to_le_bytes())?;
    }
    f.write_all(&grid.length().to_le_bytes())?;
    f.write_all(&(field.dim() as u32).to_le_bytes())?;
    let complex = !field.is_real();
    f.write_all(&(u32::from(complex)).to_le_bytes())?;
    for p in 0..grid.points() {
        for c in 0..field.dim() {
            let z = field.at(p, c);
            f.write_all(&z.re.to_le_bytes())?;
            if complex {
                f.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_field(path: &Path, padding: usize) -> Result<GridField> {
    let mut f = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != b"MXRF" {
        return Err(Error::Format("bad field magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut size = 0usize;
    for axis in 0..n {
        f.read_exact(&mut b4)?;
        let s = u32::from_le_bytes(b4) as usize;
        if axis == 0 {
            size = s;
        } else if s != size {
            return Err(Error::Format("anisotropic grids are not supported".into()));
        }
    }
    f.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    f.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    f.read_exact(&mut b4)?;
    let complex = u32::from_le_bytes(b4) & 1 == 1;

    let grid = BoxGrid::new(n, size, length, padding)?;
    let mut field = GridField::zeros(&grid, dim);
    for p in 0..grid.points() {
        for c in 0..dim {
            f.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            let im = if complex {
                f.read_exact(&mut b8)?;
                f64::from_le_bytes(b8)
            } else {
                0.0
            };
            field.set(p, c, Complex64::new(re, im));
        }
    }
    field.normalize_realness();
    Ok(field)
}

pub fn write_spec_json(path: &Path, spec: &OperatorSpec) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_spec_json(path: &Path) -> Result<OperatorSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::grid::random_band_limited;

    #[test]
    fn field_roundtrip_real_and_complex() {
        let g = BoxGrid::new(2, 16, 2.0, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let u = random_band_limited(&g, 3, 4, 5);
        let path = dir.path().join("u.grf");
        write_field(&path, &u).unwrap();
        let back = read_field(&path, 2).unwrap();
        assert!(back.is_real());
        assert_eq!(back.dim(), 3);
        assert_eq!(back.grid(), &g);
        assert_eq!(u.data(), back.data());

        let mut v = u.clone();
        v.set(7, 1, Complex64::new(0.5, -0.25));
        let path2 = dir.path().join("v.grf");
        write_field(&path2, &v).unwrap();
        let back2 = read_field(&path2, 2).unwrap();
        assert!(!back2.is_real());
        assert_eq!(v.data(), back2.data());
    }

    #[test]
    fn spec_json_roundtrip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("op.json");
        let spec = catalog::deviatoric(3).unwrap();
        write_spec_json(&path, &spec).unwrap();
        let back = read_spec_json(&path).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.grf");
        std::fs::write(&path, b"NOPE1234").unwrap();
        assert!(read_field(&path, 2).is_err());
    }
}
