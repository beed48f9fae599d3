//! Flat binary dump of a nodal field.
//!
//! Layout (little endian): `N: u64`, `dims: [u64; 3]`, `h: f64`,
//! `origin: [f64; 3]`, then `dims[0]*dims[1]*dims[2]` values as `f64`,
//! x varying fastest (row-major for an array indexed `[z][y][x]`).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub fn write_field<W: Write>(mut w: W, grid: &Grid, field: &[f64]) -> Result<()> {
    w.write_all(&(grid.dim as u64).to_le_bytes())?;
    for d in 0..3 {
        w.write_all(&(grid.n[d] as u64).to_le_bytes())?;
    }
    w.write_all(&grid.h.to_le_bytes())?;
    for d in 0..3 {
        w.write_all(&grid.origin[d].to_le_bytes())?;
    }
    for v in field {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<(Grid, Vec<f64>)> {
    let mut b8 = [0u8; 8];
    let mut u64_ = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let dim = u64_(&mut r)? as usize;
    let mut n = [0usize; 3];
    for nd in n.iter_mut() {
        *nd = u64_(&mut r)? as usize;
    }
    let h = f64::from_bits(u64_(&mut r)?);
    let mut origin = [0.0; 3];
    for o in origin.iter_mut() {
        *o = f64::from_bits(u64_(&mut r)?);
    }
    if !(dim == 2 || dim == 3) {
        return Err(Error::ConfigParse(format!("bad dimension {dim} in field dump")));
    }
    let len = n[0] * n[1] * n[2];
    let mut field = Vec::with_capacity(len);
    for _ in 0..len {
        field.push(f64::from_bits(u64_(&mut r)?));
    }
    Ok((Grid { dim, origin, h, n }, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let g = Grid { dim: 2, origin: [-1.0, -0.5, 0.0], h: 0.25, n: [3, 2, 1] };
        let f = vec![0.0, -1.5, 2.0, 3.25, f64::MIN_POSITIVE, 1e300];
        let mut buf = Vec::new();
        write_field(&mut buf, &g, &f).unwrap();
        assert_eq!(buf.len(), 8 * (1 + 3 + 1 + 3 + 6));
        let (g2, f2) = read_field(&buf[..]).unwrap();
        assert_eq!(g, g2);
        assert_eq!(f, f2);
    }
}
