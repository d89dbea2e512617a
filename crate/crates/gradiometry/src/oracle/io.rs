//! Binary dump format for operators and states: an 8-byte magic, the
//! dimension as a little-endian u64, then the row-major complex entries as
//! little-endian f64 pairs (re, im).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::ops::CMat;
use super::state::DensityOperator;
use crate::ensemble::Spin;
use crate::error::{Error, Result};

pub const DUMP_MAGIC: [u8; 8] = *b"DENSMAT1";

pub fn write_matrix<W: Write>(mut w: W, m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "only square matrices are dumped, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    w.write_all(&DUMP_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<CMat> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != DUMP_MAGIC {
        return Err(Error::Domain("bad magic in operator dump".into()));
    }
    let mut dim_bytes = [0u8; 8];
    r.read_exact(&mut dim_bytes)?;
    let dim = u64::from_le_bytes(dim_bytes) as usize;
    if dim == 0 || dim > 1 << 14 {
        return Err(Error::Domain(format!("implausible dump dimension {dim}")));
    }
    let mut m = CMat::zeros(dim, dim);
    let mut buf = [0u8; 16];
    for i in 0..dim {
        for j in 0..dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

impl DensityOperator {
    pub fn dump_binary<W: Write>(&self, w: W) -> Result<()> {
        write_matrix(w, self.matrix())
    }

    pub fn load_binary<R: Read>(n_sites: usize, spin: Spin, r: R) -> Result<Self> {
        DensityOperator::from_matrix(n_sites, spin, read_matrix(r)?)
    }
}
