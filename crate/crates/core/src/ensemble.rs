//! Binary container for field ensembles.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `LCGF` |
//! | 4     | format version, `u32` (currently 1) |
//! | 4     | dimension `d`, `u32` |
//! | 4     | cutoff `N`, `u32` |
//! | 4     | grid size `G`, `u32` |
//! | 1     | reality flag, `u8`: 0 real, 1 complex |
//! | 8     | sample count, `u64` |
//!
//! followed by, for each sample, the coefficients of every lattice point in
//! lexicographic order as interleaved `(re, im)` IEEE-754 `f64` pairs.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField};
use crate::spectrum::{Lattice, LatticeSpec};

pub const MAGIC: &[u8; 4] = b"LCGF";
pub const VERSION: u32 = 1;

pub fn write_ensemble<W: Write>(mut out: W, fields: &[SpectralField]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Format("cannot write an empty ensemble".into()))?;
    let spec = *first.spec();
    let reality = first.reality();
    for f in fields {
        if *f.spec() != spec || f.reality() != reality {
            return Err(Error::Format("ensemble members differ in lattice or reality".into()));
        }
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(spec.dim() as u32).to_le_bytes())?;
    out.write_all(&(spec.cutoff() as u32).to_le_bytes())?;
    out.write_all(&(spec.grid() as u32).to_le_bytes())?;
    out.write_all(&[match reality {
        Reality::Real => 0u8,
        Reality::Complex => 1u8,
    }])?;
    out.write_all(&(fields.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(first.coeffs().len() * 16);
    for f in fields {
        buf.clear();
        for c in f.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_ensemble<R: Read>(mut input: R) -> Result<Vec<SpectralField>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut input)? as usize;
    let cutoff = read_u32(&mut input)? as usize;
    let grid = read_u32(&mut input)? as usize;
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag)?;
    let reality = match flag[0] {
        0 => Reality::Real,
        1 => Reality::Complex,
        other => return Err(Error::Format(format!("bad reality flag {other}"))),
    };
    let mut count = [0u8; 8];
    input.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count) as usize;
    let lattice: Arc<Lattice> = Lattice::new(LatticeSpec::with_grid(dim, cutoff, grid)?);
    let mut raw = vec![0u8; lattice.len() * 16];
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        input.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..].try_into().unwrap()),
                )
            })
            .collect();
        fields.push(SpectralField::from_coeffs(lattice.clone(), coeffs, reality)?);
    }
    Ok(fields)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, GaussLaw};
    use crate::rng::substream;

    #[test]
    fn header_layout_and_round_trip() {
        let lat = Lattice::new(LatticeSpec::new(2, 2).unwrap());
        let law = GaussLaw::log_correlated(Reality::Real);
        let fields: Vec<_> = (0..3).map(|s| sample(&law, &lat, &mut substream(4, s)).unwrap()).collect();
        let mut bytes = Vec::new();
        write_ensemble(&mut bytes, &fields).unwrap();
        assert_eq!(&bytes[..4], b"LCGF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 9);
        assert_eq!(bytes[20], 0);
        assert_eq!(u64::from_le_bytes(bytes[21..29].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 29 + 3 * lat.len() * 16);
        // first coefficient is the lexicographically smallest point (-2, 0)
        let re = f64::from_le_bytes(bytes[29..37].try_into().unwrap());
        assert_eq!(re, fields[0].coeff(&[-2, 0]).unwrap().re);

        let back = read_ensemble(&bytes[..]).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in fields.iter().zip(&back) {
            assert_eq!(a.coeffs(), b.coeffs());
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_ensemble(&b"XXXX\x01\x00\x00\x00"[..]).is_err());
        assert!(write_ensemble(Vec::new(), &[]).is_err());
    }
}
