//! Field snapshot format and norm-series CSV export.
//!
//! Snapshot layout (all little-endian):
//!
//! ```text
//! magic    8 bytes  "NSE2DSNP"
//! version  u32      1
//! n        u32      grid points per dimension
//! l        f64      box side length
//! nu       f64      kinematic viscosity
//! t        f64      model time of the snapshot
//! ux       n*n * (re: f64, im: f64)   row-major wavevector order
//! uy       n*n * (re: f64, im: f64)
//! ```

use super::field::{Norms, SpectralVelocity};
use super::grid::FourierGrid;
use super::NseError;
use num_complex::Complex64;
use std::io::{Read, Write};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"NSE2DSNP";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n: u32,
    pub l: f64,
    pub nu: f64,
    pub t: f64,
}

pub fn write_snapshot<W: Write>(
    w: &mut W,
    header: &SnapshotHeader,
    u: &SpectralVelocity,
) -> Result<(), NseError> {
    if u.n() as u32 != header.n {
        return Err(NseError::ForcingMismatch {
            field_n: u.n(),
            grid_n: header.n as usize,
        });
    }
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&header.n.to_le_bytes())?;
    w.write_all(&header.l.to_le_bytes())?;
    w.write_all(&header.nu.to_le_bytes())?;
    w.write_all(&header.t.to_le_bytes())?;
    for comp in [&u.ux, &u.uy] {
        for c in comp {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NseError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, NseError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<(SnapshotHeader, SpectralVelocity), NseError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(NseError::BadSnapshot {
            reason: "bad magic".into(),
        });
    }
    let version = read_u32(r)?;
    if version != SNAPSHOT_VERSION {
        return Err(NseError::BadSnapshot {
            reason: format!("unsupported version {version}"),
        });
    }
    let n = read_u32(r)?;
    let l = read_f64(r)?;
    let nu = read_f64(r)?;
    let t = read_f64(r)?;
    let nn = (n as usize) * (n as usize);
    let read_comp = |r: &mut R| -> Result<Vec<Complex64>, NseError> {
        let mut v = Vec::with_capacity(nn);
        for _ in 0..nn {
            let re = read_f64(r)?;
            let im = read_f64(r)?;
            v.push(Complex64::new(re, im));
        }
        Ok(v)
    };
    let ux = read_comp(r)?;
    let uy = read_comp(r)?;
    let grid = FourierGrid::new(n as usize, l)?;
    let u = SpectralVelocity::from_components(&grid, ux, uy);
    Ok((SnapshotHeader { n, l, nu, t }, u))
}

/// Norm series CSV: metadata comments, then `t,l2,h1,h2` rows.
pub fn write_norm_series_csv<W: Write>(
    w: &mut W,
    meta: &std::collections::BTreeMap<String, String>,
    series: &[(f64, Norms)],
) -> std::io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "t,l2,h1,h2")?;
    for (t, n) in series {
        writeln!(w, "{},{},{},{}", t, n.l2, n.h1, n.h2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nse2d::field::random_dealiased;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let grid = FourierGrid::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = random_dealiased(&grid, &mut rng, 1.7);
        let header = SnapshotHeader {
            n: 16,
            l: grid.l(),
            nu: 0.05,
            t: 12.5,
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &header, &u).unwrap();
        let (h2, u2) = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(h2, header);
        assert_eq!(u2, u);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        let mut buf = b"NOTASNAP".to_vec();
        buf.extend_from_slice(&[0u8; 64]);
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(NseError::BadSnapshot { .. })
        ));
    }

    #[test]
    fn norm_series_csv_shape() {
        let mut meta = std::collections::BTreeMap::new();
        meta.insert("nu".to_string(), "0.1".to_string());
        let series = vec![(
            0.0,
            Norms {
                l2: 1.0,
                h1: 2.0,
                h2: 4.0,
            },
        )];
        let mut buf = Vec::new();
        write_norm_series_csv(&mut buf, &meta, &series).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# nu=0.1\nt,l2,h1,h2\n0,1,2,4\n"));
    }
}
