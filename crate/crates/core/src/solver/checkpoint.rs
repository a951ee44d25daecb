//! `MHDS1` checkpoint files.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 5     | magic `MHDS1` |
//! | 8     | `n` as `u64` |
//! | 8     | `t` as `f64` |
//! | 8     | `nu` as `f64` |
//! | 8     | `eta` as `f64` |
//! | 48·n³ | `û`: per mode `(re, im)` of components x, y, z as `f64` |
//! | 48·n³ | `b̂`, same layout |
//!
//! Modes run in lexicographic order of `(ξx, ξy, ξz)`, each from `−n/2+1`
//! to `n/2`, with `ξx` slowest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::MhdState;
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, WavenumberGrid, ZERO};

pub const MAGIC: &[u8; 5] = b"MHDS1";
const HEADER_LEN: usize = 5 + 4 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: MhdState,
    pub nu: f64,
    pub eta: f64,
}

/// Flat storage indices in lexicographic mode order.
fn lexicographic(grid: WavenumberGrid) -> impl Iterator<Item = usize> {
    let half = (grid.n() / 2) as i64;
    let range = move || (-half + 1)..=half;
    range().flat_map(move |x| {
        range().flat_map(move |y| {
            range().map(move |z| grid.index_of([x, y, z]).expect("mode on lattice"))
        })
    })
}

fn write_field<W: Write>(w: &mut W, field: &SpectralField) -> std::io::Result<()> {
    for idx in lexicographic(field.grid()) {
        for z in field.at(idx) {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write<W: Write>(mut w: W, state: &MhdState, nu: f64, eta: f64) -> Result<()> {
    let grid = state.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    for v in [state.t, nu, eta] {
        w.write_all(&v.to_le_bytes())?;
    }
    write_field(&mut w, &state.u_hat)?;
    write_field(&mut w, &state.b_hat)?;
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, state: &MhdState, nu: f64, eta: f64) -> Result<()> {
    let f = File::create(path)?;
    write(BufWriter::new(f), state, nu, eta)
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap())
}

fn read_field(bytes: &[u8], grid: WavenumberGrid) -> SpectralField {
    let len = grid.len();
    let mut comps = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    for (m, idx) in lexicographic(grid).enumerate() {
        for (c, comp) in comps.iter_mut().enumerate() {
            let off = (m * 3 + c) * 16;
            comp[idx] = Complex64::new(f64_at(bytes, off), f64_at(bytes, off + 8));
        }
    }
    SpectralField::from_components(grid, comps).expect("lengths match")
}

pub fn read<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(Error::Checkpoint("missing MHDS1 header".into()));
    }
    let n = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| Error::Checkpoint(format!("grid size {n} too large")))?;
    let grid = WavenumberGrid::new(n).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let t = f64_at(&bytes, 13);
    let nu = f64_at(&bytes, 21);
    let eta = f64_at(&bytes, 29);
    let field_bytes = grid.len() * 48;
    let expected = HEADER_LEN + 2 * field_bytes;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..];
    let mut u_hat = read_field(&body[..field_bytes], grid);
    let mut b_hat = read_field(&body[field_bytes..], grid);
    for f in [&mut u_hat, &mut b_hat] {
        let scale = f.max_abs() * n as f64;
        let solenoidal = crate::spectral::divergence_max(f) <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        f.mark_solenoidal(solenoidal);
    }
    Ok(Checkpoint {
        state: MhdState::new(u_hat, b_hat, t),
        nu,
        eta,
    })
}

pub fn read_file(path: &Path) -> Result<Checkpoint> {
    let f = File::open(path)
        .map_err(|e| Error::Checkpoint(format!("cannot open {}: {e}", path.display())))?;
    read(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::orszag_tang;

    #[test]
    fn header_layout_is_fixed() {
        let grid = WavenumberGrid::new(4).unwrap();
        let mut s = MhdState::zero(grid);
        s.t = 1.5;
        let mut buf = Vec::new();
        write(&mut buf, &s, 0.25, 0.125).unwrap();
        assert_eq!(&buf[..5], b"MHDS1");
        assert_eq!(u64::from_le_bytes(buf[5..13].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(buf[13..21].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(buf[21..29].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(buf[29..37].try_into().unwrap()), 0.125);
        assert_eq!(buf.len(), 37 + 2 * 64 * 48);
    }

    #[test]
    fn first_record_is_most_negative_mode() {
        let grid = WavenumberGrid::new(4).unwrap();
        let mut s = MhdState::zero(grid);
        s.u_hat.component_mut(1)[grid.index_of([-1, -1, -1]).unwrap()] = Complex64::new(2.0, -3.0);
        let mut buf = Vec::new();
        write(&mut buf, &s, 0.0, 0.0).unwrap();
        // component y of the first mode starts 16 bytes into the body
        assert_eq!(f64_at(&buf, 37 + 16), 2.0);
        assert_eq!(f64_at(&buf, 37 + 24), -3.0);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = WavenumberGrid::new(8).unwrap();
        let mut s = orszag_tang(grid, 0.8);
        s.t = 0.375;
        let mut buf = Vec::new();
        write(&mut buf, &s, 0.01, 0.02).unwrap();
        let ck = read(&buf[..]).unwrap();
        assert_eq!(ck.state, s);
        assert_eq!((ck.nu, ck.eta), (0.01, 0.02));
        assert!(ck.state.u_hat.is_solenoidal());
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(read(&b"MHDS2...................................."[..]).is_err());
        let grid = WavenumberGrid::new(4).unwrap();
        let mut buf = Vec::new();
        write(&mut buf, &MhdState::zero(grid), 0.0, 0.0).unwrap();
        buf.pop();
        assert!(read(&buf[..]).is_err());
    }
}
