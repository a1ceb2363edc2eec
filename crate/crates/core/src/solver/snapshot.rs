//! Snapshot files of a spinor field.
//!
//! Binary layout, little endian: the magic `SGSNAP01`, `u32 nx`, `u32 nz`,
//! `f64 half_x`, `f64 half_z`, `f64 dt`, `f64 t`, then `nx·nz` records of six
//! `f64`: `x, z, Re ψ+, Im ψ+, Re ψ-, Im ψ-` with `z` varying fastest.
//! Positions are in metres and amplitudes in m⁻¹ (the y factor excluded).
//! The text variant writes the same records as whitespace separated rows
//! after a `#` header line.

use super::{GridSpec, SpinorField};
use num_complex::Complex64;
use std::io::{self, Read, Write};

pub const MAGIC: &[u8; 8] = b"SGSNAP01";

/// One snapshot read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub nz: usize,
    pub half_x: f64,
    pub half_z: f64,
    pub dt: f64,
    pub t: f64,
    /// `(x, z, ψ+, ψ-)` per node.
    pub records: Vec<(f64, f64, Complex64, Complex64)>,
}

fn records(state: &SpinorField) -> impl Iterator<Item = (f64, f64, Complex64, Complex64)> + '_ {
    let scale = 1.0 / state.units().length;
    (0..state.nx).flat_map(move |ix| {
        (0..state.nz).map(move |iz| {
            let (x, z) = state.position(ix, iz);
            let i = ix * state.nz + iz;
            (x, z, state.plus[i] * scale, state.minus[i] * scale)
        })
    })
}

pub fn write_binary<W: Write>(out: &mut W, grid: &GridSpec, state: &SpinorField) -> io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(state.nx as u32).to_le_bytes())?;
    out.write_all(&(state.nz as u32).to_le_bytes())?;
    for v in [grid.half_x, grid.half_z, grid.dt, state.t] {
        out.write_all(&v.to_le_bytes())?;
    }
    for (x, z, p, m) in records(state) {
        for v in [x, z, p.re, p.im, m.re, m.im] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_text<W: Write>(out: &mut W, grid: &GridSpec, state: &SpinorField) -> io::Result<()> {
    writeln!(
        out,
        "# nx={} nz={} half_x={:e} half_z={:e} dt={:e} t={:e}",
        state.nx, state.nz, grid.half_x, grid.half_z, grid.dt, state.t
    )?;
    writeln!(out, "# x z re_plus im_plus re_minus im_minus")?;
    for (x, z, p, m) in records(state) {
        writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            x, z, p.re, p.im, m.re, m.im
        )?;
    }
    Ok(())
}

fn read_f64<R: Read>(input: &mut R) -> io::Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_u32<R: Read>(input: &mut R) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_binary<R: Read>(input: &mut R) -> io::Result<Snapshot> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "not a snapshot file",
        ));
    }
    let nx = read_u32(input)? as usize;
    let nz = read_u32(input)? as usize;
    let half_x = read_f64(input)?;
    let half_z = read_f64(input)?;
    let dt = read_f64(input)?;
    let t = read_f64(input)?;
    let mut records = Vec::with_capacity(nx * nz);
    for _ in 0..nx * nz {
        let mut v = [0.0; 6];
        for slot in v.iter_mut() {
            *slot = read_f64(input)?;
        }
        records.push((
            v[0],
            v[1],
            Complex64::new(v[2], v[3]),
            Complex64::new(v[4], v[5]),
        ));
    }
    Ok(Snapshot {
        nx,
        nz,
        half_x,
        half_z,
        dt,
        t,
        records,
    })
}
