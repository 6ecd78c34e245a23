//! Binary field snapshots: a one-line JSON header followed by little-endian
//! IEEE-754 doubles, interleaved per grid point. Spinor fields store
//! (Re u, Im u, Re v, Im v); characteristic profiles store (Re w, Im w) on a
//! symmetric endpoint-inclusive grid.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characteristic::ScatteringProfile;
use crate::field::{GridError, LineGrid, SpinorField};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot header: {0}")]
    Header(String),
    #[error("snapshot holds {found} channels, expected {expected}")]
    ChannelMismatch { expected: u8, found: u8 },
    #[error("snapshot payload truncated")]
    Truncated,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Profile(#[from] crate::characteristic::ProfileError),
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotHeader {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    l: f64,
    t: f64,
    channels: u8,
}

fn write_header(w: &mut impl Write, header: &SnapshotHeader) -> Result<(), SnapshotError> {
    let line = serde_json::to_string(header).map_err(|e| SnapshotError::Header(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

fn read_header(r: &mut impl BufRead) -> Result<SnapshotHeader, SnapshotError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    serde_json::from_str(line.trim_end()).map_err(|e| SnapshotError::Header(e.to_string()))
}

fn write_doubles(
    w: &mut impl Write,
    values: impl Iterator<Item = f64>,
) -> Result<(), SnapshotError> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_doubles(r: &mut impl Read, count: usize) -> Result<Vec<f64>, SnapshotError> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|_| SnapshotError::Truncated)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_spinor<T: Real>(path: &Path, field: &SpinorField<T>) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = SnapshotHeader {
        n: field.n(),
        l: field.half_width().to_f64().unwrap(),
        t: field.time().to_f64().unwrap(),
        channels: 2,
    };
    write_header(&mut w, &header)?;
    write_doubles(
        &mut w,
        field
            .u()
            .iter()
            .zip(field.v())
            .flat_map(|(a, b)| [a.re, a.im, b.re, b.im].map(|x| x.to_f64().unwrap())),
    )?;
    Ok(())
}

pub fn read_spinor<T: Real>(path: &Path) -> Result<SpinorField<T>, SnapshotError> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.channels != 2 {
        return Err(SnapshotError::ChannelMismatch { expected: 2, found: header.channels });
    }
    let raw = read_doubles(&mut r, header.n * 4)?;
    let from = |x: f64| T::from_f64(x).unwrap();
    let u = raw.chunks_exact(4).map(|c| Complex::new(from(c[0]), from(c[1]))).collect();
    let v = raw.chunks_exact(4).map(|c| Complex::new(from(c[2]), from(c[3]))).collect();
    let mut field = SpinorField::new(u, v, from(header.l))?;
    field.set_time(from(header.t));
    Ok(field)
}

pub fn write_profile<T: Real>(
    path: &Path,
    profile: &ScatteringProfile<T>,
    tau: T,
) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = profile.grid();
    let header = SnapshotHeader {
        n: grid.n(),
        l: grid.xi_max().to_f64().unwrap(),
        t: tau.to_f64().unwrap(),
        channels: 1,
    };
    write_header(&mut w, &header)?;
    write_doubles(
        &mut w,
        profile.w().iter().flat_map(|z| [z.re, z.im].map(|x| x.to_f64().unwrap())),
    )?;
    Ok(())
}

pub fn read_profile<T: Real>(path: &Path) -> Result<(ScatteringProfile<T>, T), SnapshotError> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r)?;
    if header.channels != 1 {
        return Err(SnapshotError::ChannelMismatch { expected: 1, found: header.channels });
    }
    let raw = read_doubles(&mut r, header.n * 2)?;
    let from = |x: f64| T::from_f64(x).unwrap();
    let w: Vec<Complex<T>> =
        raw.chunks_exact(2).map(|c| Complex::new(from(c[0]), from(c[1]))).collect();
    let grid = LineGrid::symmetric(from(header.l), header.n)?;
    Ok((ScatteringProfile::new(w, grid)?, from(header.t)))
}
