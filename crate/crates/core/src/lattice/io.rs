//! Flat binary and CSV forms of field snapshots.
//!
//! Binary layout (little-endian): `h: f64`, `n_points: u64`, `t: f64`,
//! then `n_points` complex values as `(re: f64, im: f64)` pairs. A trajectory
//! is a concatenation of snapshots on one lattice with increasing times.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{LatticeError, LatticeField, LatticeGrid};
use crate::trajectory::SolutionTrajectory;

/// Size of the snapshot header in bytes.
pub const SNAPSHOT_HEADER_BYTES: usize = 24;

/// A field at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: LatticeField,
}

/// Binary encoding of one snapshot.
pub fn encode_snapshot(field: &LatticeField, t: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_BYTES + 16 * field.values().len());
    write_snapshot(&mut out, field, t);
    out
}

fn write_snapshot(out: &mut Vec<u8>, field: &LatticeField, t: f64) {
    out.extend_from_slice(&field.grid().h().to_le_bytes());
    out.extend_from_slice(&(field.grid().n_points() as u64).to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

/// Binary encoding of every snapshot of a trajectory.
pub fn encode_trajectory(traj: &SolutionTrajectory) -> Vec<u8> {
    let n = traj.grid().n_points();
    let mut out = Vec::with_capacity(traj.snapshots().len() * (SNAPSHOT_HEADER_BYTES + 16 * n));
    for (j, snap) in traj.snapshots().iter().enumerate() {
        write_snapshot(&mut out, snap, traj.time().node(j));
    }
    out
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[at..at + 8]);
    f64::from_le_bytes(b)
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[at..at + 8]);
    u64::from_le_bytes(b)
}

/// Decode one snapshot starting at the beginning of `bytes`; returns it with
/// the number of bytes consumed.
fn decode_prefix(bytes: &[u8]) -> Result<(Snapshot, usize), LatticeError> {
    if bytes.len() < SNAPSHOT_HEADER_BYTES {
        return Err(LatticeError::Decode(format!(
            "need {SNAPSHOT_HEADER_BYTES} header bytes, found {}",
            bytes.len()
        )));
    }
    let h = read_f64(bytes, 0);
    let n = read_u64(bytes, 8);
    let t = read_f64(bytes, 16);
    if !t.is_finite() {
        return Err(LatticeError::Decode(format!("time {t} is not finite")));
    }
    let body = bytes.len() - SNAPSHOT_HEADER_BYTES;
    let needed =
        n.checked_mul(16).filter(|&b| b <= body as u64).ok_or_else(|| {
            LatticeError::Decode(format!("{n} points need more than the {body} payload bytes present"))
        })? as usize;
    let grid = LatticeGrid::new(h, n as usize).map_err(|e| LatticeError::Decode(e.to_string()))?;
    let mut values = Vec::with_capacity(n as usize);
    for i in 0..n as usize {
        let at = SNAPSHOT_HEADER_BYTES + 16 * i;
        let v = Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LatticeError::Decode(format!("value {i} is not finite")));
        }
        values.push(v);
    }
    let field = LatticeField::new(grid, values)?;
    Ok((Snapshot { t, field }, SNAPSHOT_HEADER_BYTES + needed))
}

/// Decode a single snapshot; trailing bytes are an error.
pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot, LatticeError> {
    let (snap, used) = decode_prefix(bytes)?;
    if used != bytes.len() {
        return Err(LatticeError::Decode(format!("{} trailing bytes", bytes.len() - used)));
    }
    Ok(snap)
}

/// Decode a concatenation of snapshots sharing one lattice, with strictly
/// increasing times.
pub fn decode_trajectory(bytes: &[u8]) -> Result<Vec<Snapshot>, LatticeError> {
    if bytes.is_empty() {
        return Err(LatticeError::Decode("empty trajectory".into()));
    }
    let mut out: Vec<Snapshot> = Vec::new();
    let mut at = 0;
    while at < bytes.len() {
        let (snap, used) = decode_prefix(&bytes[at..])?;
        if let Some(prev) = out.last() {
            if !prev.field.grid().same_as(snap.field.grid()) {
                return Err(LatticeError::Decode(format!(
                    "snapshot {} changes the lattice",
                    out.len()
                )));
            }
            if snap.t <= prev.t {
                return Err(LatticeError::Decode(format!(
                    "snapshot {} has time {} not after {}",
                    out.len(),
                    snap.t,
                    prev.t
                )));
            }
        }
        out.push(snap);
        at += used;
    }
    Ok(out)
}

/// CSV rendering with columns `t,m,x,re,im`.
pub fn snapshot_csv(field: &LatticeField, t: f64) -> String {
    let g = field.grid();
    let mut s = String::with_capacity(48 * g.n_points() + 16);
    s.push_str("t,m,x,re,im\n");
    for (i, v) in field.values().iter().enumerate() {
        let _ = writeln!(s, "{t:e},{},{:e},{:e},{:e}", g.site_index(i), g.site(i), v.re, v.im);
    }
    s
}
