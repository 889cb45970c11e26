//! Binary trajectory snapshots and CSV export.
//!
//! Layout (all little-endian): magic `CHTJ`, `u32` version, `f64` half
//! length `L`, `u64` points `N`, `u64` record count `K`, `K × f64` times,
//! then `K × N × f64` samples, record by record. A single field is stored
//! as one record at `t = 0`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{LabError, Result};
use crate::evolution::{Diagnostics, Trajectory};
use crate::spectral::{Field, GridSpec};

pub const MAGIC: [u8; 4] = *b"CHTJ";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot(w: &mut impl Write, times: &[f64], states: &[Field]) -> Result<()> {
    if times.len() != states.len() {
        return Err(LabError::InvalidArgument(format!(
            "{} times for {} states",
            times.len(),
            states.len()
        )));
    }
    let grid = match states.first() {
        Some(u) => u.grid(),
        None => {
            return Err(LabError::InvalidArgument(
                "cannot write an empty snapshot".into(),
            ))
        }
    };
    if states.iter().any(|u| u.grid() != grid) {
        return Err(LabError::GridMismatch);
    }
    w.write_all(&MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&grid.half_length().to_le_bytes())?;
    w.write_all(&(grid.points() as u64).to_le_bytes())?;
    w.write_all(&(states.len() as u64).to_le_bytes())?;
    for t in times {
        w.write_all(&t.to_le_bytes())?;
    }
    for u in states {
        for v in u.samples() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Returns `(times, states)`.
pub fn read_snapshot(r: &mut impl Read) -> Result<(Vec<f64>, Vec<Field>)> {
    let magic: [u8; 4] = read_array(r)?;
    if magic != MAGIC {
        return Err(LabError::Format(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != SNAPSHOT_VERSION {
        return Err(LabError::Version {
            found: version,
            expected: SNAPSHOT_VERSION,
        });
    }
    let half_length = f64::from_le_bytes(read_array(r)?);
    let points = u64::from_le_bytes(read_array(r)?);
    let count = u64::from_le_bytes(read_array(r)?);
    let points =
        usize::try_from(points).map_err(|_| LabError::Format("point count overflows".into()))?;
    let grid = GridSpec::new(half_length, points)?;
    if count == 0 || count > (1 << 32) {
        return Err(LabError::Format(format!(
            "implausible record count {count}"
        )));
    }
    let mut times = Vec::with_capacity(count as usize);
    for _ in 0..count {
        times.push(f64::from_le_bytes(read_array(r)?));
    }
    let mut states = Vec::with_capacity(count as usize);
    let mut bytes = vec![0u8; points * 8];
    for _ in 0..count {
        r.read_exact(&mut bytes)?;
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        states.push(Field::new(grid, samples)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(LabError::Format("trailing bytes after snapshot".into()));
    }
    Ok((times, states))
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, &traj.times, &traj.states)?;
    w.flush()?;
    Ok(())
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let (times, states) = read_snapshot(&mut BufReader::new(File::open(path)?))?;
    let diagnostics = states.iter().map(Diagnostics::of).collect();
    Ok(Trajectory {
        times,
        states,
        diagnostics,
    })
}

pub fn save_field(path: &Path, u: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, &[0.0], std::slice::from_ref(u))?;
    w.flush()?;
    Ok(())
}

/// Loads a snapshot holding exactly one record.
pub fn load_field(path: &Path) -> Result<Field> {
    let (_, mut states) = read_snapshot(&mut BufReader::new(File::open(path)?))?;
    if states.len() != 1 {
        return Err(LabError::Format(format!(
            "expected a single field, found {} records",
            states.len()
        )));
    }
    Ok(states.pop().expect("one record"))
}

/// Long-format CSV with columns `t,x,u`.
pub fn write_trajectory_csv(w: impl Write, traj: &Trajectory) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["t", "x", "u"])?;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let grid = u.grid();
        for (i, v) in u.samples().iter().enumerate() {
            csv.write_record([
                format!("{t:e}"),
                format!("{:e}", grid.x(i)),
                format!("{v:e}"),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}
