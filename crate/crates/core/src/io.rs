//! On-disk formats.
//!
//! Ensemble files (`ensemble_<n>.bin`), all integers and floats
//! little-endian:
//!
//! ```text
//! offset  size  field
//!      0     8  magic "SDINCENS"
//!      8     1  format version (1)
//!      9     4  dE (u32)
//!     13     4  dH (u32)
//!     17     8  paths (u64)
//!     25     8  steps (u64)
//!     33     8  T (f64)
//!     41     8  dt (f64)
//!     49     8  n (u64; 0 for lag-free ensembles)
//!     57     8  seed (u64)
//!     65     8  scenario hash (u64)
//!     73     …  paths × (steps + 1) × dE f64, row-major
//! ```
//!
//! Stored selections are not written. CSV files start with a
//! `# scenario <hash>` comment line.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::tonelli::PathEnsemble;

pub const MAGIC: &[u8; 8] = b"SDINCENS";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 73;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt ensemble file: {0}")]
    Corrupt(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn encode_ensemble(x: &PathEnsemble) -> Vec<u8> {
    let mut b = Vec::with_capacity(HEADER_LEN + 8 * x.trajectories().len());
    b.extend_from_slice(MAGIC);
    b.push(FORMAT_VERSION);
    b.extend_from_slice(&(x.de() as u32).to_le_bytes());
    b.extend_from_slice(&(x.dh() as u32).to_le_bytes());
    b.extend_from_slice(&(x.paths() as u64).to_le_bytes());
    b.extend_from_slice(&(x.steps() as u64).to_le_bytes());
    b.extend_from_slice(&x.horizon().to_le_bytes());
    b.extend_from_slice(&x.dt().to_le_bytes());
    b.extend_from_slice(&x.n().unwrap_or(0).to_le_bytes());
    b.extend_from_slice(&x.seed().to_le_bytes());
    b.extend_from_slice(&x.scenario_hash().to_le_bytes());
    for v in x.trajectories() {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

pub fn decode_ensemble(b: &[u8]) -> Result<PathEnsemble, IoError> {
    let corrupt = |m: String| IoError::Corrupt(m);
    if b.len() < HEADER_LEN || &b[..8] != MAGIC {
        return Err(corrupt("missing magic number".into()));
    }
    if b[8] != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {}", b[8])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().expect("4 bytes")) as usize;
    let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().expect("8 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().expect("8 bytes"));
    let (de, dh) = (u32_at(9), u32_at(13));
    let (paths, steps) = (u64_at(17), u64_at(25));
    let (horizon, dt) = (f64_at(33), f64_at(41));
    let n = u64_at(49);
    let (seed, hash) = (u64_at(57), u64_at(65));
    let count = paths
        .checked_mul(steps.checked_add(1).ok_or_else(|| corrupt("step count overflows".into()))?)
        .and_then(|v| v.checked_mul(de as u64))
        .ok_or_else(|| corrupt("header sizes overflow".into()))?;
    let expected = (count as usize).checked_mul(8).and_then(|v| v.checked_add(HEADER_LEN));
    if expected != Some(b.len()) {
        return Err(corrupt(format!(
            "header announces {count} values but the file holds {} bytes of data",
            b.len() - HEADER_LEN
        )));
    }
    let data: Vec<f64> = b[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let x = PathEnsemble::from_trajectories(hash, (n > 0).then_some(n), dt, horizon, de, dh, seed, data)
        .map_err(|e| corrupt(e.to_string()))?;
    if x.steps() as u64 != steps || (x.paths() as u64 != paths && paths > 0) {
        return Err(corrupt(format!("grid T = {horizon}, dt = {dt} does not give {steps} steps")));
    }
    Ok(x)
}

pub fn write_ensemble(path: &Path, x: &PathEnsemble) -> Result<(), IoError> {
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_ensemble(x)).map_err(io_err(path))
}

pub fn read_ensemble(path: &Path) -> Result<PathEnsemble, IoError> {
    let mut b = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut b))
        .map_err(io_err(path))?;
    decode_ensemble(&b)
}

/// `# scenario <hash>` followed by `header` and `rows`.
pub fn csv_text(hash: u64, header: &str, rows: &[String]) -> String {
    let mut s = format!("# scenario {hash:016x}\n{header}\n");
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}
