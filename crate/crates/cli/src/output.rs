//! Number formatting and the binary path-ensemble layout.
//!
//! `RMPE` v1 layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `b"RMPE"` |
//! | 4 | version `u32` = 1 |
//! | 8 | `n_paths` as `u64` |
//! | 8 | `n_times` as `u64` |
//! | 8·n_times | recorded times, `f64` |
//! | 8·n_paths·n_times | wealth, `f64`, row-major (path by path) |
//! | 8·n_paths·n_times | consumption, `f64`, row-major |

use std::io::{self, Read, Write};

use nalgebra::{DMatrix, DVector};
use robust_merton::sim::PathEnsemble;

pub const MAGIC: &[u8; 4] = b"RMPE";
pub const VERSION: u32 = 1;

/// Full round-trip precision (17 significant digits).
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn short(x: f64) -> String {
    format!("{x:.4}")
}

/// A scalar for one asset, a bracketed list otherwise.
pub fn short_vec(v: &[f64]) -> String {
    if v.len() == 1 {
        return short(v[0]);
    }
    format!("[{}]", v.iter().map(|x| short(*x)).collect::<Vec<_>>().join(", "))
}

pub fn short_mat(rows: &[Vec<f64>]) -> String {
    format!(
        "[{}]",
        rows.iter()
            .map(|r| format!("[{}]", r.iter().map(|x| short(*x)).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

pub fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn write_ensemble<W: Write>(mut w: W, ens: &PathEnsemble) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(ens.n_paths as u64).to_le_bytes())?;
    w.write_all(&(ens.n_times() as u64).to_le_bytes())?;
    for x in ens.times.iter().chain(&ens.wealth).chain(&ens.consumption) {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()
}

/// Contents of an `RMPE` file.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFile {
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub wealth: Vec<f64>,
    pub consumption: Vec<f64>,
}

pub fn read_ensemble<R: Read>(mut r: R) -> io::Result<EnsembleFile> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not an RMPE file"));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    if u32::from_le_bytes(word) != VERSION {
        return Err(bad("unsupported RMPE version"));
    }
    let mut long = [0u8; 8];
    r.read_exact(&mut long)?;
    let n_paths = u64::from_le_bytes(long) as usize;
    r.read_exact(&mut long)?;
    let n_times = u64::from_le_bytes(long) as usize;
    let mut floats = |count: usize| -> io::Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                r.read_exact(&mut long)?;
                Ok(f64::from_le_bytes(long))
            })
            .collect()
    };
    let times = floats(n_times)?;
    let wealth = floats(n_paths * n_times)?;
    let consumption = floats(n_paths * n_times)?;
    Ok(EnsembleFile {
        n_paths,
        times,
        wealth,
        consumption,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
