//! The common pilot codebook and ODMA pattern matrix.
//!
//! Column `j` of both is selected by the integer value `j` of a user's first
//! `Bp` message bits.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// `np × N` complex pilots, each column of norm `sqrt(np Pp)`.
#[derive(Debug, Clone)]
pub struct PilotCodebook {
    len: usize,
    /// Column-major.
    entries: Vec<Complex64>,
    pilot_norm: f64,
}

impl PartialEq for PilotCodebook {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.entries == other.entries
    }
}

impl PilotCodebook {
    /// Draws i.i.d. complex Gaussian entries and rescales every column to
    /// norm `sqrt(np Pp)`.
    pub fn generate<R: Rng>(cfg: &SystemConfig, rng: &mut R) -> PilotCodebook {
        let np = cfg.np;
        let pilot_norm = (np as f64 * cfg.pp).sqrt();
        let mut entries = Vec::with_capacity(np * cfg.num_pilots);
        for _ in 0..cfg.num_pilots {
            let start = entries.len();
            for _ in 0..np {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                entries.push(Complex64::new(re, im));
            }
            let col = &mut entries[start..];
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let scale = if norm > 0.0 { pilot_norm / norm } else { 0.0 };
            for z in col.iter_mut() {
                *z *= scale;
            }
        }
        PilotCodebook {
            len: np,
            entries,
            pilot_norm,
        }
    }

    pub fn from_columns(len: usize, entries: Vec<Complex64>) -> Result<PilotCodebook> {
        if len == 0 || !entries.len().is_multiple_of(len) {
            return Err(Error::Format {
                what: "pilot codebook",
                detail: format!("{} entries do not form columns of length {len}", entries.len()),
            });
        }
        let pilot_norm = entries[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(PilotCodebook {
            len,
            entries,
            pilot_norm,
        })
    }

    /// Pilot length `np`.
    pub fn pilot_len(&self) -> usize {
        self.len
    }

    pub fn num_pilots(&self) -> usize {
        self.entries.len() / self.len.max(1)
    }

    pub fn pilot_norm(&self) -> f64 {
        self.pilot_norm
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.entries[j * self.len..(j + 1) * self.len]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.len)
    }
}

/// `(n - np) × N` binary matrix with exactly `nd` ones per column, stored as
/// the sorted row indices of the ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatrix {
    rows: usize,
    weight: usize,
    active: Vec<Vec<usize>>,
}

impl PatternMatrix {
    /// Each column is an independent uniformly random `nd`-subset of rows.
    pub fn generate<R: Rng>(cfg: &SystemConfig, rng: &mut R) -> Result<PatternMatrix> {
        let rows = cfg.n.saturating_sub(cfg.np);
        let weight = cfg.nd();
        if weight > rows {
            return Err(Error::PatternWeight { weight, rows });
        }
        let mut scratch: Vec<usize> = (0..rows).collect();
        let active = (0..cfg.num_pilots)
            .map(|_| {
                let (chosen, _) = scratch.partial_shuffle(rng, weight);
                let mut col = chosen.to_vec();
                col.sort_unstable();
                col
            })
            .collect();
        Ok(PatternMatrix {
            rows,
            weight,
            active,
        })
    }

    pub fn from_active(rows: usize, active: Vec<Vec<usize>>) -> Result<PatternMatrix> {
        let weight = active.first().map_or(0, Vec::len);
        for col in &active {
            let sorted = col.windows(2).all(|w| w[0] < w[1]);
            if col.len() != weight || !sorted || col.last().is_some_and(|&r| r >= rows) {
                return Err(Error::Format {
                    what: "pattern matrix",
                    detail: "columns must be strictly increasing row sets of equal weight".into(),
                });
            }
        }
        Ok(PatternMatrix {
            rows,
            weight,
            active,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn num_columns(&self) -> usize {
        self.active.len()
    }

    /// Sorted rows (offsets within the data part) where column `j` is one.
    pub fn active_rows(&self, j: usize) -> &[usize] {
        &self.active[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.active[col].binary_search(&row).is_ok()
    }
}

const SIDECAR_MAGIC: &[u8; 8] = b"URACODE1";

/// Writes both codebooks in the binary sidecar layout:
///
/// ```text
/// magic "URACODE1"
/// u64 LE: np, N, rows (n - np), nd
/// pilots: np × N complex, row-major, each entry as (re, im) f64 LE
/// patterns: rows × N bits, row-major, packed LSB-first into bytes
/// ```
pub fn write_sidecar<W: Write>(
    mut w: W,
    pilots: &PilotCodebook,
    patterns: &PatternMatrix,
) -> Result<()> {
    let n_cols = pilots.num_pilots();
    if patterns.num_columns() != n_cols {
        return Err(Error::Format {
            what: "codebook sidecar",
            detail: "pilot and pattern column counts differ".into(),
        });
    }
    w.write_all(SIDECAR_MAGIC)?;
    for v in [pilots.pilot_len(), n_cols, patterns.rows(), patterns.weight()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for row in 0..pilots.pilot_len() {
        for col in 0..n_cols {
            let z = pilots.column(col)[row];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    let mut bits = vec![0u8; (patterns.rows() * n_cols).div_ceil(8)];
    for col in 0..n_cols {
        for &row in patterns.active_rows(col) {
            let idx = row * n_cols + col;
            bits[idx / 8] |= 1 << (idx % 8);
        }
    }
    w.write_all(&bits)?;
    Ok(())
}

pub fn read_sidecar<R: Read>(mut r: R) -> Result<(PilotCodebook, PatternMatrix)> {
    let bad = |detail: &str| Error::Format {
        what: "codebook sidecar",
        detail: detail.to_string(),
    };
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SIDECAR_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut header = [0usize; 4];
    for h in header.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *h = usize::try_from(u64::from_le_bytes(b)).map_err(|_| bad("header overflow"))?;
    }
    let [np, n_cols, rows, weight] = header;
    if np == 0 || n_cols == 0 || np.saturating_mul(n_cols) > 1 << 28 {
        return Err(bad("implausible dimensions"));
    }
    let mut entries = vec![Complex64::default(); np * n_cols];
    let mut b = [0u8; 8];
    for row in 0..np {
        for col in 0..n_cols {
            r.read_exact(&mut b)?;
            let re = f64::from_le_bytes(b);
            r.read_exact(&mut b)?;
            let im = f64::from_le_bytes(b);
            entries[col * np + row] = Complex64::new(re, im);
        }
    }
    let mut bits = vec![0u8; (rows * n_cols).div_ceil(8)];
    r.read_exact(&mut bits)?;
    let mut active = vec![Vec::with_capacity(weight); n_cols];
    for row in 0..rows {
        for (col, a) in active.iter_mut().enumerate() {
            let idx = row * n_cols + col;
            if bits[idx / 8] >> (idx % 8) & 1 == 1 {
                a.push(row);
            }
        }
    }
    if active.iter().any(|a| a.len() != weight) {
        return Err(bad("column weight does not match header"));
    }
    Ok((
        PilotCodebook::from_columns(np, entries)?,
        PatternMatrix::from_active(rows, active)?,
    ))
}
