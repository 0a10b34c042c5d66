//! Text golden vectors for cross-checking other polar encoders.
//!
//! One frame per line: the information bits (payload plus CRC) as a 0/1
//! string, a single space, then the codeword bits. Lines starting with `#`
//! are comments.

use std::io::{BufRead, Write};

use rand::Rng;

use super::{crc_append, encode, CrcSpec, RateProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenFrame {
    pub info: Vec<u8>,
    pub codeword: Vec<u8>,
}

pub fn generate<R: Rng>(
    profile: &RateProfile,
    crc: &CrcSpec,
    frames: usize,
    rng: &mut R,
) -> Vec<GoldenFrame> {
    let payload_len = profile.info_len() - crc.width;
    (0..frames)
        .map(|_| {
            let payload: Vec<u8> = (0..payload_len).map(|_| rng.random_range(0..2u8)).collect();
            let info = crc_append(&payload, crc);
            let codeword = encode(&info, profile).expect("info length matches profile");
            GoldenFrame { info, codeword }
        })
        .collect()
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

fn parse_bits(s: &str, line: usize) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Format {
                what: "golden vector",
                detail: format!("line {line}: unexpected character {other:?}"),
            }),
        })
        .collect()
}

pub fn write<W: Write>(mut w: W, profile: &RateProfile, frames: &[GoldenFrame]) -> Result<()> {
    writeln!(w, "# nc={} k={}", profile.code_len(), profile.info_len())?;
    for f in frames {
        writeln!(w, "{} {}", bit_string(&f.info), bit_string(&f.codeword))?;
    }
    Ok(())
}

pub fn read<R: BufRead>(r: R) -> Result<Vec<GoldenFrame>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(info), Some(cw), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format {
                what: "golden vector",
                detail: format!("line {}: expected two fields", idx + 1),
            });
        };
        out.push(GoldenFrame {
            info: parse_bits(info, idx + 1)?,
            codeword: parse_bits(cw, idx + 1)?,
        });
    }
    Ok(out)
}

/// Indices of frames whose codeword differs from this encoder's output or
/// whose CRC does not check.
pub fn verify(frames: &[GoldenFrame], profile: &RateProfile, crc: &CrcSpec) -> Vec<usize> {
    frames
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            !super::crc_check(&f.info, crc)
                || encode(&f.info, profile).map_or(true, |cw| cw != f.codeword)
        })
        .map(|(i, _)| i)
        .collect()
}
