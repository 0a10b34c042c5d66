//! CRC-aided polar codes: construction from the NR reliability sequence,
//! encoding, and successive-cancellation list decoding.
//!
//! Bit conventions: bits are `u8` values 0/1, LLRs are positive for bit 0.

mod crc;
pub mod golden;
mod reliability;
mod scl;

pub use crc::{crc_append, crc_append_checked, crc_check, CrcSpec};
pub use scl::{decode_scl, DecodeOutcome, ERASURE_LLR, LLR_CLAMP};

use crate::error::{Error, Result};

/// Information set of a polar code; all other bit channels are frozen to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateProfile {
    code_len: usize,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl RateProfile {
    /// Picks the `k` most reliable of the first `nc` bit channels.
    pub fn build(nc: usize, k: usize) -> Result<RateProfile> {
        if !nc.is_power_of_two() {
            return Err(Error::Profile {
                nc,
                k,
                reason: "code length is not a power of two",
            });
        }
        if nc > reliability::RELIABILITY_1024.len() {
            return Err(Error::Profile {
                nc,
                k,
                reason: "code length exceeds 1024",
            });
        }
        if k > nc {
            return Err(Error::Profile {
                nc,
                k,
                reason: "more information bits than code bits",
            });
        }
        let mut info_set: Vec<usize> = reliability::RELIABILITY_1024
            .iter()
            .map(|&i| usize::from(i))
            .filter(|&i| i < nc)
            .skip(nc - k)
            .collect();
        info_set.sort_unstable();
        let mut frozen = vec![true; nc];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(RateProfile {
            code_len: nc,
            info_set,
            frozen,
        })
    }

    pub fn code_len(&self) -> usize {
        self.code_len
    }

    pub fn info_len(&self) -> usize {
        self.info_set.len()
    }

    /// Sorted information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }
}

/// In-place `x = u F^{⊗m}` with `F = [[1, 0], [1, 1]]` (natural order).
pub(crate) fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut h = 1;
    while h < n {
        for block in bits.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        h *= 2;
    }
}

/// Places `info` on the information set and applies the polar transform.
pub fn encode(info: &[u8], profile: &RateProfile) -> Result<Vec<u8>> {
    if info.len() != profile.info_len() {
        return Err(Error::Length {
            expected: profile.info_len(),
            actual: info.len(),
        });
    }
    let mut u = vec![0u8; profile.code_len];
    for (&pos, &bit) in profile.info_set.iter().zip(info) {
        u[pos] = bit & 1;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// A CRC-aided polar code with a fixed list size.
#[derive(Debug, Clone)]
pub struct PolarCodec {
    profile: RateProfile,
    crc: CrcSpec,
    list_size: usize,
}

impl PolarCodec {
    /// Code carrying `payload_len` bits plus a `crc_width`-bit CRC in `nc` bits.
    pub fn new(nc: usize, payload_len: usize, crc_width: usize, list_size: usize) -> Result<Self> {
        let crc = CrcSpec::for_width(crc_width)?;
        let profile = RateProfile::build(nc, payload_len + crc_width)?;
        if list_size == 0 {
            return Err(Error::Config("list size must be positive".into()));
        }
        Ok(PolarCodec {
            profile,
            crc,
            list_size,
        })
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    pub fn crc(&self) -> &CrcSpec {
        &self.crc
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn payload_len(&self) -> usize {
        self.profile.info_len() - self.crc.width
    }

    /// CRC-append then polar-encode.
    pub fn encode_payload(&self, payload: &[u8]) -> Result<Vec<u8>> {
        let framed = crc_append_checked(payload, self.payload_len(), &self.crc)?;
        encode(&framed, &self.profile)
    }

    pub fn decode(&self, llr: &[f64]) -> DecodeOutcome {
        decode_scl(llr, &self.profile, &self.crc, self.list_size)
    }
}
