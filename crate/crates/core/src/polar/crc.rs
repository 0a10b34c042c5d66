//! Bit-serial CRC over MSB-first bit vectors.

use crate::error::{Error, Result};

/// Unreflected CRC parameters. `poly` omits the leading `x^width` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcSpec {
    pub width: usize,
    pub poly: u32,
    pub init: u32,
    pub xor_out: u32,
}

impl CrcSpec {
    /// CRC-16/CCITT polynomial `x^16 + x^12 + x^5 + 1`, zero init.
    pub const CCITT16: CrcSpec = CrcSpec {
        width: 16,
        poly: 0x1021,
        init: 0,
        xor_out: 0,
    };

    /// The zero-initialised CRC of the given width. Widths other than 16
    /// use the NR uplink polynomials (CRC6, CRC11, CRC24C).
    pub fn for_width(width: usize) -> Result<CrcSpec> {
        let poly = match width {
            6 => 0x21,
            11 => 0x621,
            16 => return Ok(Self::CCITT16),
            24 => 0xB2_B117,
            w => return Err(Error::CrcWidth(w)),
        };
        Ok(CrcSpec {
            width,
            poly,
            init: 0,
            xor_out: 0,
        })
    }

    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1u32 << self.width) - 1
        }
    }

    /// CRC register after shifting in `bits` (each 0 or 1), MSB first.
    pub fn checksum(&self, bits: &[u8]) -> u32 {
        let mask = self.mask();
        let top = self.width - 1;
        let mut reg = self.init & mask;
        for &bit in bits {
            let feedback = ((reg >> top) & 1) ^ u32::from(bit & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        (reg ^ self.xor_out) & mask
    }
}

/// Appends `spec.width` CRC bits (MSB first) to `bits`.
pub fn crc_append(bits: &[u8], spec: &CrcSpec) -> Vec<u8> {
    let crc = spec.checksum(bits);
    let mut out = Vec::with_capacity(bits.len() + spec.width);
    out.extend_from_slice(bits);
    out.extend((0..spec.width).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

/// Same as [`crc_append`] but checks the payload length first.
pub fn crc_append_checked(bits: &[u8], expected_len: usize, spec: &CrcSpec) -> Result<Vec<u8>> {
    if bits.len() != expected_len {
        return Err(Error::Length {
            expected: expected_len,
            actual: bits.len(),
        });
    }
    Ok(crc_append(bits, spec))
}

/// True when the trailing `spec.width` bits are the CRC of the leading ones.
pub fn crc_check(frame: &[u8], spec: &CrcSpec) -> bool {
    if frame.len() < spec.width {
        return false;
    }
    let (payload, tail) = frame.split_at(frame.len() - spec.width);
    let crc = spec.checksum(payload);
    tail.iter()
        .enumerate()
        .all(|(i, &b)| u32::from(b & 1) == (crc >> (spec.width - 1 - i)) & 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Byte-wise table-driven CRC-16/CCITT (zero init), independent of the
    /// bit-serial path above.
    fn table_crc16(data: &[u8]) -> u16 {
        let mut table = [0u16; 256];
        for (i, slot) in table.iter_mut().enumerate() {
            let mut c = (i as u16) << 8;
            for _ in 0..8 {
                c = if c & 0x8000 != 0 { (c << 1) ^ 0x1021 } else { c << 1 };
            }
            *slot = c;
        }
        data.iter().fold(0u16, |crc, &b| {
            (crc << 8) ^ table[usize::from(((crc >> 8) as u8) ^ b)]
        })
    }

    fn ascii_bits(s: &str) -> Vec<u8> {
        s.bytes()
            .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect()
    }

    #[test]
    fn check_string_matches_table_oracle() {
        let oracle = table_crc16(b"123456789");
        assert_eq!(oracle, 0x31C3);
        assert_eq!(CrcSpec::CCITT16.checksum(&ascii_bits("123456789")), u32::from(oracle));
    }

    #[test]
    fn zero_input_is_fixed_point() {
        let out = crc_append(&[0u8; 84], &CrcSpec::CCITT16);
        assert_eq!(out.len(), 100);
        assert!(out.iter().all(|&b| b == 0));
        assert!(crc_check(&out, &CrcSpec::CCITT16));
    }

    #[test]
    fn appended_frame_checks_for_every_width() {
        for w in [6, 11, 16, 24] {
            let spec = CrcSpec::for_width(w).unwrap();
            let bits: Vec<u8> = (0..57).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
            let frame = crc_append(&bits, &spec);
            assert_eq!(frame.len(), 57 + w);
            assert!(crc_check(&frame, &spec));
        }
        assert!(CrcSpec::for_width(13).is_err());
    }

    #[test]
    fn length_is_checked() {
        assert!(crc_append_checked(&[1, 0, 1], 4, &CrcSpec::CCITT16).is_err());
        assert_eq!(
            crc_append_checked(&[1, 0, 1, 1], 4, &CrcSpec::CCITT16).unwrap().len(),
            20
        );
    }
}
