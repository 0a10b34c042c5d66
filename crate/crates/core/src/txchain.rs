//! Message to packet: pilot selection, CRC + polar encoding, BPSK, and ODMA
//! placement of the codeword symbols.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scheme::Scheme;

/// A `B`-bit message. The first `Bp` bits, read MSB first, give the pilot
/// (and pattern) index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    bits: Vec<u8>,
    pilot_index: usize,
}

impl Message {
    pub fn new(bits: Vec<u8>, bp: usize) -> Result<Message> {
        if bp > bits.len() {
            return Err(Error::Length {
                expected: bp,
                actual: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Format {
                what: "message",
                detail: "bits must be 0 or 1".into(),
            });
        }
        let pilot_index = bits[..bp]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        Ok(Message { bits, pilot_index })
    }

    pub fn random<R: Rng>(b: usize, bp: usize, rng: &mut R) -> Message {
        let bits = (0..b).map(|_| rng.random_range(0..2u8)).collect();
        Message::new(bits, bp).expect("random bits are well formed")
    }

    /// Joins a pilot index (as `bp` bits) with a decoded payload.
    pub fn from_parts(pilot_index: usize, bp: usize, payload: &[u8]) -> Message {
        let mut bits: Vec<u8> = (0..bp)
            .rev()
            .map(|i| ((pilot_index >> i) & 1) as u8)
            .collect();
        bits.extend_from_slice(payload);
        Message { bits, pilot_index }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn pilot_index(&self) -> usize {
        self.pilot_index
    }

    /// Bits after the pilot-selection prefix.
    pub fn payload(&self, bp: usize) -> &[u8] {
        &self.bits[bp..]
    }

    /// Big-endian hex of the bits, left-padded with zeros to whole nibbles.
    pub fn to_hex(&self) -> String {
        let pad = (4 - self.bits.len() % 4) % 4;
        let padded: Vec<u8> = std::iter::repeat_n(0u8, pad).chain(self.bits.iter().copied()).collect();
        padded
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }
}

/// The length-`n` baseband packet of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct TxPacket {
    pub samples: Vec<Complex64>,
    pub pilot_index: usize,
    /// Offsets within the data part (sorted) that carry codeword symbols.
    pub active_indices: Vec<usize>,
}

impl TxPacket {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// BPSK: bit 0 maps to `+amp`, bit 1 to `-amp`.
pub fn bpsk(bit: u8, amp: f64) -> f64 {
    if bit == 0 {
        amp
    } else {
        -amp
    }
}

pub fn encode_packet(msg: &Message, scheme: &Scheme) -> Result<TxPacket> {
    let cfg = scheme.cfg();
    if msg.bits().len() != cfg.b {
        return Err(Error::Length {
            expected: cfg.b,
            actual: msg.bits().len(),
        });
    }
    let j = msg.pilot_index();
    let codeword = scheme.codec().encode_payload(msg.payload(cfg.bp))?;
    let active = scheme.patterns().active_rows(j);
    let amp = cfg.pd.sqrt();

    let mut samples = vec![Complex64::default(); cfg.n];
    samples[..cfg.np].copy_from_slice(scheme.pilots().column(j));
    for (&row, &bit) in active.iter().zip(&codeword) {
        samples[cfg.np + row] = Complex64::new(bpsk(bit, amp), 0.0);
    }
    Ok(TxPacket {
        samples,
        pilot_index: j,
        active_indices: active.to_vec(),
    })
}
