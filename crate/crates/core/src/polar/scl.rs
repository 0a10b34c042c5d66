//! Successive-cancellation list decoding in the LLR domain.
//!
//! Each path keeps its own copy of the intermediate LLRs and partial sums;
//! level `d` of the decoding tree holds `2^d` values. The channel LLRs form
//! level `m = log2(nc)` and are shared by all paths.

use std::cmp::Ordering;

use super::crc::{crc_check, CrcSpec};
use super::RateProfile;

/// Channel LLRs are clamped to this magnitude before decoding.
pub const LLR_CLAMP: f64 = 40.0;

/// A frame whose LLRs all stay below this magnitude is treated as erased.
pub const ERASURE_LLR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    /// The most likely CRC-passing path; `payload` excludes the CRC bits.
    Pass { payload: Vec<u8>, metric: f64 },
    Fail,
}

impl DecodeOutcome {
    pub fn payload(&self) -> Option<&[u8]> {
        match self {
            DecodeOutcome::Pass { payload, .. } => Some(payload),
            DecodeOutcome::Fail => None,
        }
    }

    pub fn passed(&self) -> bool {
        matches!(self, DecodeOutcome::Pass { .. })
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Exact box-plus: `2 atanh(tanh(a/2) tanh(b/2))`.
fn boxplus(a: f64, b: f64) -> f64 {
    let s = a.signum() * b.signum();
    s * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[derive(Clone)]
struct Path {
    /// Level `d < m` stored at `[2^d - 1, 2^{d+1} - 1)`.
    alpha: Vec<f64>,
    /// Level `d < m`, side `s` stored at `2(2^d - 1) + s 2^d`.
    beta: Vec<u8>,
    info: Vec<u8>,
    metric: f64,
}

fn alpha_at(d: usize) -> usize {
    (1 << d) - 1
}

fn beta_at(d: usize, side: usize) -> usize {
    2 * ((1 << d) - 1) + side * (1 << d)
}

impl Path {
    fn new(nc: usize, k: usize) -> Path {
        Path {
            alpha: vec![0.0; nc.max(1) - 1 + 1],
            beta: vec![0; 2 * nc],
            info: Vec::with_capacity(k),
            metric: 0.0,
        }
    }

    /// Computes the level-0 LLR of bit `i`.
    fn llr_for(&mut self, i: usize, m: usize, channel: &[f64]) -> f64 {
        if m == 0 {
            return channel[0];
        }
        let top = if i == 0 { m } else { i.trailing_zeros() as usize + 1 };
        for d in (1..=top).rev() {
            let h = 1 << (d - 1);
            let dst = alpha_at(d - 1);
            let use_g = i != 0 && d == top;
            for j in 0..h {
                let (a, b) = if d == m {
                    (channel[j], channel[j + h])
                } else {
                    let src = alpha_at(d);
                    (self.alpha[src + j], self.alpha[src + j + h])
                };
                self.alpha[dst + j] = if use_g {
                    let left = self.beta[beta_at(d - 1, 0) + j];
                    if left == 0 {
                        b + a
                    } else {
                        b - a
                    }
                } else {
                    boxplus(a, b)
                };
            }
        }
        self.alpha[0]
    }

    /// Records bit `i` and propagates partial sums upward.
    fn commit(&mut self, i: usize, m: usize, bit: u8) {
        if m == 0 {
            return;
        }
        self.beta[beta_at(0, i & 1)] = bit;
        let mut d = 1;
        while d < m && (i >> (d - 1)) & 1 == 1 {
            let h = 1 << (d - 1);
            let parent = beta_at(d, (i >> d) & 1);
            let left = beta_at(d - 1, 0);
            let right = beta_at(d - 1, 1);
            for j in 0..h {
                let r = self.beta[right + j];
                self.beta[parent + j] = self.beta[left + j] ^ r;
                self.beta[parent + j + h] = r;
            }
            d += 1;
        }
    }
}

/// Decodes `llr` with a list of `list_size` paths and returns the most likely
/// final path whose information bits pass the CRC.
///
/// Panics if `llr.len()` differs from the profile's code length.
pub fn decode_scl(
    llr: &[f64],
    profile: &RateProfile,
    crc: &CrcSpec,
    list_size: usize,
) -> DecodeOutcome {
    let nc = profile.code_len();
    assert_eq!(llr.len(), nc, "LLR vector length must equal the code length");
    let m = nc.trailing_zeros() as usize;
    let list_size = list_size.max(1);
    // No information: every path ties and the all-zero frame, which is a
    // valid CRC codeword, would win on tie-breaking alone.
    if llr.iter().all(|&v| v.is_nan() || v.abs() < ERASURE_LLR) {
        return DecodeOutcome::Fail;
    }
    let channel: Vec<f64> = llr
        .iter()
        .map(|&v| if v.is_nan() { 0.0 } else { v.clamp(-LLR_CLAMP, LLR_CLAMP) })
        .collect();

    let mut paths = vec![Path::new(nc, profile.info_len())];
    let mut candidates: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * list_size);

    for i in 0..nc {
        let llrs: Vec<f64> = paths.iter_mut().map(|p| p.llr_for(i, m, &channel)).collect();
        if profile.is_frozen(i) {
            for (p, &l) in paths.iter_mut().zip(&llrs) {
                p.metric += softplus(-l);
                p.commit(i, m, 0);
            }
            continue;
        }

        candidates.clear();
        for (idx, (p, &l)) in paths.iter().zip(&llrs).enumerate() {
            candidates.push((p.metric + softplus(-l), idx, 0));
            candidates.push((p.metric + softplus(l), idx, 1));
        }
        if candidates.len() > list_size {
            candidates.sort_by(|x, y| {
                x.0.partial_cmp(&y.0)
                    .unwrap_or(Ordering::Equal)
                    .then(x.1.cmp(&y.1))
                    .then(x.2.cmp(&y.2))
            });
            candidates.truncate(list_size);
            candidates.sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
        }

        let mut next = Vec::with_capacity(candidates.len());
        let mut old: Vec<Option<Path>> = paths.into_iter().map(Some).collect();
        for (c, &(metric, idx, bit)) in candidates.iter().enumerate() {
            let shares_parent = candidates.get(c + 1).is_some_and(|n| n.1 == idx);
            let mut p = if shares_parent {
                old[idx].clone().expect("parent path present")
            } else {
                old[idx].take().expect("parent path present")
            };
            p.metric = metric;
            p.info.push(bit);
            p.commit(i, m, bit);
            next.push(p);
        }
        paths = next;
    }

    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        paths[a]
            .metric
            .partial_cmp(&paths[b].metric)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    for idx in order {
        let p = &paths[idx];
        if crc_check(&p.info, crc) {
            return DecodeOutcome::Pass {
                payload: p.info[..p.info.len() - crc.width].to_vec(),
                metric: p.metric,
            };
        }
    }
    DecodeOutcome::Fail
}
