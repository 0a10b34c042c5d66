//! Joint start-time and pilot detection by correlating every pilot against
//! every candidate start in the first half of the inner window.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::codebooks::PilotCodebook;
use crate::config::SystemConfig;

/// A candidate user found in an inner window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Absolute start time.
    pub start: usize,
    pub pilot_index: usize,
    /// `|R_b|` of the selected pilot.
    pub score: f64,
    /// Channel estimate, filled in by [`estimate_channels`](super::estimate_channels).
    pub h_hat: Complex64,
}

/// FFT correlator for the asynchronous search over `b = 0..n`.
pub(crate) struct Correlator {
    span: usize,
    pilot_len: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Conjugated pilot spectra, one per codebook column.
    spectra: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for Correlator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Correlator")
            .field("span", &self.span)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl Correlator {
    pub(crate) fn new(pilots: &PilotCodebook, span: usize) -> Correlator {
        let pilot_len = pilots.pilot_len();
        let fft_len = (span + pilot_len - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let spectra = pilots
            .columns()
            .map(|col| {
                let mut buf = vec![Complex64::default(); fft_len];
                buf[..pilot_len].copy_from_slice(col);
                forward.process(&mut buf);
                buf.iter_mut().for_each(|z| *z = z.conj());
                buf
            })
            .collect();
        Correlator {
            span,
            pilot_len,
            fft_len,
            forward,
            inverse,
            spectra,
        }
    }

    /// For every `b < span`, the pilot with the largest `|R_b|²` and that
    /// value. Ties go to the lowest pilot index.
    pub(crate) fn survivors(&self, window: &[Complex64]) -> Vec<(usize, f64)> {
        let seg_len = (self.span + self.pilot_len - 1).min(window.len());
        let mut spectrum = vec![Complex64::default(); self.fft_len];
        spectrum[..seg_len].copy_from_slice(&window[..seg_len]);
        self.forward.process(&mut spectrum);

        let scale = 1.0 / self.fft_len as f64;
        let mut best = vec![(0usize, f64::NEG_INFINITY); self.span];
        let mut buf = vec![Complex64::default(); self.fft_len];
        for (j, pilot) in self.spectra.iter().enumerate() {
            for ((o, &y), &a) in buf.iter_mut().zip(&spectrum).zip(pilot) {
                *o = y * a;
            }
            self.inverse.process(&mut buf);
            for (b, slot) in best.iter_mut().enumerate() {
                let power = (buf[b] * scale).norm_sqr();
                if power > slot.1 {
                    *slot = (j, power);
                }
            }
        }
        best
    }
}

/// `R_b[j] = Σ_k conj(a_j[k]) y[b + k]` evaluated directly.
pub fn correlate(pilot: &[Complex64], window: &[Complex64], b: usize) -> Complex64 {
    pilot
        .iter()
        .zip(&window[b..b + pilot.len()])
        .map(|(a, y)| a.conj() * y)
        .sum()
}

fn take_best(mut cands: Vec<(usize, usize, f64)>, keep: usize, offset: usize) -> Vec<Detection> {
    cands.sort_by(|x, y| {
        y.2.total_cmp(&x.2)
            .then(x.0.cmp(&y.0))
            .then(x.1.cmp(&y.1))
    });
    cands.truncate(keep);
    cands
        .into_iter()
        .map(|(b, j, p)| Detection {
            start: offset + b,
            pilot_index: j,
            score: p.max(0.0).sqrt(),
            h_hat: Complex64::default(),
        })
        .collect()
}

/// Asynchronous detection: one survivor pilot per candidate start `b`, then
/// the `keep` survivors with the largest correlation magnitude.
pub(crate) fn detect_async(
    correlator: &Correlator,
    window: &[Complex64],
    offset: usize,
    keep: usize,
    excluded: &BTreeSet<(usize, usize)>,
) -> Vec<Detection> {
    let cands = correlator
        .survivors(window)
        .into_iter()
        .enumerate()
        .filter(|&(b, (j, _))| !excluded.contains(&(offset + b, j)))
        .map(|(b, (j, p))| (b, j, p))
        .collect();
    take_best(cands, keep, offset)
}

/// Frame-aligned detection for the synchronous benchmark: only starts on
/// multiples of `n` are candidates, and every pilot at such a start competes.
pub(crate) fn detect_sync(
    pilots: &PilotCodebook,
    cfg: &SystemConfig,
    window: &[Complex64],
    offset: usize,
    keep: usize,
    excluded: &BTreeSet<(usize, usize)>,
) -> Vec<Detection> {
    let mut cands = Vec::new();
    for b in (0..cfg.n).filter(|b| (offset + b).is_multiple_of(cfg.n)) {
        for (j, col) in pilots.columns().enumerate() {
            if excluded.contains(&(offset + b, j)) {
                continue;
            }
            cands.push((b, j, correlate(col, window, b).norm_sqr()));
        }
    }
    take_best(cands, keep, offset)
}
