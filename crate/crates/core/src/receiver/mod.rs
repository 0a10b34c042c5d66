//! Double sliding-window receiver.
//!
//! The inner window spans two packet lengths starting at `o = w·n`. Each
//! inner iteration
//!
//! 1. correlates every pilot against every start `b ∈ [0, n)` and keeps the
//!    `round(Ka) + u` strongest survivors,
//! 2. estimates their channels jointly by LMMSE on the pilot columns,
//! 3. decodes each candidate on its own, treating everyone else as Gaussian
//!    noise, and keeps the CRC-passing messages,
//! 4. re-encodes the new messages, jointly re-estimates their gains on the
//!    full reconstructed packets, and subtracts them from the residual.
//!
//! Iterations stop once nothing new decodes. The outer window walks the inner
//! window over `Ns - 1` positions, repeats that pass up to `n_out` times, and
//! then advances by `Delta` packets.

mod detect;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

pub use detect::{correlate, Detection};
use detect::Correlator;

use crate::channel::{add_scaled, ReceivedSignal};
use crate::error::{Error, Result};
use crate::linalg::{regularized_solve, Placed};
use crate::polar::{DecodeOutcome, LLR_CLAMP};
use crate::scheme::Scheme;
use crate::txchain::{bpsk, encode_packet, Message, TxPacket};

/// The global residual signal, `T + 2n` samples. Only cancellation of
/// reconstructed packets mutates it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBuffer {
    samples: Vec<Complex64>,
}

impl ResidualBuffer {
    pub fn new(received: &ReceivedSignal) -> ResidualBuffer {
        ResidualBuffer {
            samples: received.samples.clone(),
        }
    }

    pub fn from_samples(samples: Vec<Complex64>) -> ResidualBuffer {
        ResidualBuffer { samples }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The `len` samples starting at `offset`, clipped to the buffer.
    pub fn window(&self, offset: usize, len: usize) -> &[Complex64] {
        let end = (offset + len).min(self.samples.len());
        &self.samples[offset.min(end)..end]
    }

    /// Removes `h · packet` placed at `start`.
    pub fn cancel(&mut self, start: usize, packet: &[Complex64], h: Complex64) {
        add_scaled(&mut self.samples, start, packet, -h);
    }

    pub fn energy(&self, range: std::ops::Range<usize>) -> f64 {
        let end = range.end.min(self.samples.len());
        self.samples[range.start.min(end)..end]
            .iter()
            .map(|z| z.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedEntry {
    pub message: Message,
    /// Absolute start time.
    pub start: usize,
    /// Inner window index `o / n` that produced the entry.
    pub window_id: usize,
    /// Pilot-based LMMSE estimate from the iteration that decoded it.
    pub h_est: Complex64,
    /// Joint re-estimate on the reconstructed packet, used for cancellation.
    pub h_sic: Complex64,
}

/// The receiver's unordered output list, unique by message content.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodedList {
    entries: Vec<DecodedEntry>,
}

impl DecodedList {
    /// Adds `entry` unless an entry with the same message is present.
    pub fn insert(&mut self, entry: DecodedEntry) -> bool {
        if self.contains(&entry.message) {
            return false;
        }
        self.entries.push(entry);
        true
    }

    pub fn contains(&self, msg: &Message) -> bool {
        self.entries.iter().any(|e| &e.message == msg)
    }

    pub fn entries(&self) -> &[DecodedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-window text log, enabled on demand.
#[derive(Debug, Default, Clone)]
pub struct Trace {
    lines: Option<Vec<String>>,
}

impl Trace {
    pub fn enabled() -> Trace {
        Trace {
            lines: Some(Vec::new()),
        }
    }

    pub fn disabled() -> Trace {
        Trace { lines: None }
    }

    pub fn is_enabled(&self) -> bool {
        self.lines.is_some()
    }

    fn log(&mut self, line: impl FnOnce() -> String) {
        if let Some(lines) = self.lines.as_mut() {
            lines.push(line());
        }
    }

    pub fn lines(&self) -> &[String] {
        self.lines.as_deref().unwrap_or(&[])
    }
}

/// Cross-window bookkeeping for one decoding pass.
#[derive(Debug, Default, Clone)]
pub struct DecodeState {
    /// `(start, pilot)` pairs already decoded and cancelled; never detected again.
    pub cancelled: BTreeSet<(usize, usize)>,
}

/// Receiver bound to a scheme.
#[derive(Debug)]
pub struct Receiver<'s> {
    scheme: &'s Scheme,
    correlator: Option<Correlator>,
}

impl<'s> Receiver<'s> {
    pub fn new(scheme: &'s Scheme) -> Receiver<'s> {
        let cfg = scheme.cfg();
        let correlator = (!cfg.sync_mode).then(|| Correlator::new(scheme.pilots(), cfg.n));
        Receiver { scheme, correlator }
    }

    pub fn scheme(&self) -> &'s Scheme {
        self.scheme
    }

    /// Inner window length, `2n`.
    pub fn window_len(&self) -> usize {
        2 * self.scheme.cfg().n
    }

    /// Detects up to `round(Ka) + u` candidates whose start lies in the first
    /// half of `window` (which begins at absolute time `offset`), skipping
    /// `(start, pilot)` pairs in `excluded`.
    pub fn detect(
        &self,
        window: &[Complex64],
        offset: usize,
        excluded: &BTreeSet<(usize, usize)>,
    ) -> Vec<Detection> {
        let cfg = self.scheme.cfg();
        let keep = cfg.detections_per_window();
        match &self.correlator {
            Some(c) => detect::detect_async(c, window, offset, keep, excluded),
            None => detect::detect_sync(self.scheme.pilots(), cfg, window, offset, keep, excluded),
        }
    }

    /// LMMSE estimate `(ÂᴴÂ + σ² I)⁻¹ Âᴴ y` over the detected pilot columns;
    /// writes each estimate into `h_hat`.
    pub fn estimate_channels(
        &self,
        window: &[Complex64],
        offset: usize,
        detections: &mut [Detection],
    ) -> Result<()> {
        let pilots = self.scheme.pilots();
        let columns: Vec<Placed<'_>> = detections
            .iter()
            .map(|d| Placed {
                start: d.start - offset,
                samples: pilots.column(d.pilot_index),
            })
            .collect();
        let h = regularized_solve(&columns, window, self.scheme.cfg().sigma2)?;
        for (d, h) in detections.iter_mut().zip(h) {
            d.h_hat = h;
        }
        Ok(())
    }

    /// Bit LLRs at the detection's active data positions, treating
    /// everything but its own signal as Gaussian noise.
    pub fn extract_llrs(&self, window: &[Complex64], offset: usize, det: &Detection) -> Vec<f64> {
        let cfg = self.scheme.cfg();
        let base = det.start - offset + cfg.np;
        let rows = self.scheme.patterns().active_rows(det.pilot_index);
        let observed: Vec<Option<Complex64>> =
            rows.iter().map(|&r| window.get(base + r).copied()).collect();
        let seen = observed.iter().flatten().count();
        if seen == 0 || det.h_hat == Complex64::default() {
            return vec![0.0; rows.len()];
        }
        let mean_power = observed.iter().flatten().map(|y| y.norm_sqr()).sum::<f64>() / seen as f64;
        let sigma_eff2 = tin_variance(cfg.sigma2, mean_power, det.h_hat, cfg.pd);
        observed
            .iter()
            .map(|y| y.map_or(0.0, |y| bpsk_llr(det.h_hat, y, cfg.pd, sigma_eff2)))
            .collect()
    }

    /// The reconstructed packet of a decoded message.
    pub fn reconstruct(&self, msg: &Message) -> Result<TxPacket> {
        encode_packet(msg, self.scheme)
    }

    /// Runs the inner-window iterations at `offset` and returns the newly
    /// decoded entries. Decoded packets are cancelled from `buffer`.
    pub fn run_inner(
        &self,
        buffer: &mut ResidualBuffer,
        offset: usize,
        state: &mut DecodeState,
        trace: &mut Trace,
    ) -> Result<Vec<DecodedEntry>> {
        let cfg = self.scheme.cfg();
        let win_len = self.window_len();
        if offset + win_len > buffer.len() {
            return Err(Error::Config(format!(
                "inner window [{offset}, {}) exceeds the buffer of {} samples",
                offset + win_len,
                buffer.len()
            )));
        }
        let window_id = offset / cfg.n;
        let mut out: Vec<DecodedEntry> = Vec::new();

        for iter in 0..cfg.n_max {
            let window = buffer.window(offset, win_len);
            let mut dets = self.detect(window, offset, &state.cancelled);
            if dets.is_empty() {
                break;
            }
            self.estimate_channels(window, offset, &mut dets)?;
            trace.log(|| {
                let list: Vec<String> = dets
                    .iter()
                    .map(|d| format!("({},{},{:.3})", d.start, d.pilot_index, d.score))
                    .collect();
                format!("window {window_id} iter {iter} detections {}", list.join(" "))
            });

            // TIN decoding is independent per candidate; order does not matter.
            let mut fresh: BTreeMap<(usize, usize), (Message, Complex64)> = BTreeMap::new();
            for det in &dets {
                let llr = self.extract_llrs(window, offset, det);
                if let DecodeOutcome::Pass { payload, .. } = self.scheme.codec().decode(&llr) {
                    let msg = Message::from_parts(det.pilot_index, cfg.bp, &payload);
                    fresh.insert((det.start, det.pilot_index), (msg, det.h_hat));
                }
            }
            let mut new_entries: Vec<DecodedEntry> = Vec::new();
            for ((start, _), (message, h_est)) in fresh {
                let dup = out.iter().chain(&new_entries).any(|e| e.message == message);
                if !dup {
                    new_entries.push(DecodedEntry {
                        message,
                        start,
                        window_id,
                        h_est,
                        h_sic: Complex64::default(),
                    });
                }
            }
            if new_entries.is_empty() {
                trace.log(|| format!("window {window_id} iter {iter} decoded 0"));
                break;
            }

            let packets: Vec<TxPacket> = new_entries
                .iter()
                .map(|e| self.reconstruct(&e.message))
                .collect::<Result<_>>()?;
            let columns: Vec<Placed<'_>> = new_entries
                .iter()
                .zip(&packets)
                .map(|(e, p)| Placed {
                    start: e.start - offset,
                    samples: &p.samples,
                })
                .collect();
            let h_sic = regularized_solve(&columns, window, cfg.sigma2)?;
            for ((entry, packet), h) in new_entries.iter_mut().zip(&packets).zip(h_sic) {
                entry.h_sic = h;
                buffer.cancel(entry.start, &packet.samples, h);
                state.cancelled.insert((entry.start, entry.message.pilot_index()));
            }
            trace.log(|| {
                let list: Vec<String> = new_entries
                    .iter()
                    .map(|e| format!("({},{},{})", e.start, e.message.pilot_index(), e.message.to_hex()))
                    .collect();
                format!(
                    "window {window_id} iter {iter} decoded {} {} residual {:.6e}",
                    new_entries.len(),
                    list.join(" "),
                    buffer.energy(offset..offset + win_len)
                )
            });
            out.extend(new_entries);
        }
        Ok(out)
    }

    /// Inner-window offsets (in packets) visited by each outer position.
    pub fn outer_schedule(&self) -> Vec<Vec<usize>> {
        let cfg = self.scheme.cfg();
        let packets = cfg.horizon_packets();
        let inner_per_outer = cfg.ns - 1;
        let mut positions = Vec::new();
        let mut p = 0;
        loop {
            positions.push(p);
            if p + inner_per_outer >= packets {
                break;
            }
            p += cfg.delta;
            if p + inner_per_outer > packets {
                p = packets.saturating_sub(inner_per_outer);
                if positions.last() != Some(&p) {
                    positions.push(p);
                }
                break;
            }
        }
        positions
            .into_iter()
            .map(|p| (p..p + inner_per_outer).filter(|&w| w < packets.max(1)).collect())
            .collect()
    }

    /// Full decoding pass over the received signal.
    pub fn run_outer(&self, received: &ReceivedSignal, trace: &mut Trace) -> Result<OuterResult> {
        let cfg = self.scheme.cfg();
        let mut buffer = ResidualBuffer::new(received);
        let mut state = DecodeState::default();
        let mut list = DecodedList::default();
        for (pos, inner) in self.outer_schedule().into_iter().enumerate() {
            for outer_iter in 0..cfg.n_out {
                let mut decoded = 0;
                for &w in &inner {
                    for entry in self.run_inner(&mut buffer, w * cfg.n, &mut state, trace)? {
                        decoded += 1;
                        list.insert(entry);
                    }
                }
                trace.log(|| format!("outer {pos} iter {outer_iter} decoded {decoded}"));
                if decoded == 0 {
                    break;
                }
            }
        }
        Ok(OuterResult {
            list,
            residual: buffer,
        })
    }

    /// One detection and LMMSE pass per inner window on the unprocessed
    /// signal, without decoding. Used for the channel-estimation experiment.
    pub fn estimate_only(&self, received: &ReceivedSignal) -> Result<Vec<Detection>> {
        let cfg = self.scheme.cfg();
        let buffer = ResidualBuffer::new(received);
        let none = BTreeSet::new();
        let mut all = Vec::new();
        for w in 0..cfg.horizon_packets() {
            let offset = w * cfg.n;
            let window = buffer.window(offset, self.window_len());
            let mut dets = self.detect(window, offset, &none);
            self.estimate_channels(window, offset, &mut dets)?;
            all.extend(dets);
        }
        Ok(all)
    }
}

#[derive(Debug, Clone)]
pub struct OuterResult {
    pub list: DecodedList,
    pub residual: ResidualBuffer,
}

/// Interference-plus-noise variance seen at a user's active positions:
/// received power minus the user's own expected power, floored at `σ²`.
pub fn tin_variance(sigma2: f64, mean_power: f64, h_hat: Complex64, pd: f64) -> f64 {
    (mean_power - h_hat.norm_sqr() * pd).max(sigma2)
}

/// `4 sqrt(Pd) Re(conj(ĥ) y) / σ_eff²`, clamped to `±LLR_CLAMP`.
pub fn bpsk_llr(h_hat: Complex64, y: Complex64, pd: f64, sigma_eff2: f64) -> f64 {
    let amp = bpsk(0, pd.sqrt());
    (4.0 * amp * (h_hat.conj() * y).re / sigma_eff2).clamp(-LLR_CLAMP, LLR_CLAMP)
}
