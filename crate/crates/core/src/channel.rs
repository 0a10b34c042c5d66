//! Asynchronous arrivals, quasi-static fading, superposition, and AWGN.
//!
//! The received signal is `y[j] = Σ_i h_i x_i[j - δ_i] + z[j]` over a buffer
//! of `T + 2n` symbols.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::config::{ArrivalProcess, SystemConfig};
use crate::error::{Error, Result};
use crate::txchain::{Message, TxPacket};

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalEvent {
    pub user_id: usize,
    /// Start time in symbols, in `[0, T)`.
    pub delta: usize,
    pub h: Complex64,
    pub message: Message,
}

/// Ground truth for one trial, sorted by start time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrivalSchedule {
    pub arrivals: Vec<ArrivalEvent>,
    pub horizon: usize,
}

impl ArrivalSchedule {
    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// One line per arrival: `user_id,delta,h_re,h_im,pilot_index,message_hex`.
    pub fn write_trace<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "user_id,delta,h_re,h_im,pilot_index,message_hex")?;
        for a in &self.arrivals {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                a.user_id,
                a.delta,
                a.h.re,
                a.h.im,
                a.message.pilot_index(),
                a.message.to_hex()
            )?;
        }
        Ok(())
    }
}

/// Draws `h ~ CN(0, 1)`.
pub fn draw_fading<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `CN(0, sigma2)` sample.
pub fn draw_noise<R: Rng>(sigma2: f64, rng: &mut R) -> Complex64 {
    draw_fading(rng) * sigma2.sqrt()
}

pub fn draw_schedule<R: Rng>(cfg: &SystemConfig, rng: &mut R) -> Result<ArrivalSchedule> {
    if cfg.n == 0 || !cfg.t.is_multiple_of(cfg.n) {
        return Err(Error::Config(format!(
            "horizon T = {} is not a multiple of n = {}",
            cfg.t, cfg.n
        )));
    }
    let mean = cfg.ka * cfg.t as f64 / cfg.n as f64;
    let count = match cfg.arrivals {
        ArrivalProcess::Fixed => mean.round() as usize,
        ArrivalProcess::Poisson if mean <= 0.0 => 0,
        ArrivalProcess::Poisson => {
            let dist = Poisson::new(mean).map_err(|e| Error::Config(e.to_string()))?;
            dist.sample(rng) as usize
        }
    };
    let frames = cfg.t / cfg.n;
    let mut starts: Vec<usize> = (0..count)
        .map(|_| {
            if cfg.sync_mode {
                rng.random_range(0..frames) * cfg.n
            } else {
                rng.random_range(0..cfg.t)
            }
        })
        .collect();
    starts.sort_unstable();
    let arrivals = starts
        .into_iter()
        .enumerate()
        .map(|(user_id, delta)| {
            let h = draw_fading(rng);
            let message = Message::random(cfg.b, cfg.bp, rng);
            ArrivalEvent {
                user_id,
                delta,
                h,
                message,
            }
        })
        .collect();
    Ok(ArrivalSchedule {
        arrivals,
        horizon: cfg.t,
    })
}

/// The channel output over `[0, T + 2n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub samples: Vec<Complex64>,
    pub sigma2: f64,
}

/// Adds `h · packet` into `buf` starting at `start`, truncating at the end.
pub fn add_scaled(buf: &mut [Complex64], start: usize, packet: &[Complex64], h: Complex64) {
    if start >= buf.len() {
        return;
    }
    let end = (start + packet.len()).min(buf.len());
    for (y, &x) in buf[start..end].iter_mut().zip(packet) {
        *y += h * x;
    }
}

/// Superimposes every packet at its start time and adds `CN(0, σ²)` noise.
/// With `σ² = 0` no noise samples are drawn.
pub fn synthesize<R: Rng>(
    schedule: &ArrivalSchedule,
    packets: &[TxPacket],
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    if packets.len() != schedule.len() {
        return Err(Error::Length {
            expected: schedule.len(),
            actual: packets.len(),
        });
    }
    let mut samples = vec![Complex64::default(); cfg.buffer_len()];
    for (event, packet) in schedule.arrivals.iter().zip(packets) {
        add_scaled(&mut samples, event.delta, &packet.samples, event.h);
    }
    if cfg.sigma2 > 0.0 {
        for y in samples.iter_mut() {
            *y += draw_noise(cfg.sigma2, rng);
        }
    }
    Ok(ReceivedSignal {
        samples,
        sigma2: cfg.sigma2,
    })
}
