//! Per-user error probability, channel-estimation MSE, and energy per bit.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::channel::ArrivalSchedule;
use crate::config::SystemConfig;
use crate::receiver::DecodedList;

/// `10 log10(x)`; `-inf` for zero.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupeReport {
    /// Users that started a transmission in `[0, T)`.
    pub k_at: usize,
    pub decoded_correct: usize,
    pub missed: usize,
    /// CRC-passing list entries that no user sent.
    pub false_alarms: usize,
    pub pupe: f64,
    /// Set when `k_at = 0`; `pupe` is 0 by convention.
    pub empty: bool,
}

/// Fraction of transmitted messages absent from the list. One list entry
/// satisfies every user that sent that exact message.
pub fn compute_pupe(schedule: &ArrivalSchedule, list: &DecodedList) -> PupeReport {
    let sent: BTreeSet<&[u8]> = schedule.arrivals.iter().map(|a| a.message.bits()).collect();
    let listed: BTreeSet<&[u8]> = list.entries().iter().map(|e| e.message.bits()).collect();
    let k_at = schedule.len();
    let decoded_correct = schedule
        .arrivals
        .iter()
        .filter(|a| listed.contains(a.message.bits()))
        .count();
    let false_alarms = listed.iter().filter(|m| !sent.contains(*m)).count();
    let missed = k_at - decoded_correct;
    PupeReport {
        k_at,
        decoded_correct,
        missed,
        false_alarms,
        pupe: if k_at == 0 {
            0.0
        } else {
            missed as f64 / k_at as f64
        },
        empty: k_at == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    /// `Σ |ĥ_i - h_i|² / K` with missed users counted as `ĥ = 0`.
    pub mse: f64,
    /// Same average restricted to users that have an estimate.
    pub mse_matched: Option<f64>,
    pub sq_err_sum: f64,
    pub matched: usize,
    pub missed: usize,
}

/// `truth[i]` pairs with `estimates[i]`; `None` marks a user without an
/// estimate, which contributes `|h_i|²`.
pub fn compute_mse(truth: &[Complex64], estimates: &[Option<Complex64>]) -> MseReport {
    assert_eq!(truth.len(), estimates.len());
    let mut sq_err_sum = 0.0;
    let mut matched_sum = 0.0;
    let mut matched = 0;
    for (h, est) in truth.iter().zip(estimates) {
        match est {
            Some(e) => {
                let err = (e - h).norm_sqr();
                sq_err_sum += err;
                matched_sum += err;
                matched += 1;
            }
            None => sq_err_sum += h.norm_sqr(),
        }
    }
    let k = truth.len();
    MseReport {
        mse: if k == 0 { 0.0 } else { sq_err_sum / k as f64 },
        mse_matched: (matched > 0).then(|| matched_sum / matched as f64),
        sq_err_sum,
        matched,
        missed: k - matched,
    }
}

/// Associates estimates to users by exact `(start, pilot)` match.
/// Returns the per-user estimates and the number of estimates that matched
/// nobody.
pub fn match_by_start_and_pilot(
    schedule: &ArrivalSchedule,
    estimates: impl IntoIterator<Item = (usize, usize, Complex64)>,
) -> (Vec<Option<Complex64>>, usize) {
    let mut by_key: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for (start, pilot, h) in estimates {
        by_key.entry((start, pilot)).or_insert(h);
    }
    let truth_keys: BTreeSet<(usize, usize)> = schedule
        .arrivals
        .iter()
        .map(|a| (a.delta, a.message.pilot_index()))
        .collect();
    let unmatched = by_key.keys().filter(|k| !truth_keys.contains(k)).count();
    let per_user = schedule
        .arrivals
        .iter()
        .map(|a| by_key.get(&(a.delta, a.message.pilot_index())).copied())
        .collect();
    (per_user, unmatched)
}

/// `(nd Pd + np Pp) / (B σ²)` in dB; `-inf` when no energy is sent.
pub fn compute_ebn0(cfg: &SystemConfig) -> f64 {
    let energy = cfg.nd() as f64 * cfg.pd + cfg.np as f64 * cfg.pp;
    to_db(energy / (cfg.b as f64 * cfg.sigma2))
}

/// Rescales `Pp` and `Pd` by a common factor so that `Eb/N0 = ebn0_db`,
/// keeping `σ²` and the pilot-to-data power ratio. Returns `None` when the
/// configuration carries no power to scale.
pub fn with_ebn0_db(cfg: &SystemConfig, ebn0_db: f64) -> Option<SystemConfig> {
    let energy = cfg.nd() as f64 * cfg.pd + cfg.np as f64 * cfg.pp;
    if energy <= 0.0 {
        return None;
    }
    let target = from_db(ebn0_db) * cfg.b as f64 * cfg.sigma2;
    let scale = target / energy;
    Some(SystemConfig {
        pp: cfg.pp * scale,
        pd: cfg.pd * scale,
        ..cfg.clone()
    })
}
