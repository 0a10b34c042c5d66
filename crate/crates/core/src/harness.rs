//! Monte Carlo trials, parameter sweeps with CSV output, and the
//! required-Eb/N0 search.
//!
//! Every trial draws its arrivals from the stream `(seed, "schedule", trial)`
//! and its noise from `(seed, "noise", trial)`, so trial `i` sees the same
//! randomness at every sweep point and under any worker count.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{draw_schedule, synthesize, ArrivalSchedule};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    compute_ebn0, compute_mse, compute_pupe, match_by_start_and_pilot, to_db, with_ebn0_db,
};
use crate::receiver::{DecodedList, Receiver, Trace};
use crate::rng::derive_stream;
use crate::scheme::Scheme;
use crate::txchain::{encode_packet, TxPacket};

pub const CSV_HEADER: [&str; 15] = [
    "sweep_id",
    "mode",
    "Ka",
    "Pp",
    "Pd",
    "sigma2",
    "ebn0_db",
    "trial",
    "K_aT",
    "decoded",
    "missed",
    "false_alarms",
    "pupe",
    "mse_db",
    "seconds",
];

/// Value of the `trial` column on aggregate rows.
pub const AGGREGATE_LABEL: &str = "mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Arbitrary start times; the proposed receiver.
    Async,
    /// Frame-aligned benchmark with a larger pilot codebook.
    Sync,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Async => "async",
            Mode::Sync => "sync",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "async" => Ok(Mode::Async),
            "sync" => Ok(Mode::Sync),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// What a trial measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Experiment {
    /// Full decoding pass; PUPE plus the MSE of the final channel estimates.
    #[default]
    Decode,
    /// Detection and LMMSE estimation on the raw signal only. The `decoded`
    /// column counts users whose `(start, pilot)` was detected and the PUPE
    /// column is the resulting miss rate.
    Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Ka(Vec<f64>),
    /// Common rescaling of `Pp` and `Pd` to each Eb/N0 value (dB).
    Ebn0Db(Vec<f64>),
    /// Pilot power with everything else fixed.
    Pp(Vec<f64>),
}

impl SweepAxis {
    fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Ka(v) | SweepAxis::Ebn0Db(v) | SweepAxis::Pp(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub trials: usize,
    pub axis: SweepAxis,
    /// `Ka` values crossed with an Eb/N0 or `Pp` axis; empty keeps the base `Ka`.
    pub ka_values: Vec<f64>,
    pub modes: Vec<Mode>,
    pub target_pupe: f64,
    pub workers: usize,
    /// `Bp` used by the synchronous benchmark.
    pub sync_pilot_bits: usize,
    pub experiment: Experiment,
    /// Writes wall-clock seconds into the CSV; otherwise the column is 0 and
    /// the file is reproducible byte for byte.
    pub record_timing: bool,
}

impl HarnessConfig {
    pub fn new(axis: SweepAxis) -> HarnessConfig {
        HarnessConfig {
            trials: 100,
            axis,
            ka_values: Vec::new(),
            modes: vec![Mode::Async],
            target_pupe: 0.1,
            workers: 1,
            sync_pilot_bits: 13,
            experiment: Experiment::Decode,
            record_timing: false,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.target_pupe > 0.0 && self.target_pupe < 1.0) {
            return Err(Error::Config(format!(
                "target PUPE {} is outside (0, 1)",
                self.target_pupe
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        if self.modes.is_empty() || self.axis.values().is_empty() {
            return Err(Error::Config("sweep has no points".into()));
        }
        if matches!(self.axis, SweepAxis::Ka(_)) && !self.ka_values.is_empty() {
            return Err(Error::Config("ka_values cannot be combined with a Ka axis".into()));
        }
        Ok(())
    }
}

/// Configuration for `mode`: the synchronous benchmark uses frame-aligned
/// arrivals and `sync_pilot_bits` pilot bits.
pub fn mode_config(base: &SystemConfig, mode: Mode, sync_pilot_bits: usize) -> SystemConfig {
    match mode {
        Mode::Async => SystemConfig {
            sync_mode: false,
            ..base.clone()
        },
        Mode::Sync => SystemConfig {
            sync_mode: true,
            ..base.clone().with_pilot_bits(sync_pilot_bits)
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub id: usize,
    pub mode: Mode,
    pub cfg: SystemConfig,
}

impl fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, Ka={}, Pp={}, Pd={})",
            self.id, self.mode, self.cfg.ka, self.cfg.pp, self.cfg.pd
        )
    }
}

/// Expands the sweep in `Ka`, mode, axis order.
pub fn sweep_points(base: &SystemConfig, hcfg: &HarnessConfig) -> Result<Vec<SweepPoint>> {
    let kas = match (&hcfg.axis, hcfg.ka_values.is_empty()) {
        (SweepAxis::Ka(_), _) | (_, true) => vec![base.ka],
        (_, false) => hcfg.ka_values.clone(),
    };
    let mut points = Vec::new();
    for &ka in &kas {
        for &mode in &hcfg.modes {
            let with_ka = SystemConfig {
                ka,
                ..base.clone()
            };
            let cfg_mode = mode_config(&with_ka, mode, hcfg.sync_pilot_bits);
            for &v in hcfg.axis.values() {
                let cfg = match hcfg.axis {
                    SweepAxis::Ka(_) => SystemConfig {
                        ka: v,
                        ..cfg_mode.clone()
                    },
                    SweepAxis::Pp(_) => SystemConfig {
                        pp: v,
                        ..cfg_mode.clone()
                    },
                    SweepAxis::Ebn0Db(_) => with_ebn0_db(&cfg_mode, v).ok_or_else(|| {
                        Error::Config("Eb/N0 sweep needs nonzero Pp or Pd to scale".into())
                    })?,
                };
                points.push(SweepPoint {
                    id: points.len(),
                    mode,
                    cfg,
                });
            }
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    pub k_at: usize,
    pub decoded_correct: usize,
    pub missed: usize,
    pub false_alarms: usize,
    pub pupe: f64,
    /// No arrivals in the horizon.
    pub empty: bool,
    pub mse: f64,
    pub sq_err_sum: f64,
    pub ebn0_db: f64,
    pub wall_time: f64,
}

/// Everything one trial produced, for inspection.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub result: TrialResult,
    pub schedule: ArrivalSchedule,
    /// `None` for the estimation experiment.
    pub list: Option<DecodedList>,
    pub trace: Trace,
}

pub fn run_trial(scheme: &Scheme, experiment: Experiment, trial: u64) -> Result<TrialResult> {
    Ok(run_trial_detailed(scheme, experiment, trial, Trace::disabled())?.result)
}

pub fn run_trial_detailed(
    scheme: &Scheme,
    experiment: Experiment,
    trial: u64,
    mut trace: Trace,
) -> Result<TrialArtifacts> {
    let clock = Instant::now();
    let cfg = scheme.cfg();
    let schedule = draw_schedule(cfg, &mut derive_stream(cfg.seed, "schedule", trial))?;
    let packets: Vec<TxPacket> = schedule
        .arrivals
        .iter()
        .map(|a| encode_packet(&a.message, scheme))
        .collect::<Result<_>>()?;
    let received = synthesize(
        &schedule,
        &packets,
        cfg,
        &mut derive_stream(cfg.seed, "noise", trial),
    )?;
    let receiver = Receiver::new(scheme);
    let truth: Vec<_> = schedule.arrivals.iter().map(|a| a.h).collect();

    let (result, list) = match experiment {
        Experiment::Decode => {
            let out = receiver.run_outer(&received, &mut trace)?;
            let pupe = compute_pupe(&schedule, &out.list);
            let (est, _) = match_by_start_and_pilot(
                &schedule,
                out.list
                    .entries()
                    .iter()
                    .map(|e| (e.start, e.message.pilot_index(), e.h_sic)),
            );
            let mse = compute_mse(&truth, &est);
            let result = TrialResult {
                trial,
                k_at: pupe.k_at,
                decoded_correct: pupe.decoded_correct,
                missed: pupe.missed,
                false_alarms: pupe.false_alarms,
                pupe: pupe.pupe,
                empty: pupe.empty,
                mse: mse.mse,
                sq_err_sum: mse.sq_err_sum,
                ebn0_db: compute_ebn0(cfg),
                wall_time: 0.0,
            };
            (result, Some(out.list))
        }
        Experiment::Estimate => {
            let dets = receiver.estimate_only(&received)?;
            let (est, unmatched) = match_by_start_and_pilot(
                &schedule,
                dets.iter().map(|d| (d.start, d.pilot_index, d.h_hat)),
            );
            let mse = compute_mse(&truth, &est);
            let k_at = schedule.len();
            let result = TrialResult {
                trial,
                k_at,
                decoded_correct: mse.matched,
                missed: mse.missed,
                false_alarms: unmatched,
                pupe: if k_at == 0 {
                    0.0
                } else {
                    mse.missed as f64 / k_at as f64
                },
                empty: k_at == 0,
                mse: mse.mse,
                sq_err_sum: mse.sq_err_sum,
                ebn0_db: compute_ebn0(cfg),
                wall_time: 0.0,
            };
            (result, None)
        }
    };
    Ok(TrialArtifacts {
        result: TrialResult {
            wall_time: clock.elapsed().as_secs_f64(),
            ..result
        },
        schedule,
        list,
        trace,
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs trials `0..trials` on `workers` threads; results are in trial order.
pub fn run_trials(
    scheme: &Scheme,
    experiment: Experiment,
    trials: usize,
    workers: usize,
) -> Result<Vec<TrialResult>> {
    pool(workers)?.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run_trial(scheme, experiment, t))
            .collect()
    })
}

/// Pooled statistics over the trials of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub trials: usize,
    pub empty_trials: usize,
    pub k_at: usize,
    pub decoded: usize,
    pub missed: usize,
    pub false_alarms: usize,
    /// `Σ missed / Σ K_aT`.
    pub pupe: f64,
    pub pupe_stderr: f64,
    /// Mean of the per-trial PUPE over non-empty trials.
    pub pupe_trial_mean: f64,
    /// `Σ |ĥ - h|² / Σ K_aT`.
    pub mse: f64,
    pub mse_stderr: f64,
    pub ebn0_db: f64,
    pub seconds: f64,
}

/// Standard error of the ratio `Σ x / Σ k` across trials.
fn ratio_stderr(pairs: &[(f64, f64)], ratio: f64) -> f64 {
    let m = pairs.len();
    let k_mean = pairs.iter().map(|p| p.1).sum::<f64>() / m as f64;
    if m < 2 || k_mean == 0.0 {
        return 0.0;
    }
    let ss: f64 = pairs.iter().map(|(x, k)| (x - ratio * k).powi(2)).sum();
    (ss / (m * (m - 1)) as f64).sqrt() / k_mean
}

pub fn aggregate(results: &[TrialResult]) -> Aggregate {
    let k_at: usize = results.iter().map(|r| r.k_at).sum();
    let missed: usize = results.iter().map(|r| r.missed).sum();
    let sq: f64 = results.iter().map(|r| r.sq_err_sum).sum();
    let ratio = |num: f64| if k_at == 0 { 0.0 } else { num / k_at as f64 };
    let pupe = ratio(missed as f64);
    let mse = ratio(sq);
    let miss_pairs: Vec<(f64, f64)> =
        results.iter().map(|r| (r.missed as f64, r.k_at as f64)).collect();
    let sq_pairs: Vec<(f64, f64)> = results.iter().map(|r| (r.sq_err_sum, r.k_at as f64)).collect();
    let nonempty: Vec<f64> = results.iter().filter(|r| !r.empty).map(|r| r.pupe).collect();
    Aggregate {
        trials: results.len(),
        empty_trials: results.len() - nonempty.len(),
        k_at,
        decoded: results.iter().map(|r| r.decoded_correct).sum(),
        missed,
        false_alarms: results.iter().map(|r| r.false_alarms).sum(),
        pupe,
        pupe_stderr: if results.is_empty() { 0.0 } else { ratio_stderr(&miss_pairs, pupe) },
        pupe_trial_mean: if nonempty.is_empty() {
            0.0
        } else {
            nonempty.iter().sum::<f64>() / nonempty.len() as f64
        },
        mse,
        mse_stderr: if results.is_empty() { 0.0 } else { ratio_stderr(&sq_pairs, mse) },
        ebn0_db: results.first().map_or(f64::NAN, |r| r.ebn0_db),
        seconds: results.iter().map(|r| r.wall_time).sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub sweep_id: usize,
    pub mode: String,
    #[serde(rename = "Ka")]
    pub ka: f64,
    #[serde(rename = "Pp")]
    pub pp: f64,
    #[serde(rename = "Pd")]
    pub pd: f64,
    pub sigma2: f64,
    pub ebn0_db: f64,
    /// Trial index, or [`AGGREGATE_LABEL`].
    pub trial: String,
    #[serde(rename = "K_aT")]
    pub k_at: usize,
    pub decoded: usize,
    pub missed: usize,
    pub false_alarms: usize,
    pub pupe: f64,
    pub mse_db: f64,
    pub seconds: f64,
}

impl CsvRow {
    fn base(point: &SweepPoint) -> CsvRow {
        CsvRow {
            sweep_id: point.id,
            mode: point.mode.to_string(),
            ka: point.cfg.ka,
            pp: point.cfg.pp,
            pd: point.cfg.pd,
            sigma2: point.cfg.sigma2,
            ebn0_db: compute_ebn0(&point.cfg),
            trial: String::new(),
            k_at: 0,
            decoded: 0,
            missed: 0,
            false_alarms: 0,
            pupe: 0.0,
            mse_db: 0.0,
            seconds: 0.0,
        }
    }

    pub fn for_trial(point: &SweepPoint, r: &TrialResult, timing: bool) -> CsvRow {
        CsvRow {
            trial: r.trial.to_string(),
            k_at: r.k_at,
            decoded: r.decoded_correct,
            missed: r.missed,
            false_alarms: r.false_alarms,
            pupe: r.pupe,
            mse_db: to_db(r.mse),
            seconds: if timing { r.wall_time } else { 0.0 },
            ..CsvRow::base(point)
        }
    }

    pub fn for_aggregate(point: &SweepPoint, a: &Aggregate, timing: bool) -> CsvRow {
        CsvRow {
            trial: AGGREGATE_LABEL.to_string(),
            k_at: a.k_at,
            decoded: a.decoded,
            missed: a.missed,
            false_alarms: a.false_alarms,
            pupe: a.pupe,
            mse_db: to_db(a.mse),
            seconds: if timing { a.seconds } else { 0.0 },
            ..CsvRow::base(point)
        }
    }

    pub fn is_aggregate(&self) -> bool {
        self.trial == AGGREGATE_LABEL
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub point: SweepPoint,
    pub trials: Vec<TrialResult>,
    pub aggregate: Aggregate,
}

impl PointResult {
    /// Trial rows followed by the aggregate row.
    pub fn rows(&self, timing: bool) -> Vec<CsvRow> {
        let mut rows: Vec<CsvRow> = self
            .trials
            .iter()
            .map(|r| CsvRow::for_trial(&self.point, r, timing))
            .collect();
        rows.push(CsvRow::for_aggregate(&self.point, &self.aggregate, timing));
        rows
    }
}

pub fn run_point(point: &SweepPoint, hcfg: &HarnessConfig) -> Result<PointResult> {
    let scheme = Scheme::new(point.cfg.clone())?;
    let trials = run_trials(&scheme, hcfg.experiment, hcfg.trials, hcfg.workers)?;
    let aggregate = aggregate(&trials);
    Ok(PointResult {
        point: point.clone(),
        trials,
        aggregate,
    })
}

/// Runs every sweep point and streams its rows to `out` as soon as the point
/// completes. Errors name the sweep point they occurred at.
pub fn run_sweep<W: Write>(
    base: &SystemConfig,
    hcfg: &HarnessConfig,
    out: W,
) -> Result<Vec<PointResult>> {
    hcfg.check()?;
    base.check()?;
    let points = sweep_points(base, hcfg)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER).map_err(csv_error)?;
    let mut results = Vec::with_capacity(points.len());
    for point in &points {
        let wrap = |e: Error| Error::Sweep {
            point: point.to_string(),
            source: Box::new(e),
        };
        let res = run_point(point, hcfg).map_err(wrap)?;
        for row in res.rows(hcfg.record_timing) {
            writer.serialize(row).map_err(csv_error).map_err(wrap)?;
        }
        writer.flush().map_err(|e| wrap(e.into()))?;
        results.push(res);
    }
    Ok(results)
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Stream(io),
            _ => unreachable!(),
        }
    } else {
        Error::Format {
            what: "CSV",
            detail: e.to_string(),
        }
    }
}

/// Writes rows with the standard header.
pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Grid and budget for [`required_ebn0`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
    pub trials: usize,
    pub workers: usize,
    pub mode: Mode,
    pub sync_pilot_bits: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            min_db: 0.0,
            max_db: 20.0,
            step_db: 0.25,
            trials: 100,
            workers: 1,
            mode: Mode::Async,
            sync_pilot_bits: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub ebn0_db: f64,
    pub aggregate: Aggregate,
}

impl Probe {
    pub fn passes(&self, target: f64) -> bool {
        self.aggregate.pupe <= target
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequiredEbn0 {
    pub ka: f64,
    pub target: f64,
    /// Smallest grid value whose pooled PUPE meets the target; `None` when
    /// even the top of the grid fails.
    pub value_db: Option<f64>,
    /// Largest probed grid value below `value_db`, which failed.
    pub below_db: Option<f64>,
    /// 95% half-width of the PUPE estimate at `value_db`.
    pub pupe_half_width: f64,
    /// Every probe in the order it was run.
    pub probes: Vec<Probe>,
}

impl RequiredEbn0 {
    pub fn is_bounded(&self) -> bool {
        self.value_db.is_some()
    }
}

/// Bisection over a common power scale on the `step_db` grid, holding the
/// config's `Pp/Pd` ratio. Every probe reuses trial seeds `0..trials`.
pub fn required_ebn0(
    base: &SystemConfig,
    ka: f64,
    target: f64,
    search: &SearchConfig,
) -> Result<RequiredEbn0> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Config(format!("target PUPE {target} is outside (0, 1]")));
    }
    if search.step_db.is_nan() || search.step_db <= 0.0 || search.max_db < search.min_db || search.trials == 0 {
        return Err(Error::Config("empty Eb/N0 search grid".into()));
    }
    let cfg_mode = mode_config(
        &SystemConfig {
            ka,
            ..base.clone()
        },
        search.mode,
        search.sync_pilot_bits,
    );
    cfg_mode.check()?;
    let last = ((search.max_db - search.min_db) / search.step_db + 1e-9).floor() as usize;
    let grid = |i: usize| search.min_db + i as f64 * search.step_db;

    let mut probes: Vec<(usize, Probe)> = Vec::new();
    let mut probe = |i: usize| -> Result<bool> {
        if let Some((_, p)) = probes.iter().find(|(j, _)| *j == i) {
            return Ok(p.passes(target));
        }
        let db = grid(i);
        let cfg = with_ebn0_db(&cfg_mode, db)
            .ok_or_else(|| Error::Config("Eb/N0 search needs nonzero Pp or Pd".into()))?;
        let scheme = Scheme::new(cfg)?;
        let results = run_trials(&scheme, Experiment::Decode, search.trials, search.workers)
            .map_err(|e| Error::Sweep {
                point: format!("{} Ka={ka} Eb/N0={db} dB", search.mode),
                source: Box::new(e),
            })?;
        let p = Probe {
            ebn0_db: db,
            aggregate: aggregate(&results),
        };
        let ok = p.passes(target);
        probes.push((i, p));
        Ok(ok)
    };

    let (value, below) = if probe(0)? {
        (Some(0), None)
    } else if !probe(last)? {
        (None, Some(last))
    } else {
        let (mut lo, mut hi) = (0, last);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if probe(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (Some(hi), Some(lo))
    };

    let half_width = value
        .and_then(|v| probes.iter().find(|(j, _)| *j == v))
        .map_or(0.0, |(_, p)| 1.96 * p.aggregate.pupe_stderr);
    Ok(RequiredEbn0 {
        ka,
        target,
        value_db: value.map(grid),
        below_db: below.map(grid),
        pupe_half_width: half_width,
        probes: probes.into_iter().map(|(_, p)| p).collect(),
    })
}

/// Searches per `Pp/Pd` ratio, and the index of the lowest bounded one.
pub type RatioSearch = (Vec<(f64, RequiredEbn0)>, Option<usize>);

/// Runs [`required_ebn0`] for each pilot-to-data power ratio `Pp/Pd` and
/// returns all searches together with the index of the lowest bounded one.
pub fn required_ebn0_over_ratios(
    base: &SystemConfig,
    ka: f64,
    target: f64,
    ratios: &[f64],
    search: &SearchConfig,
) -> Result<RatioSearch> {
    let mut all = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if !ratio.is_finite() || ratio < 0.0 {
            return Err(Error::Config(format!("invalid Pp/Pd ratio {ratio}")));
        }
        let cfg = SystemConfig {
            pd: 1.0,
            pp: ratio,
            ..base.clone()
        };
        all.push((ratio, required_ebn0(&cfg, ka, target, search)?));
    }
    let best = all
        .iter()
        .enumerate()
        .filter_map(|(i, (_, r))| r.value_db.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    Ok((all, best))
}
