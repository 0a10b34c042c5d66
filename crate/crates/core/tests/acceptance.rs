//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The long-running required-Eb/N0 trend runs only with `--ignored` or
//! `--include-ignored`. Any other argument filters criteria by substring.

use std::collections::BTreeSet;
use std::time::Instant;

use async_ura::channel::{add_scaled, draw_fading};
use async_ura::config::SystemConfig;
use async_ura::harness::{
    aggregate, required_ebn0, run_sweep, run_trials, Experiment, HarnessConfig,
    Mode, PointResult, SearchConfig, SweepAxis,
};
use async_ura::linalg::{regularized_solve, Placed};
use async_ura::metrics::{to_db, with_ebn0_db};
use async_ura::polar::{crc_append, crc_check, encode, CrcSpec, PolarCodec, RateProfile};
use async_ura::receiver::{Detection, Receiver, ResidualBuffer};
use async_ura::rng::derive_stream;
use async_ura::scheme::Scheme;
use async_ura::txchain::{encode_packet, Message};
use async_ura::Complex64;
use nalgebra::DMatrix;
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome, bool);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Pilot-to-data power ratio for the end-to-end criterion, calibrated on
/// master seeds other than the one used here.
const E2E_PILOT_RATIO: f64 = 0.07;

/// Pilot powers in dB for the channel-estimation trend (Pd/σ² = 10 dB).
const TREND_PP_DB: [f64; 5] = [-6.0, -3.0, 0.0, 3.0, 6.0];

fn codec_correctness() -> Outcome {
    let cfg = SystemConfig::desk_scale();
    let codec = PolarCodec::new(cfg.nc, cfg.payload_len(), cfg.r, cfg.list_size).unwrap();
    let mut rng = derive_stream(0, "acceptance-codec", 0);

    let mut round_trips = 0;
    for _ in 0..1000 {
        let payload: Vec<u8> = (0..cfg.payload_len()).map(|_| rng.random_range(0..2)).collect();
        let cw = codec.encode_payload(&payload).unwrap();
        let llr: Vec<f64> = cw.iter().map(|&c| if c == 0 { 30.0 } else { -30.0 }).collect();
        if codec.decode(&llr).payload() == Some(payload.as_slice()) {
            round_trips += 1;
        }
    }

    let profile = RateProfile::build(cfg.nc, cfg.info_len()).unwrap();
    let mut linear = 0;
    for _ in 0..1000 {
        let a: Vec<u8> = (0..cfg.info_len()).map(|_| rng.random_range(0..2)).collect();
        let b: Vec<u8> = (0..cfg.info_len()).map(|_| rng.random_range(0..2)).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (ea, eb) = (encode(&a, &profile).unwrap(), encode(&b, &profile).unwrap());
        let xor: Vec<u8> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
        if encode(&sum, &profile).unwrap() == xor {
            linear += 1;
        }
    }

    let crc = CrcSpec::CCITT16;
    let data: Vec<u8> = (0..96).map(|_| rng.random_range(0..2)).collect();
    let frame = crc_append(&data, &crc);
    let intact = crc_check(&frame, &crc);
    let detected = (0..frame.len())
        .filter(|&i| {
            let mut f = frame.clone();
            f[i] ^= 1;
            !crc_check(&f, &crc)
        })
        .count();

    outcome(
        round_trips == 1000 && linear == 1000 && intact && detected == frame.len(),
        format!(
            "round trips {round_trips}/1000, linearity {linear}/1000, CRC flips detected {detected}/{}",
            frame.len()
        ),
    )
}

fn dense_lmmse(
    columns: &[(usize, Vec<Complex64>)],
    y: &[Complex64],
    reg: f64,
) -> Vec<Complex64> {
    let rows = y.len();
    let mut x = DMatrix::<Complex64>::zeros(rows, columns.len());
    for (j, (start, col)) in columns.iter().enumerate() {
        for (t, v) in col.iter().enumerate() {
            if start + t < rows {
                x[(start + t, j)] = *v;
            }
        }
    }
    let yv = DMatrix::<Complex64>::from_column_slice(rows, 1, y);
    let gram = x.adjoint() * &x + DMatrix::<Complex64>::identity(columns.len(), columns.len()) * Complex64::new(reg, 0.0);
    let rhs = x.adjoint() * yv;
    let sol = gram.lu().solve(&rhs).expect("oracle system is invertible");
    sol.iter().copied().collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn lmmse_oracle() -> Outcome {
    let mut rng = derive_stream(0, "acceptance-lmmse", 0);
    let mut worst: f64 = 0.0;
    for instance in 0..100u64 {
        let n = rng.random_range(40..=100);
        let cfg = SystemConfig {
            n,
            b: 8,
            bp: 2,
            num_pilots: 4,
            r: 6,
            nc: 16,
            np: rng.random_range(8..=n - 16),
            list_size: 2,
            ka: 1.0,
            u: 1,
            t: 4 * n,
            pp: rng.random_range(0.1..2.0),
            pd: rng.random_range(0.1..2.0),
            sigma2: rng.random_range(0.01..2.0),
            seed: instance,
            ..SystemConfig::default()
        };
        let scheme = Scheme::new(cfg.clone()).unwrap();
        let rx = Receiver::new(&scheme);
        let offset = rng.random_range(0..3) * n;
        let window: Vec<Complex64> = (0..2 * n).map(|_| draw_fading(&mut rng)).collect();
        let ks = rng.random_range(1..=4);
        let mut starts = BTreeSet::new();
        while starts.len() < ks {
            starts.insert(rng.random_range(0..n));
        }

        // pilot-only estimate
        let mut dets: Vec<Detection> = starts
            .iter()
            .map(|&s| Detection {
                start: offset + s,
                pilot_index: rng.random_range(0..4),
                score: 0.0,
                h_hat: Complex64::default(),
            })
            .collect();
        rx.estimate_channels(&window, offset, &mut dets).unwrap();
        let cols: Vec<(usize, Vec<Complex64>)> = dets
            .iter()
            .map(|d| (d.start - offset, scheme.pilots().column(d.pilot_index).to_vec()))
            .collect();
        let oracle = dense_lmmse(&cols, &window, cfg.sigma2);
        let got: Vec<Complex64> = dets.iter().map(|d| d.h_hat).collect();
        worst = worst.max(rel_err(&got, &oracle));

        // re-estimate over whole reconstructed packets
        let packets: Vec<(usize, Vec<Complex64>)> = starts
            .iter()
            .map(|&s| {
                let msg = Message::random(cfg.b, cfg.bp, &mut rng);
                (s, encode_packet(&msg, &scheme).unwrap().samples)
            })
            .collect();
        let placed: Vec<Placed<'_>> = packets
            .iter()
            .map(|(s, p)| Placed {
                start: *s,
                samples: p,
            })
            .collect();
        let got = regularized_solve(&placed, &window, cfg.sigma2).unwrap();
        let oracle = dense_lmmse(&packets, &window, cfg.sigma2);
        worst = worst.max(rel_err(&got, &oracle));
    }
    outcome(worst <= 1e-9, format!("100 instances, worst relative error {worst:.2e} (limit 1e-9)"))
}

fn unit_phase<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

fn detection_exactness() -> Outcome {
    let base = SystemConfig::desk_scale();
    let n = base.n;

    let single = Scheme::new(SystemConfig { ka: 0.4, u: 1, ..base.clone() }).unwrap();
    let rx = Receiver::new(&single);
    let mut one_hits = 0;
    for seed in 0..100 {
        let mut rng = derive_stream(seed, "acceptance-detect-one", 0);
        let msg = Message::random(base.b, base.bp, &mut rng);
        let delta = n + rng.random_range(0..n);
        let packet = encode_packet(&msg, &single).unwrap();
        let mut buf = vec![Complex64::default(); base.buffer_len()];
        add_scaled(&mut buf, delta, &packet.samples, draw_fading(&mut rng));
        let dets = rx.detect(&buf[n..3 * n], n, &BTreeSet::new());
        if dets.len() == 1 && (dets[0].start, dets[0].pilot_index) == (delta, msg.pilot_index()) {
            one_hits += 1;
        }
    }

    let pair = Scheme::new(SystemConfig { ka: 2.0, u: 0, ..base.clone() }).unwrap();
    let rx = Receiver::new(&pair);
    let mut two_hits = 0;
    for seed in 0..100 {
        let mut rng = derive_stream(seed, "acceptance-detect-two", 0);
        let mut buf = vec![Complex64::default(); base.buffer_len()];
        let mut want = BTreeSet::new();
        let first = rng.random_range(0..n / 2);
        let second = rng.random_range(n / 2..n);
        for delta in [first, second] {
            let msg = Message::random(base.b, base.bp, &mut rng);
            let packet = encode_packet(&msg, &pair).unwrap();
            add_scaled(&mut buf, delta, &packet.samples, unit_phase(&mut rng));
            want.insert((delta, msg.pilot_index()));
        }
        let got: BTreeSet<(usize, usize)> = rx
            .detect(&buf[..2 * n], 0, &BTreeSet::new())
            .iter()
            .map(|d| (d.start, d.pilot_index))
            .collect();
        if got == want {
            two_hits += 1;
        }
    }
    outcome(
        one_hits >= 99 && two_hits >= 99,
        format!("single user {one_hits}/100, two users {two_hits}/100 (need 99)"),
    )
}

fn perfect_sic() -> Outcome {
    let cfg = SystemConfig::desk_scale();
    let scheme = Scheme::new(cfg.clone()).unwrap();
    let mut rng = derive_stream(0, "acceptance-sic", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let msg = Message::random(cfg.b, cfg.bp, &mut rng);
        let h = draw_fading(&mut rng);
        let delta = rng.random_range(0..cfg.t);
        let packet = encode_packet(&msg, &scheme).unwrap();
        let mut buf = vec![Complex64::default(); cfg.buffer_len()];
        add_scaled(&mut buf, delta, &packet.samples, h);
        let mut residual = ResidualBuffer::from_samples(buf);
        let support = delta..delta + cfg.n;
        let before = residual.energy(support.clone());
        residual.cancel(delta, &packet.samples, h);
        worst = worst.max(residual.energy(support) / before);
    }
    outcome(worst <= 1e-9, format!("worst post/pre energy ratio {worst:.2e} (limit 1e-9)"))
}

fn end_to_end() -> Outcome {
    let base = SystemConfig {
        ka: 2.0,
        pp: E2E_PILOT_RATIO,
        pd: 1.0,
        ..SystemConfig::desk_scale()
    };
    let cfg = with_ebn0_db(&base, 12.0).unwrap();
    let scheme = Scheme::new(cfg.clone()).unwrap();
    let trials = run_trials(&scheme, Experiment::Decode, 50, 1).unwrap();
    let agg = aggregate(&trials);
    outcome(
        agg.pupe <= 0.1,
        format!(
            "Ka=2, Eb/N0=12 dB (Pp={:.3}, Pd={:.3}), 50 trials: pooled PUPE {:.4} ± {:.4}, per-trial mean {:.4}, K_aT {} (limit 0.1)",
            cfg.pp, cfg.pd, agg.pupe, agg.pupe_stderr, agg.pupe_trial_mean, agg.k_at
        ),
    )
}

fn db_stderr(mse: f64, se: f64) -> f64 {
    10.0 / std::f64::consts::LN_10 * se / mse
}

fn estimation_trend() -> Outcome {
    let base = SystemConfig {
        pd: 10.0,
        sigma2: 1.0,
        ..SystemConfig::desk_scale()
    };
    let grid: Vec<f64> = TREND_PP_DB.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let mut hcfg = HarnessConfig::new(SweepAxis::Pp(grid.clone()));
    hcfg.trials = 100;
    hcfg.ka_values = vec![5.0, 15.0];
    hcfg.modes = vec![Mode::Sync, Mode::Async];
    hcfg.experiment = Experiment::Estimate;
    let results = run_sweep(&base, &hcfg, std::io::sink()).unwrap();

    let series = |ka: f64, mode: Mode| -> Vec<&PointResult> {
        results
            .iter()
            .filter(|r| r.point.cfg.ka == ka && r.point.mode == mode)
            .collect()
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for ka in [5.0, 15.0] {
        let sync = series(ka, Mode::Sync);
        let asyn = series(ka, Mode::Async);
        let monotone = asyn.windows(2).all(|w| {
            let (a, b) = (&w[0].aggregate, &w[1].aggregate);
            b.mse - a.mse <= (a.mse_stderr.powi(2) + b.mse_stderr.powi(2)).sqrt()
        });
        let gap = |i: usize| to_db(asyn[i].aggregate.mse) - to_db(sync[i].aggregate.mse);
        let gap_se = |i: usize| {
            let (a, s) = (&asyn[i].aggregate, &sync[i].aggregate);
            db_stderr(a.mse, a.mse_stderr).hypot(db_stderr(s.mse, s.mse_stderr))
        };
        let last = grid.len() - 1;
        let low_gap_ok = gap(0) + gap_se(0) >= 1.0;
        let shrinks = gap(last) < gap(0);
        pass &= monotone && low_gap_ok && shrinks;
        let curve = |s: &[&PointResult]| {
            s.iter()
                .map(|r| format!("{:.2}", to_db(r.aggregate.mse)))
                .collect::<Vec<_>>()
                .join("/")
        };
        notes.push(format!(
            "Ka={ka}: async {} dB, sync {} dB; (a) monotone {monotone}; (b) low-Pp gap {:.2}±{:.2} dB; (c) gap {:.2} -> {:.2} dB",
            curve(&asyn),
            curve(&sync),
            gap(0),
            gap_se(0),
            gap(0),
            gap(last)
        ));
    }
    outcome(pass, notes.join("; "))
}

fn determinism() -> Outcome {
    let base = SystemConfig {
        pp: 0.5,
        pd: 6.0,
        ..SystemConfig::desk_scale()
    };
    let mut hcfg = HarnessConfig::new(SweepAxis::Ka(vec![1.0, 3.0]));
    hcfg.trials = 6;
    hcfg.modes = vec![Mode::Async, Mode::Sync];
    let mut outputs = Vec::new();
    for workers in [1, 4, 1] {
        hcfg.workers = workers;
        let mut buf = Vec::new();
        run_sweep(&base, &hcfg, &mut buf).unwrap();
        outputs.push(buf);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "2 Ka x 2 modes x 6 trials, workers 1/4/1: {} bytes each, identical {same}",
            outputs[0].len()
        ),
    )
}

fn required_ebn0_trend() -> Outcome {
    let base = SystemConfig {
        pp: 0.15,
        pd: 1.0,
        ..SystemConfig::desk_scale()
    };
    let mut pass = true;
    let mut notes = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    for ka in [5.0, 10.0, 20.0] {
        let mut values = Vec::new();
        for mode in [Mode::Async, Mode::Sync] {
            let search = SearchConfig {
                min_db: 4.0,
                max_db: 30.0,
                trials: 50,
                mode,
                ..SearchConfig::default()
            };
            let r = required_ebn0(&base, ka, 0.1, &search).unwrap();
            values.push(r.value_db);
        }
        let (Some(a), Some(s)) = (values[0], values[1]) else {
            pass = false;
            notes.push(format!("Ka={ka}: unbounded (async {:?}, sync {:?})", values[0], values[1]));
            continue;
        };
        let gap = a - s;
        pass &= (0.0..=2.0).contains(&gap);
        if let Some((pa, ps)) = previous {
            pass &= a >= pa && s >= ps;
        }
        previous = Some((a, s));
        notes.push(format!("Ka={ka}: async {a:.2} dB, sync {s:.2} dB, gap {gap:.2} dB"));
    }
    outcome(pass, notes.join("; "))
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let long = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let list_only = args.iter().any(|a| a == "--list");

    let criteria: [Criterion; 8] = [
        ("codec-correctness", codec_correctness, false),
        ("lmmse-oracle-equivalence", lmmse_oracle, false),
        ("detection-exactness", detection_exactness, false),
        ("perfect-sic-residual", perfect_sic, false),
        ("end-to-end-sanity", end_to_end, false),
        ("channel-estimation-trend", estimation_trend, false),
        ("required-ebn0-trend", required_ebn0_trend, true),
        ("determinism", determinism, false),
    ];

    let mut failed = 0;
    for (name, run, is_long) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if list_only {
            println!("{name}: test");
            continue;
        }
        if is_long && !long {
            println!("SKIP {name} (long-running; pass --ignored to run)");
            continue;
        }
        let clock = Instant::now();
        let result = run();
        println!(
            "{} {name} [{:.1}s] {}",
            if result.pass { "PASS" } else { "FAIL" },
            clock.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
