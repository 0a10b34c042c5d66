use std::collections::BTreeSet;

use async_ura::channel::{add_scaled, draw_noise, synthesize, ArrivalEvent, ArrivalSchedule};
use async_ura::config::SystemConfig;
use async_ura::metrics::compute_pupe;
use async_ura::receiver::{bpsk_llr, DecodeState, Receiver, ResidualBuffer, Trace};
use async_ura::rng::derive_stream;
use async_ura::scheme::Scheme;
use async_ura::txchain::{encode_packet, Message};
use async_ura::Complex64;
use rand::Rng;

fn small() -> SystemConfig {
    SystemConfig {
        n: 400,
        b: 32,
        np: 100,
        nc: 64,
        list_size: 8,
        ka: 1.0,
        u: 2,
        t: 1600,
        ns: 3,
        n_max: 8,
        n_out: 3,
        pp: 1.0,
        pd: 1.0,
        sigma2: 0.1,
        ..SystemConfig::default()
    }
}

fn unit_phase<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Buffer of `T + 2n` samples holding the given `(start, message, h)` packets
/// plus optional noise.
fn buffer_with(
    scheme: &Scheme,
    users: &[(usize, Message, Complex64)],
    sigma2: f64,
    seed: u64,
) -> Vec<Complex64> {
    let cfg = scheme.cfg();
    let mut buf = vec![Complex64::default(); cfg.buffer_len()];
    for (start, msg, h) in users {
        let p = encode_packet(msg, scheme).unwrap();
        add_scaled(&mut buf, *start, &p.samples, *h);
    }
    if sigma2 > 0.0 {
        let mut rng = derive_stream(seed, "test-noise", 0);
        for y in &mut buf {
            *y += draw_noise(sigma2, &mut rng);
        }
    }
    buf
}

#[test]
fn detect_single_noiseless_packet() {
    let scheme = Scheme::new(SystemConfig { ka: 0.4, u: 1, ..small() }).unwrap();
    let rx = Receiver::new(&scheme);
    let offset = 400;
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = derive_stream(seed, "detect-one", 0);
        let mut msg = Message::random(32, 4, &mut rng);
        msg = Message::from_parts(3, 4, msg.payload(4));
        let h = async_ura::channel::draw_fading(&mut rng);
        let buf = buffer_with(&scheme, &[(offset + 17, msg, h)], 0.0, seed);
        let window = &buf[offset..offset + 800];
        let dets = rx.detect(window, offset, &BTreeSet::new());
        assert_eq!(dets.len(), 1);
        if (dets[0].start, dets[0].pilot_index) == (offset + 17, 3) {
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits}/100");
}

#[test]
fn detect_two_disjoint_noiseless_packets() {
    // equal received powers; a deep fade on one user is a near-far effect,
    // not a detection error
    let scheme = Scheme::new(SystemConfig { ka: 2.0, u: 0, ..small() }).unwrap();
    let rx = Receiver::new(&scheme);
    let mut hits = 0;
    for seed in 0..100 {
        let mut rng = derive_stream(seed, "detect-two", 0);
        let a = rng.random_range(0..150);
        let b = rng.random_range(200..400);
        let (ma, mb) = (Message::random(32, 4, &mut rng), Message::random(32, 4, &mut rng));
        let users = [
            (a, ma.clone(), unit_phase(&mut rng)),
            (b, mb.clone(), unit_phase(&mut rng)),
        ];
        let buf = buffer_with(&scheme, &users, 0.0, seed);
        let dets = rx.detect(&buf[..800], 0, &BTreeSet::new());
        let got: BTreeSet<(usize, usize)> = dets.iter().map(|d| (d.start, d.pilot_index)).collect();
        let want: BTreeSet<(usize, usize)> =
            [(a, ma.pilot_index()), (b, mb.pilot_index())].into_iter().collect();
        if got == want {
            hits += 1;
        }
    }
    assert!(hits >= 99, "{hits}/100");
}

#[test]
fn detect_on_silence_is_deterministic() {
    let scheme = Scheme::new(small()).unwrap();
    let rx = Receiver::new(&scheme);
    let zeros = vec![Complex64::default(); 800];
    let first = rx.detect(&zeros, 0, &BTreeSet::new());
    assert_eq!(first.len(), scheme.cfg().detections_per_window());
    assert!(first.iter().all(|d| d.score == 0.0));
    assert_eq!(first, rx.detect(&zeros, 0, &BTreeSet::new()));
}

#[test]
fn lmmse_scalar_example() {
    let cfg = SystemConfig {
        n: 100,
        np: 30,
        nc: 64,
        b: 32,
        t: 400,
        pp: 1.0,
        sigma2: 1.0,
        ..small()
    };
    let scheme = Scheme::new(cfg).unwrap();
    let rx = Receiver::new(&scheme);
    let h = Complex64::new(0.3, -1.1);
    let mut window = vec![Complex64::default(); 200];
    add_scaled(&mut window, 5, scheme.pilots().column(2), h);
    let mut dets = vec![async_ura::receiver::Detection {
        start: 105,
        pilot_index: 2,
        score: 0.0,
        h_hat: Complex64::default(),
    }];
    rx.estimate_channels(&window, 100, &mut dets).unwrap();
    assert!((dets[0].h_hat - h * 30.0 / 31.0).norm() < 1e-12);
}

#[test]
fn lmmse_block_diagonal_matches_separate_solves() {
    let scheme = Scheme::new(SystemConfig { n: 200, np: 60, nc: 64, b: 24, t: 800, ..small() }).unwrap();
    let rx = Receiver::new(&scheme);
    let mut rng = derive_stream(4, "block", 0);
    let (h1, h2) = (
        async_ura::channel::draw_fading(&mut rng),
        async_ura::channel::draw_fading(&mut rng),
    );
    let mut window: Vec<Complex64> = (0..400).map(|_| draw_noise(0.1, &mut rng)).collect();
    add_scaled(&mut window, 10, scheme.pilots().column(1), h1);
    add_scaled(&mut window, 150, scheme.pilots().column(6), h2);
    let det = |start, pilot_index| async_ura::receiver::Detection {
        start,
        pilot_index,
        score: 0.0,
        h_hat: Complex64::default(),
    };
    let mut joint = vec![det(10, 1), det(150, 6)];
    rx.estimate_channels(&window, 0, &mut joint).unwrap();
    for d in &joint {
        let mut single = vec![det(d.start, d.pilot_index)];
        rx.estimate_channels(&window, 0, &mut single).unwrap();
        assert!((single[0].h_hat - d.h_hat).norm() < 1e-9);
    }
}

#[test]
fn llr_examples() {
    let one = Complex64::new(1.0, 0.0);
    assert_eq!(bpsk_llr(one, one, 1.0, 1.0), 4.0);
    assert_eq!(bpsk_llr(Complex64::default(), one, 1.0, 1.0), 0.0);
}

#[test]
fn llr_signs_reproduce_the_codeword() {
    let scheme = Scheme::new(SystemConfig { sigma2: 1e-9, ..small() }).unwrap();
    let rx = Receiver::new(&scheme);
    let mut rng = derive_stream(2, "llr-sign", 0);
    let msg = Message::random(32, 4, &mut rng);
    let h = Complex64::new(-0.4, 0.9);
    let buf = buffer_with(&scheme, &[(50, msg.clone(), h)], 0.0, 0);
    let det = async_ura::receiver::Detection {
        start: 50,
        pilot_index: msg.pilot_index(),
        score: 0.0,
        h_hat: h,
    };
    let llr = rx.extract_llrs(&buf[..800], 0, &det);
    let codeword = scheme
        .codec()
        .encode_payload(msg.payload(4))
        .unwrap();
    assert_eq!(llr.len(), codeword.len());
    for (l, c) in llr.iter().zip(&codeword) {
        assert_eq!(*l > 0.0, *c == 0);
    }
}

#[test]
fn inner_window_decodes_a_lone_user() {
    // Pd/σ² = Pp/σ² = 10 dB with a unit-modulus channel
    let cfg = SystemConfig { sigma2: 0.1, ..small() };
    let scheme = Scheme::new(cfg).unwrap();
    let rx = Receiver::new(&scheme);
    let mut ok = 0;
    for seed in 0..100 {
        let mut rng = derive_stream(seed, "inner-one", 0);
        let msg = Message::random(32, 4, &mut rng);
        let delta = 400 + rng.random_range(0..400);
        let h = unit_phase(&mut rng);
        let buf = buffer_with(&scheme, &[(delta, msg.clone(), h)], 0.1, seed);
        let mut rb = ResidualBuffer::from_samples(buf);
        let out = rx
            .run_inner(&mut rb, 400, &mut DecodeState::default(), &mut Trace::disabled())
            .unwrap();
        if out.len() == 1 && out[0].message == msg && out[0].start == delta {
            ok += 1;
        }
    }
    assert!(ok >= 99, "{ok}/100");
}

#[test]
fn inner_window_on_noise_decodes_nothing() {
    let scheme = Scheme::new(small()).unwrap();
    let rx = Receiver::new(&scheme);
    let mut empty = 0;
    for seed in 0..100 {
        let buf = buffer_with(&scheme, &[], 0.1, seed);
        let mut rb = ResidualBuffer::from_samples(buf);
        let out = rx
            .run_inner(&mut rb, 0, &mut DecodeState::default(), &mut Trace::disabled())
            .unwrap();
        if out.is_empty() {
            empty += 1;
        }
    }
    assert!(empty >= 99, "{empty}/100");
}

#[test]
fn inner_window_cancels_a_noiseless_user() {
    let scheme = Scheme::new(SystemConfig { sigma2: 1e-12, ..small() }).unwrap();
    let rx = Receiver::new(&scheme);
    let mut rng = derive_stream(5, "inner-sic", 0);
    let msg = Message::random(32, 4, &mut rng);
    let h = Complex64::new(0.6, 0.7);
    let buf = buffer_with(&scheme, &[(123, msg, h)], 0.0, 0);
    let mut rb = ResidualBuffer::from_samples(buf);
    let before = rb.energy(123..523);
    let out = rx
        .run_inner(&mut rb, 0, &mut DecodeState::default(), &mut Trace::disabled())
        .unwrap();
    assert_eq!(out.len(), 1);
    assert!(rb.energy(123..523) < 1e-6 * before);
}

#[test]
fn outer_pass_with_no_arrivals_is_empty() {
    let scheme = Scheme::new(small()).unwrap();
    let rx = Receiver::new(&scheme);
    let received = synthesize(
        &ArrivalSchedule::default(),
        &[],
        scheme.cfg(),
        &mut derive_stream(0, "outer-empty", 0),
    )
    .unwrap();
    let out = rx.run_outer(&received, &mut Trace::disabled()).unwrap();
    assert!(out.list.is_empty());
}

#[test]
fn overlapping_outer_windows_merge_duplicates() {
    // One user per packet slot; every inner window is visited by several
    // outer positions, so each user can be found more than once.
    let cfg = SystemConfig { t: 2400, ns: 3, delta: 1, ..small() };
    let scheme = Scheme::new(cfg.clone()).unwrap();
    let rx = Receiver::new(&scheme);
    let mut rng = derive_stream(8, "outer-dup", 0);
    let arrivals: Vec<ArrivalEvent> = (0..cfg.horizon_packets())
        .map(|w| ArrivalEvent {
            user_id: w,
            delta: w * cfg.n + rng.random_range(0..cfg.n),
            h: unit_phase(&mut rng),
            message: Message::random(32, 4, &mut rng),
        })
        .collect();
    let schedule = ArrivalSchedule { arrivals, horizon: cfg.t };
    let packets: Vec<_> = schedule
        .arrivals
        .iter()
        .map(|a| encode_packet(&a.message, &scheme).unwrap())
        .collect();
    let received = synthesize(&schedule, &packets, &cfg, &mut rng).unwrap();
    let out = rx.run_outer(&received, &mut Trace::disabled()).unwrap();
    assert_eq!(out.list.len(), schedule.len());
    assert_eq!(compute_pupe(&schedule, &out.list).pupe, 0.0);
}

#[test]
fn sync_benchmark_at_high_snr() {
    let cfg = SystemConfig {
        ka: 2.0,
        pd: 1000.0,
        pp: 100.0,
        sigma2: 1.0,
        sync_mode: true,
        ..small()
    }
    .with_pilot_bits(8);
    let scheme = Scheme::new(cfg).unwrap();
    let (mut missed, mut total) = (0, 0);
    for trial in 0..50 {
        let r = async_ura::harness::run_trial(&scheme, async_ura::harness::Experiment::Decode, trial)
            .unwrap();
        missed += r.missed;
        total += r.k_at;
    }
    let pupe = missed as f64 / total as f64;
    assert!(pupe < 0.1, "{pupe}");
}
