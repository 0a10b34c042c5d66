use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use async_ura::harness::{
    mode_config, required_ebn0_over_ratios, run_sweep, run_trial_detailed, Aggregate, Experiment,
    HarnessConfig, Mode, PointResult, SearchConfig, SweepAxis,
};
use async_ura::metrics::{from_db, to_db};
use async_ura::polar::{golden, RateProfile};
use async_ura::receiver::Trace;
use async_ura::rng::derive_stream;
use async_ura::scheme::Scheme;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod overrides;

use overrides::ConfigArgs;

#[derive(Parser)]
#[command(name = "async-ura", version, about = "Asynchronous unsourced random access simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PUPE / MSE sweep over Ka, Eb/N0 or pilot power; writes CSV.
    Simulate(SimulateArgs),
    /// Smallest Eb/N0 on a grid meeting a target PUPE.
    RequiredEbn0(RequiredArgs),
    /// Channel-estimation MSE versus pilot power, sync and async.
    MseExperiment(MseArgs),
    /// One trial with its ground truth and optional decoder trace.
    SingleTrial(SingleArgs),
    /// Writes the pilot codebook and pattern matrix as a binary sidecar.
    ExportCodebooks(ExportArgs),
    /// Writes polar encoder reference vectors.
    GoldenVectors(GoldenArgs),
    /// Prints the effective configuration as TOML.
    ShowConfig(ShowArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AxisKind {
    Ka,
    Ebn0,
    Pp,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Async,
    Sync,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Async => Mode::Async,
            ModeArg::Sync => Mode::Sync,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExperimentArg {
    Decode,
    Estimate,
}

#[derive(Args)]
struct RunArgs {
    /// Monte Carlo trials per point.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Pilot bits of the synchronous benchmark.
    #[arg(long, default_value_t = 13)]
    sync_bp: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value = "ka")]
    axis: AxisKind,
    /// Axis values; Eb/N0 in dB, Pp linear.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Ka values crossed with an Eb/N0 or Pp axis.
    #[arg(long, value_delimiter = ',')]
    ka_values: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "async")]
    modes: Vec<ModeArg>,
    #[arg(long, value_enum, default_value = "decode")]
    experiment: ExperimentArg,
    #[arg(long, default_value_t = 0.1)]
    target: f64,
    /// Record wall-clock seconds in the CSV.
    #[arg(long)]
    timing: bool,
    /// CSV output path; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RequiredArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Target PUPE.
    #[arg(long, default_value_t = 0.1)]
    target: f64,
    #[arg(long, value_enum, default_value = "async")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    min_db: f64,
    #[arg(long, default_value_t = 20.0)]
    max_db: f64,
    #[arg(long, default_value_t = 0.25)]
    step_db: f64,
    /// Pilot-to-data power ratios Pp/Pd to try; the config ratio when absent.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
}

#[derive(Args)]
struct MseArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Ka values; the config Ka when absent.
    #[arg(long, value_delimiter = ',')]
    ka_values: Vec<f64>,
    /// Pilot powers in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-6,-3,0,3,6")]
    pp_db: Vec<f64>,
    /// Data SNR Pd/σ² in dB.
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    data_snr_db: f64,
    #[arg(long)]
    timing: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_enum, default_value = "async")]
    mode: ModeArg,
    #[arg(long, default_value_t = 13)]
    sync_bp: usize,
    #[arg(long, value_enum, default_value = "decode")]
    experiment: ExperimentArg,
    /// Print the per-window decoder log.
    #[arg(long)]
    trace: bool,
    /// Write ground-truth arrivals as CSV.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct GoldenArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShowArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_summary(results: &[PointResult]) {
    for r in results {
        let a: &Aggregate = &r.aggregate;
        eprintln!(
            "point {}: PUPE {:.4} ± {:.4}, MSE {:.2} dB (± {:.1e}), K_aT {}, false alarms {}",
            r.point,
            a.pupe,
            a.pupe_stderr,
            to_db(a.mse),
            a.mse_stderr,
            a.k_at,
            a.false_alarms
        );
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let base = args.config.resolve()?;
    let axis = match args.axis {
        AxisKind::Ka => SweepAxis::Ka(args.values),
        AxisKind::Ebn0 => SweepAxis::Ebn0Db(args.values),
        AxisKind::Pp => SweepAxis::Pp(args.values),
    };
    let mut hcfg = HarnessConfig::new(axis);
    hcfg.trials = args.run.trials;
    hcfg.workers = args.run.workers;
    hcfg.sync_pilot_bits = args.run.sync_bp;
    hcfg.ka_values = args.ka_values;
    hcfg.modes = args.modes.into_iter().map(Mode::from).collect();
    hcfg.target_pupe = args.target;
    hcfg.record_timing = args.timing;
    hcfg.experiment = match args.experiment {
        ExperimentArg::Decode => Experiment::Decode,
        ExperimentArg::Estimate => Experiment::Estimate,
    };
    let out = output(args.out.as_deref())?;
    let results = run_sweep(&base, &hcfg, out)?;
    print_summary(&results);
    Ok(())
}

fn required(args: RequiredArgs) -> Result<()> {
    let base = args.config.resolve()?;
    let search = SearchConfig {
        min_db: args.min_db,
        max_db: args.max_db,
        step_db: args.step_db,
        trials: args.run.trials,
        workers: args.run.workers,
        mode: args.mode.into(),
        sync_pilot_bits: args.run.sync_bp,
    };
    let ratios = if args.ratios.is_empty() {
        if base.pd <= 0.0 {
            bail!("Pd must be positive when no --ratios are given");
        }
        vec![base.pp / base.pd]
    } else {
        args.ratios
    };
    let (all, best) = required_ebn0_over_ratios(&base, base.ka, args.target, &ratios, &search)?;
    println!("mode,Ka,target,ratio,required_db,below_db,pupe,pupe_half_width,probes");
    for (ratio, r) in &all {
        let at = r
            .probes
            .iter()
            .find(|p| Some(p.ebn0_db) == r.value_db)
            .map_or(f64::NAN, |p| p.aggregate.pupe);
        let fmt = |v: Option<f64>| v.map_or("unbounded".to_string(), |x| x.to_string());
        println!(
            "{},{},{},{},{},{},{},{},{}",
            search.mode,
            r.ka,
            r.target,
            ratio,
            fmt(r.value_db),
            r.below_db.map_or(String::new(), |x| x.to_string()),
            at,
            r.pupe_half_width,
            r.probes.len()
        );
    }
    match best {
        Some(i) => eprintln!(
            "required Eb/N0 {} dB at Pp/Pd = {}",
            all[i].1.value_db.unwrap_or(f64::NAN),
            all[i].0
        ),
        None => eprintln!("target not reached within [{}, {}] dB", args.min_db, args.max_db),
    }
    Ok(())
}

fn mse_experiment(args: MseArgs) -> Result<()> {
    let mut base = args.config.resolve()?;
    base.pd = from_db(args.data_snr_db) * base.sigma2;
    let grid: Vec<f64> = args.pp_db.iter().map(|&db| from_db(db)).collect();
    let mut hcfg = HarnessConfig::new(SweepAxis::Pp(grid));
    hcfg.trials = args.run.trials;
    hcfg.workers = args.run.workers;
    hcfg.sync_pilot_bits = args.run.sync_bp;
    hcfg.ka_values = args.ka_values;
    hcfg.modes = vec![Mode::Sync, Mode::Async];
    hcfg.experiment = Experiment::Estimate;
    hcfg.record_timing = args.timing;
    let out = output(args.out.as_deref())?;
    let results = run_sweep(&base, &hcfg, out)?;
    print_summary(&results);
    Ok(())
}

fn single_trial(args: SingleArgs) -> Result<()> {
    let cfg = mode_config(&args.config.resolve()?, args.mode.into(), args.sync_bp);
    let scheme = Scheme::new(cfg)?;
    let trace = if args.trace {
        Trace::enabled()
    } else {
        Trace::disabled()
    };
    let experiment = match args.experiment {
        ExperimentArg::Decode => Experiment::Decode,
        ExperimentArg::Estimate => Experiment::Estimate,
    };
    let art = run_trial_detailed(&scheme, experiment, args.trial, trace)?;
    if let Some(path) = &args.truth {
        let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        art.schedule.write_trace(BufWriter::new(f))?;
    }
    let mut stdout = io::stdout().lock();
    for line in art.trace.lines() {
        writeln!(stdout, "{line}")?;
    }
    if let Some(list) = &art.list {
        for e in list.entries() {
            writeln!(
                stdout,
                "decoded start={} pilot={} message={} window={} h_sic={:.4}{:+.4}i",
                e.start,
                e.message.pilot_index(),
                e.message.to_hex(),
                e.window_id,
                e.h_sic.re,
                e.h_sic.im
            )?;
        }
    }
    let r = art.result;
    writeln!(
        stdout,
        "trial {}: K_aT {}, decoded {}, missed {}, false alarms {}, PUPE {:.4}, MSE {:.2} dB, Eb/N0 {:.2} dB",
        r.trial,
        r.k_at,
        r.decoded_correct,
        r.missed,
        r.false_alarms,
        r.pupe,
        to_db(r.mse),
        r.ebn0_db
    )?;
    Ok(())
}

fn export_codebooks(args: ExportArgs) -> Result<()> {
    let scheme = Scheme::new(args.config.resolve()?)?;
    let f = File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut w = BufWriter::new(f);
    async_ura::codebooks::write_sidecar(&mut w, scheme.pilots(), scheme.patterns())?;
    w.flush()?;
    Ok(())
}

fn golden_vectors(args: GoldenArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let profile = RateProfile::build(cfg.nc, cfg.info_len())?;
    let crc = async_ura::polar::CrcSpec::for_width(cfg.r)?;
    let frames = golden::generate(&profile, &crc, args.frames, &mut derive_stream(cfg.seed, "golden", 0));
    golden::write(output(args.out.as_deref())?, &profile, &frames)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::RequiredEbn0(a) => required(a),
        Command::MseExperiment(a) => mse_experiment(a),
        Command::SingleTrial(a) => single_trial(a),
        Command::ExportCodebooks(a) => export_codebooks(a),
        Command::GoldenVectors(a) => golden_vectors(a),
        Command::ShowConfig(a) => {
            print!("{}", a.config.resolve()?.to_toml_string());
            Ok(())
        }
    }
}
