//! Command-line interface: sketch building, MI estimation over sketch
//! pairs or CSV pairs, and the benchmark harness.
//!
//! Exit codes: 0 success, 1 data/runtime error, 2 usage error. Human
//! output goes to stderr; machine-readable output to stdout or files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use joinmi::aggregate::AggregateKind;
use joinmi::estimators::{
    estimate_dispatched, estimate_with, perturb_to_continuous, MiEstimator, DEFAULT_K,
};
use joinmi::harness::{
    emit_report, run_real_sweep, run_synthetic_sweep, summarize, time_comparison, DistKind,
    RealSweepConfig, Reference, SynthSweepConfig,
};
use joinmi::sketch::{build_sketch, join_sketches, Sketch, SketchMethod, SketchSide};
use joinmi::synth::KeyMode;
use joinmi::table::{full_left_join, load_csv, JoinedSample, Value, ValueType};

#[derive(Parser)]
#[command(name = "joinmi", version, about = "Join-aware mutual information estimation")]
struct Cli {
    /// Cap the number of worker threads (default: all cores, or the
    /// JOINMI_THREADS environment variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and save a table sketch.
    Sketch {
        #[command(subcommand)]
        command: SketchCommand,
    },
    /// Estimate mutual information.
    Mi {
        #[command(subcommand)]
        command: MiCommand,
    },
    /// Run benchmark sweeps.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Subcommand)]
enum SketchCommand {
    /// Build a sketch from a CSV column pair and write it as JSON.
    Build(SketchBuildArgs),
}

#[derive(Args)]
struct SketchBuildArgs {
    /// Input CSV file.
    #[arg(long)]
    input: PathBuf,
    /// Join-key column name.
    #[arg(long)]
    key: String,
    /// Value column name.
    #[arg(long)]
    value: String,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long)]
    method: SketchMethod,
    #[arg(long)]
    side: SketchSide,
    /// Sketch budget.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Aggregate for repeated keys on the aug side.
    #[arg(long, default_value = "first")]
    agg: AggregateKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the sketch JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum MiCommand {
    /// Estimate MI from a sketch pair or a CSV pair.
    Estimate(MiEstimateArgs),
}

#[derive(Args)]
struct MiEstimateArgs {
    /// Train-side sketch JSON (pairs with --aug-sketch).
    #[arg(long, conflicts_with_all = ["train_csv", "aug_csv"], requires = "aug_sketch")]
    train_sketch: Option<PathBuf>,
    /// Aug-side sketch JSON.
    #[arg(long)]
    aug_sketch: Option<PathBuf>,
    /// Train-side CSV (pairs with --aug-csv).
    #[arg(long, requires_all = ["train_key", "train_value", "aug_csv"])]
    train_csv: Option<PathBuf>,
    #[arg(long)]
    train_key: Option<String>,
    #[arg(long)]
    train_value: Option<String>,
    /// Aug-side CSV.
    #[arg(long, requires_all = ["aug_key", "aug_value", "train_csv"])]
    aug_csv: Option<PathBuf>,
    #[arg(long)]
    aug_key: Option<String>,
    #[arg(long)]
    aug_value: Option<String>,
    /// Estimate over the materialized full join instead of sketches
    /// (CSV inputs only).
    #[arg(long)]
    full_join: bool,
    /// Sketch method when sketching CSV inputs.
    #[arg(long, default_value = "tupsk")]
    method: SketchMethod,
    /// Sketch budget when sketching CSV inputs.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value = "first")]
    agg: AggregateKind,
    /// Estimator: auto (type-dispatched), mle, ksg, mixed-ksg, or dc-ksg.
    #[arg(long, default_value = "auto")]
    estimator: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Break ties in numeric columns with low-magnitude Gaussian noise.
    #[arg(long)]
    perturb: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ",")]
    delimiter: char,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Synthetic sweep with analytically known true MI.
    Synth(BenchSynthArgs),
    /// Sweep over a real CSV corpus, full-join estimate as reference.
    Real(BenchRealArgs),
    /// Timing comparison of sketch vs full-join estimation.
    Time(BenchTimeArgs),
}

#[derive(Args)]
struct BenchSynthArgs {
    /// Experiment preset: table3, fig2, or breakdown. Overrides the grid
    /// flags.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value = "trinomial")]
    dist: DistKind,
    /// Comma-separated m values; each instance draws one uniformly.
    #[arg(long, default_value = "512", value_delimiter = ',')]
    m: Vec<u32>,
    /// Comma-separated key modes (ind, dep).
    #[arg(long, default_value = "ind", value_delimiter = ',')]
    key_mode: Vec<KeyMode>,
    #[arg(long, default_value_t = 10_000)]
    n_rows: usize,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the (slow) full-join reference estimates.
    #[arg(long)]
    skip_full_join: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchRealArgs {
    /// Directory of CSV files.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Minimum sketch-join size for summary inclusion.
    #[arg(long, default_value_t = 100)]
    min_join: usize,
    #[arg(long, default_value_t = 100)]
    combinations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchTimeArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Comma-separated table sizes.
    #[arg(long = "rows", default_value = "5000,10000,20000", value_delimiter = ',')]
    rows: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_sketch(path: &PathBuf) -> joinmi::Result<Sketch> {
    let text = std::fs::read_to_string(path).map_err(|e| joinmi::Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Sketch::from_json(&text)
}

fn perturb_sample(sample: &JoinedSample, seed: u64) -> JoinedSample {
    let perturb_column = |values: Vec<f64>, seed: u64| perturb_to_continuous(&values, seed);
    let mut out = sample.clone();
    if sample.x_type == ValueType::Numeric {
        let xs: Vec<f64> = sample
            .pairs
            .iter()
            .map(|(x, _)| x.as_numeric().unwrap())
            .collect();
        for (pair, x) in out.pairs.iter_mut().zip(perturb_column(xs, seed)) {
            pair.0 = Value::Numeric(x);
        }
    }
    if sample.y_type == ValueType::Numeric {
        let ys: Vec<f64> = sample
            .pairs
            .iter()
            .map(|(_, y)| y.as_numeric().unwrap())
            .collect();
        for (pair, y) in out.pairs.iter_mut().zip(perturb_column(ys, seed.wrapping_add(1))) {
            pair.1 = Value::Numeric(y);
        }
    }
    out
}

fn cmd_sketch_build(args: &SketchBuildArgs) -> joinmi::Result<()> {
    let loaded = load_csv(&args.input, &args.key, &args.value, args.delimiter as u8)?;
    if loaded.rows_dropped > 0 {
        eprintln!("dropped {} unparseable rows", loaded.rows_dropped);
    }
    let sketch = build_sketch(
        &loaded.table,
        args.method,
        args.side,
        args.n,
        Some(args.agg),
        args.seed,
    )?;
    std::fs::write(&args.out, sketch.to_json()).map_err(|e| joinmi::Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    eprintln!(
        "{} sketch of {} ({} rows, {} distinct keys) -> {} entries at {}",
        sketch.method.name(),
        args.input.display(),
        sketch.source_n,
        sketch.source_m_k,
        sketch.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_mi_estimate(args: &MiEstimateArgs) -> joinmi::Result<()> {
    let (sample, sketch_join_size) = if let (Some(train_path), Some(aug_path)) =
        (&args.train_sketch, &args.aug_sketch)
    {
        let train = read_sketch(train_path)?;
        let aug = read_sketch(aug_path)?;
        let join = join_sketches(&train, &aug)?;
        let size = join.sample.len();
        (join.sample, Some(size))
    } else if let (Some(train_path), Some(aug_path)) = (&args.train_csv, &args.aug_csv) {
        let train = load_csv(
            train_path,
            args.train_key.as_ref().unwrap(),
            args.train_value.as_ref().unwrap(),
            args.delimiter as u8,
        )?;
        let aug = load_csv(
            aug_path,
            args.aug_key.as_ref().unwrap(),
            args.aug_value.as_ref().unwrap(),
            args.delimiter as u8,
        )?;
        if args.full_join {
            (full_left_join(&train.table, &aug.table, args.agg)?, None)
        } else {
            let train_sk = build_sketch(
                &train.table,
                args.method,
                SketchSide::Train,
                args.n,
                Some(args.agg),
                args.seed,
            )?;
            let aug_sk = build_sketch(
                &aug.table,
                args.method,
                SketchSide::Aug,
                args.n,
                Some(args.agg),
                args.seed,
            )?;
            let join = join_sketches(&train_sk, &aug_sk)?;
            let size = join.sample.len();
            (join.sample, Some(size))
        }
    } else {
        return Err(joinmi::Error::InvalidParameter(
            "provide either --train-sketch/--aug-sketch or --train-csv/--aug-csv".into(),
        ));
    };

    if sample.is_empty() {
        return Err(joinmi::Error::EmptyJoin);
    }
    let sample = if args.perturb {
        perturb_sample(&sample, args.seed)
    } else {
        sample
    };

    let estimate = if args.estimator == "auto" {
        estimate_dispatched(&sample, args.k)?
    } else {
        let estimator: MiEstimator = args.estimator.parse()?;
        estimate_with(&sample, estimator, args.k)?
    };

    let mut doc = serde_json::to_value(&estimate).unwrap();
    if let Some(size) = sketch_join_size {
        doc["sketch_join_size"] = size.into();
    } else {
        doc["full_join_size"] = estimate.n.into();
    }
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

/// The preset grids behind the headline experiments.
fn preset_configs(name: &str, args: &BenchSynthArgs) -> joinmi::Result<Vec<SynthSweepConfig>> {
    let base = |dist| {
        let mut c = SynthSweepConfig::new(dist);
        c.n = args.n;
        c.n_rows = args.n_rows;
        c.instances = args.instances;
        c.seed = args.seed;
        c.skip_full_join_estimate = true;
        c
    };
    match name {
        // the n=256 sketch-size grid: Trinomial over m and both key modes,
        // CDUnif over small m
        "table3" => {
            let mut tri = base(DistKind::Trinomial);
            tri.m_choices = vec![16, 64, 256, 512, 1024];
            tri.key_modes = vec![KeyMode::KeyInd, KeyMode::KeyDep];
            let mut cd = base(DistKind::CdUnif);
            cd.m_choices = (2..=256).collect();
            Ok(vec![tri, cd])
        }
        // join-key robustness: fixed m, both key modes
        "fig2" => {
            let mut tri = base(DistKind::Trinomial);
            tri.m_choices = vec![512];
            tri.key_modes = vec![KeyMode::KeyInd, KeyMode::KeyDep];
            Ok(vec![tri])
        }
        // estimator breakdown near high MI: CDUnif bands around
        // true MI in [1, 2] and [4.5, 5.2]
        "breakdown" => {
            let mut cd = base(DistKind::CdUnif);
            cd.m_choices = (6..=14).chain((181..=361).step_by(10)).collect();
            Ok(vec![cd])
        }
        other => Err(joinmi::Error::InvalidParameter(format!(
            "unknown preset {other:?}"
        ))),
    }
}

fn cmd_bench_synth(args: &BenchSynthArgs) -> joinmi::Result<()> {
    let configs = match &args.preset {
        Some(name) => preset_configs(name, args)?,
        None => {
            let mut c = SynthSweepConfig::new(args.dist);
            c.m_choices = args.m.clone();
            c.key_modes = args.key_mode.clone();
            c.n = args.n;
            c.n_rows = args.n_rows;
            c.instances = args.instances;
            c.seed = args.seed;
            c.skip_full_join_estimate = args.skip_full_join;
            vec![c]
        }
    };
    for config in &configs {
        let rows = run_synthetic_sweep(config)?;
        let summaries = summarize(&rows, Reference::TrueMi, 0)?;
        let out_dir = if configs.len() == 1 {
            args.out.clone()
        } else {
            args.out.join(config.dist.name())
        };
        let manifest = serde_json::to_value(config).unwrap();
        emit_report(&rows, &summaries, &manifest, &out_dir)?;
        eprintln!(
            "{}: {} rows, {} summary groups -> {}",
            config.dist.name(),
            rows.len(),
            summaries.len(),
            out_dir.display()
        );
    }
    Ok(())
}

fn cmd_bench_real(args: &BenchRealArgs) -> joinmi::Result<()> {
    let config = RealSweepConfig {
        combinations: args.combinations,
        n: args.n,
        min_join_size: args.min_join,
        seed: args.seed,
        ..RealSweepConfig::default()
    };
    let rows = run_real_sweep(&args.corpus, &config)?;
    let summaries = summarize(&rows, Reference::FullJoin, config.min_join_size)?;
    let manifest = serde_json::to_value(&config).unwrap();
    emit_report(&rows, &summaries, &manifest, &args.out)?;
    eprintln!(
        "{} rows, {} summary groups -> {}",
        rows.len(),
        summaries.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_bench_time(args: &BenchTimeArgs) -> joinmi::Result<()> {
    let rows = time_comparison(args.n, &args.rows, args.seed)?;
    println!("n_rows,full_join_us,sketch_join_us,full_mi_us,sketch_mi_us");
    for r in &rows {
        println!(
            "{},{},{},{},{}",
            r.n_rows,
            r.full_join.as_micros(),
            r.sketch_join.as_micros(),
            r.full_mi.as_micros(),
            r.sketch_mi.as_micros()
        );
    }
    Ok(())
}

fn run(cli: &Cli) -> joinmi::Result<()> {
    match &cli.command {
        Command::Sketch {
            command: SketchCommand::Build(args),
        } => cmd_sketch_build(args),
        Command::Mi {
            command: MiCommand::Estimate(args),
        } => cmd_mi_estimate(args),
        Command::Bench { command } => match command {
            BenchCommand::Synth(args) => cmd_bench_synth(args),
            BenchCommand::Real(args) => cmd_bench_real(args),
            BenchCommand::Time(args) => cmd_bench_time(args),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("JOINMI_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(threads) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
