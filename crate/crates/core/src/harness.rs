//! Experiment harness: sweeps synthetic instances or a real CSV corpus,
//! comparing sketch-based MI estimates against true MI (synthetic) or the
//! full-join estimate (real), and emits plot-ready CSV/JSON reports.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::AggregateKind;
use crate::error::{Error, Result};
use crate::estimators::{estimate_dispatched, MiEstimator};
use crate::sketch::{build_sketch, join_sketches, SketchMethod, SketchSide};
use crate::synth::{generate_cdunif, generate_trinomial, KeyMode, SynthInstance};
use crate::table::{enumerate_column_pairs, full_left_join, load_csv, ColumnPairRef};

/// Which synthetic family a sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistKind {
    Trinomial,
    CdUnif,
}

impl DistKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistKind::Trinomial => "trinomial",
            DistKind::CdUnif => "cdunif",
        }
    }
}

impl std::str::FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trinomial" => Ok(DistKind::Trinomial),
            "cdunif" => Ok(DistKind::CdUnif),
            other => Err(Error::InvalidParameter(format!(
                "unknown distribution {other:?}"
            ))),
        }
    }
}

/// Configuration for a synthetic sweep. Each instance draws its `m` from
/// `m_choices` and (for Trinomial) a target MI uniform in
/// `target_mi_range`; instance i uses seed `seed + i`, shared across key
/// modes so both decompositions see the same underlying sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSweepConfig {
    pub dist: DistKind,
    pub m_choices: Vec<u32>,
    pub key_modes: Vec<KeyMode>,
    pub methods: Vec<SketchMethod>,
    pub n: usize,
    pub n_rows: usize,
    pub instances: usize,
    pub seed: u64,
    pub k: usize,
    /// Skip the full-join estimate (sketch rows still carry the join size).
    pub skip_full_join_estimate: bool,
    pub target_mi_range: (f64, f64),
}

impl SynthSweepConfig {
    pub fn new(dist: DistKind) -> Self {
        SynthSweepConfig {
            dist,
            m_choices: vec![512],
            key_modes: vec![KeyMode::KeyInd],
            methods: SketchMethod::ALL.to_vec(),
            n: 256,
            n_rows: 10_000,
            instances: 100,
            seed: 0,
            k: crate::estimators::DEFAULT_K,
            skip_full_join_estimate: false,
            target_mi_range: (0.05, 3.5),
        }
    }
}

/// One (instance, method) measurement. Optional fields are absent when a
/// stage failed (e.g. empty sketch join) or was not requested.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub key_mode: Option<KeyMode>,
    pub dist: Option<DistKind>,
    pub m: Option<u32>,
    pub method: Option<SketchMethod>,
    pub n: usize,
    pub estimator: Option<MiEstimator>,
    pub seed: u64,
    pub sketch_join_size: usize,
    pub full_join_size: usize,
    pub mi_sketch: Option<f64>,
    pub mi_fulljoin: Option<f64>,
    pub mi_true: Option<f64>,
}

/// Aggregate metrics for one (method, estimator, key mode) group.
#[derive(Debug, Clone, Serialize)]
pub struct MetricSummary {
    pub method: Option<SketchMethod>,
    pub estimator: Option<MiEstimator>,
    pub key_mode: Option<KeyMode>,
    pub mse: f64,
    pub rmse: f64,
    pub pearson_r: f64,
    pub spearman_r: f64,
    pub avg_sketch_join_size: f64,
    pub join_size_pct: f64,
    pub count: usize,
}

/// Which column of the rows serves as the reference value for error
/// metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    TrueMi,
    FullJoin,
}

fn instance_rows(
    instance: &SynthInstance,
    dataset: &str,
    dist: DistKind,
    m: u32,
    config: &SynthSweepConfig,
    seed: u64,
) -> Vec<ExperimentRow> {
    let full = full_left_join(&instance.train, &instance.aug, AggregateKind::First);
    let (full_join_size, mi_fulljoin) = match &full {
        Ok(sample) => {
            let mi = if config.skip_full_join_estimate {
                None
            } else {
                estimate_dispatched(sample, config.k).ok()
            };
            (sample.len(), mi)
        }
        Err(_) => (0, None),
    };

    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let joined = build_sketch(
            &instance.train,
            method,
            SketchSide::Train,
            config.n,
            Some(AggregateKind::First),
            seed,
        )
        .and_then(|train_sk| {
            let aug_sk = build_sketch(
                &instance.aug,
                method,
                SketchSide::Aug,
                config.n,
                Some(AggregateKind::First),
                seed,
            )?;
            join_sketches(&train_sk, &aug_sk)
        });
        let (sketch_join_size, estimate) = match joined {
            Ok(join) => {
                let est = estimate_dispatched(&join.sample, config.k).ok();
                (join.sample.len(), est)
            }
            Err(_) => (0, None),
        };
        rows.push(ExperimentRow {
            dataset: dataset.to_string(),
            key_mode: Some(instance.key_mode),
            dist: Some(dist),
            m: Some(m),
            method: Some(method),
            n: config.n,
            estimator: estimate.as_ref().map(|e| e.estimator),
            seed,
            sketch_join_size,
            full_join_size,
            mi_sketch: estimate.map(|e| e.value_nats),
            mi_fulljoin: mi_fulljoin.as_ref().map(|e| e.value_nats),
            mi_true: Some(instance.true_mi),
        });
    }
    rows
}

/// Runs the synthetic sweep; rows come back sorted by (key mode, instance
/// seed, method) regardless of execution order.
pub fn run_synthetic_sweep(config: &SynthSweepConfig) -> Result<Vec<ExperimentRow>> {
    if config.m_choices.is_empty() || config.key_modes.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one m and one key mode".into(),
        ));
    }
    let work: Vec<(KeyMode, usize)> = config
        .key_modes
        .iter()
        .flat_map(|&mode| (0..config.instances).map(move |i| (mode, i)))
        .collect();

    let mut rows: Vec<ExperimentRow> = work
        .par_iter()
        .map(|&(mode, idx)| -> Result<Vec<ExperimentRow>> {
            let seed = config.seed + idx as u64;
            // instance-level draws must not depend on the key mode
            let mut rng = StdRng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
            let m = config.m_choices[rng.random_range(0..config.m_choices.len())];
            let dataset = format!("{}-{idx}", config.dist.name());
            let instance = match config.dist {
                DistKind::Trinomial => {
                    let target = rng.random_range(config.target_mi_range.0..config.target_mi_range.1);
                    generate_trinomial(m, target, config.n_rows, mode, seed)?.0
                }
                DistKind::CdUnif => generate_cdunif(m, config.n_rows, mode, seed)?.0,
            };
            Ok(instance_rows(&instance, &dataset, config.dist, m, config, seed))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    rows.sort_by(|a, b| {
        let ka = (a.key_mode.map(|m| m.name()), a.seed, a.method.map(|m| m.name()));
        let kb = (b.key_mode.map(|m| m.name()), b.seed, b.method.map(|m| m.name()));
        ka.cmp(&kb)
    });
    Ok(rows)
}

/// Configuration for a real-corpus sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealSweepConfig {
    /// How many (train pair, aug pair) combinations to sample.
    pub combinations: usize,
    pub methods: Vec<SketchMethod>,
    pub n: usize,
    pub k: usize,
    /// Rows below this sketch-join size are kept but excluded from
    /// summaries.
    pub min_join_size: usize,
    pub seed: u64,
}

impl Default for RealSweepConfig {
    fn default() -> Self {
        RealSweepConfig {
            combinations: 100,
            methods: SketchMethod::ALL.to_vec(),
            n: 1024,
            k: crate::estimators::DEFAULT_K,
            min_join_size: 100,
            seed: 0,
        }
    }
}

fn pair_label(p: &ColumnPairRef) -> String {
    let file = p
        .path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{file}[{}->{}]", p.key_column, p.value_column)
}

/// Sweeps uniformly sampled cross-file column-pair combinations of a CSV
/// corpus: the train side supplies the target column, the aug side the
/// candidate feature.
pub fn run_real_sweep(corpus_dir: &Path, config: &RealSweepConfig) -> Result<Vec<ExperimentRow>> {
    let corpus = enumerate_column_pairs(corpus_dir)?;
    if corpus.pairs.is_empty() {
        return Err(Error::EmptyCorpus(corpus_dir.to_path_buf()));
    }
    let pairs = &corpus.pairs;

    // uniform sample of cross-file combinations, without replacement
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(config.combinations);
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut attempts = 0usize;
    while chosen.len() < config.combinations && attempts < config.combinations * 100 {
        attempts += 1;
        let a = rng.random_range(0..pairs.len());
        let b = rng.random_range(0..pairs.len());
        if pairs[a].path == pairs[b].path {
            continue;
        }
        if seen.insert((a, b)) {
            chosen.push((a, b));
        }
    }

    let mut rows: Vec<ExperimentRow> = chosen
        .par_iter()
        .map(|&(a, b)| -> Vec<ExperimentRow> {
            let (train_ref, aug_ref) = (&pairs[a], &pairs[b]);
            let dataset = format!("{}|{}", pair_label(train_ref), pair_label(aug_ref));
            let loaded = (
                load_csv(&train_ref.path, &train_ref.key_column, &train_ref.value_column, b','),
                load_csv(&aug_ref.path, &aug_ref.key_column, &aug_ref.value_column, b','),
            );
            let (Ok(train), Ok(aug)) = loaded else {
                return vec![ExperimentRow {
                    dataset,
                    key_mode: None,
                    dist: None,
                    m: None,
                    method: None,
                    n: config.n,
                    estimator: None,
                    seed: config.seed,
                    sketch_join_size: 0,
                    full_join_size: 0,
                    mi_sketch: None,
                    mi_fulljoin: None,
                    mi_true: None,
                }];
            };

            let full = full_left_join(&train.table, &aug.table, AggregateKind::First);
            let (full_join_size, mi_fulljoin) = match &full {
                Ok(sample) => (
                    sample.len(),
                    estimate_dispatched(sample, config.k).ok().map(|e| e.value_nats),
                ),
                Err(_) => (0, None),
            };

            config
                .methods
                .iter()
                .map(|&method| {
                    let joined = build_sketch(
                        &train.table,
                        method,
                        SketchSide::Train,
                        config.n,
                        Some(AggregateKind::First),
                        config.seed,
                    )
                    .and_then(|train_sk| {
                        let aug_sk = build_sketch(
                            &aug.table,
                            method,
                            SketchSide::Aug,
                            config.n,
                            Some(AggregateKind::First),
                            config.seed,
                        )?;
                        join_sketches(&train_sk, &aug_sk)
                    });
                    let (sketch_join_size, estimate) = match joined {
                        Ok(join) => {
                            let est = estimate_dispatched(&join.sample, config.k).ok();
                            (join.sample.len(), est)
                        }
                        Err(_) => (0, None),
                    };
                    ExperimentRow {
                        dataset: dataset.clone(),
                        key_mode: None,
                        dist: None,
                        m: None,
                        method: Some(method),
                        n: config.n,
                        estimator: estimate.as_ref().map(|e| e.estimator),
                        seed: config.seed,
                        sketch_join_size,
                        full_join_size,
                        mi_sketch: estimate.map(|e| e.value_nats),
                        mi_fulljoin,
                        mi_true: None,
                    }
                })
                .collect()
        })
        .flatten()
        .collect();

    rows.sort_by(|a, b| {
        (&a.dataset, a.method.map(|m| m.name()))
            .cmp(&(&b.dataset, b.method.map(|m| m.name())))
    });
    Ok(rows)
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Average ranks (1-based), ties sharing the mean of their rank range.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Summarizes rows per (method, estimator, key mode) group against the
/// chosen reference. Rows missing the estimate or the reference, and rows
/// whose sketch-join size is at or below `min_join_size`, are excluded.
pub fn summarize(
    rows: &[ExperimentRow],
    reference: Reference,
    min_join_size: usize,
) -> Result<Vec<MetricSummary>> {
    let mut groups: Vec<(
        (Option<SketchMethod>, Option<MiEstimator>, Option<KeyMode>),
        Vec<&ExperimentRow>,
    )> = Vec::new();
    for row in rows {
        let reference_value = match reference {
            Reference::TrueMi => row.mi_true,
            Reference::FullJoin => row.mi_fulljoin,
        };
        if row.mi_sketch.is_none()
            || reference_value.is_none()
            || row.sketch_join_size <= min_join_size
        {
            continue;
        }
        let key = (row.method, row.estimator, row.key_mode);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    let mut summaries = Vec::with_capacity(groups.len());
    for ((method, estimator, key_mode), members) in groups {
        if members.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "group {:?}/{:?}/{:?} has fewer than 2 usable rows",
                method.map(|m| m.name()),
                estimator.map(|e| e.name()),
                key_mode.map(|k| k.name()),
            )));
        }
        let est: Vec<f64> = members.iter().map(|r| r.mi_sketch.unwrap()).collect();
        let refs: Vec<f64> = members
            .iter()
            .map(|r| match reference {
                Reference::TrueMi => r.mi_true.unwrap(),
                Reference::FullJoin => r.mi_fulljoin.unwrap(),
            })
            .collect();
        let mse = est
            .iter()
            .zip(&refs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / est.len() as f64;
        let avg_join = members.iter().map(|r| r.sketch_join_size as f64).sum::<f64>()
            / members.len() as f64;
        let n = members[0].n as f64;
        summaries.push(MetricSummary {
            method,
            estimator,
            key_mode,
            mse,
            rmse: mse.sqrt(),
            pearson_r: pearson(&est, &refs),
            spearman_r: spearman(&est, &refs),
            avg_sketch_join_size: avg_join,
            join_size_pct: 100.0 * avg_join / n,
            count: members.len(),
        });
    }
    Ok(summaries)
}

const ROWS_HEADER: &str =
    "dataset,key_mode,dist,m,method,n,estimator,seed,sketch_join_size,full_join_size,mi_sketch,mi_fulljoin,mi_true";

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes rows.csv, summary.csv, and manifest.json. Byte-stable given
/// identical inputs.
pub fn emit_report(
    rows: &[ExperimentRow],
    summaries: &[MetricSummary],
    manifest: &serde_json::Value,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let write = |name: &str, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        let mut file = std::fs::File::create(&path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        file.write_all(contents.as_bytes()).map_err(|e| Error::Io {
            path,
            source: e,
        })
    };

    let mut rows_csv = String::from(ROWS_HEADER);
    rows_csv.push('\n');
    for r in rows {
        rows_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.dataset,
            opt_str(&r.key_mode.map(|k| k.name())),
            opt_str(&r.dist.map(|d| d.name())),
            opt_str(&r.m),
            opt_str(&r.method.map(|m| m.name())),
            r.n,
            opt_str(&r.estimator.map(|e| e.name())),
            r.seed,
            r.sketch_join_size,
            r.full_join_size,
            fmt_f64(r.mi_sketch),
            fmt_f64(r.mi_fulljoin),
            fmt_f64(r.mi_true),
        ));
    }
    write("rows.csv", rows_csv)?;

    let mut summary_csv = String::from(
        "method,estimator,key_mode,count,mse,rmse,pearson_r,spearman_r,avg_sketch_join_size,join_size_pct\n",
    );
    for s in summaries {
        summary_csv.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.2},{:.2}\n",
            opt_str(&s.method.map(|m| m.name())),
            opt_str(&s.estimator.map(|e| e.name())),
            opt_str(&s.key_mode.map(|k| k.name())),
            s.count,
            s.mse,
            s.rmse,
            s.pearson_r,
            s.spearman_r,
            s.avg_sketch_join_size,
            s.join_size_pct,
        ));
    }
    write("summary.csv", summary_csv)?;

    let manifest = serde_json::json!({
        "format_version": 1,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config": manifest,
    });
    write("manifest.json", serde_json::to_string_pretty(&manifest).unwrap() + "\n")
}

/// One timing row, all durations median-of-5 after one warmup.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub n_rows: usize,
    pub full_join: Duration,
    pub sketch_join: Duration,
    pub full_mi: Duration,
    pub sketch_mi: Duration,
}

fn median_of_5(mut f: impl FnMut()) -> Duration {
    f(); // warmup
    let mut samples: Vec<Duration> = (0..5)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .collect();
    samples.sort();
    samples[2]
}

/// Compares full-join and sketch-join timings on KeyInd Trinomial
/// instances of the given sizes.
pub fn time_comparison(n: usize, n_rows_list: &[usize], seed: u64) -> Result<Vec<TimingRow>> {
    let mut out = Vec::with_capacity(n_rows_list.len());
    for &n_rows in n_rows_list {
        let (instance, _) = generate_trinomial(512, 1.5, n_rows, KeyMode::KeyInd, seed)?;
        let train_sk = build_sketch(
            &instance.train,
            SketchMethod::Tupsk,
            SketchSide::Train,
            n,
            Some(AggregateKind::First),
            seed,
        )?;
        let aug_sk = build_sketch(
            &instance.aug,
            SketchMethod::Tupsk,
            SketchSide::Aug,
            n,
            Some(AggregateKind::First),
            seed,
        )?;

        let full_join = median_of_5(|| {
            full_left_join(&instance.train, &instance.aug, AggregateKind::First).unwrap();
        });
        let sketch_join = median_of_5(|| {
            join_sketches(&train_sk, &aug_sk).unwrap();
        });
        let full_sample =
            full_left_join(&instance.train, &instance.aug, AggregateKind::First)?;
        let sketch_sample = join_sketches(&train_sk, &aug_sk)?.sample;
        let full_mi = median_of_5(|| {
            estimate_dispatched(&full_sample, crate::estimators::DEFAULT_K).unwrap();
        });
        let sketch_mi = median_of_5(|| {
            estimate_dispatched(&sketch_sample, crate::estimators::DEFAULT_K).unwrap();
        });
        out.push(TimingRow {
            n_rows,
            full_join,
            sketch_join,
            full_mi,
            sketch_mi,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk_row(
        method: SketchMethod,
        mi_sketch: f64,
        mi_true: f64,
        join: usize,
    ) -> ExperimentRow {
        ExperimentRow {
            dataset: "t".into(),
            key_mode: Some(KeyMode::KeyInd),
            dist: Some(DistKind::Trinomial),
            m: Some(16),
            method: Some(method),
            n: 256,
            estimator: Some(MiEstimator::Mle),
            seed: 0,
            sketch_join_size: join,
            full_join_size: 1000,
            mi_sketch: Some(mi_sketch),
            mi_fulljoin: None,
            mi_true: Some(mi_true),
        }
    }

    #[test]
    fn summarize_exact_match_is_perfect() {
        let rows: Vec<ExperimentRow> = (0..5)
            .map(|i| mk_row(SketchMethod::Tupsk, i as f64, i as f64, 200))
            .collect();
        let s = summarize(&rows, Reference::TrueMi, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mse, 0.0);
        assert!((s[0].spearman_r - 1.0).abs() < 1e-12);
        assert_eq!(s[0].count, 5);
        assert!((s[0].avg_sketch_join_size - 200.0).abs() < 1e-12);
        assert!((s[0].join_size_pct - 200.0 / 256.0 * 100.0).abs() < 1e-9);
    }

    #[test]
    fn summarize_reversed_ranking() {
        let rows: Vec<ExperimentRow> = (0..5)
            .map(|i| mk_row(SketchMethod::Tupsk, (5 - i) as f64, i as f64, 200))
            .collect();
        let s = summarize(&rows, Reference::TrueMi, 0).unwrap();
        assert!((s[0].spearman_r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn summarize_filters_small_joins() {
        let mut rows: Vec<ExperimentRow> = (0..5)
            .map(|i| mk_row(SketchMethod::Tupsk, i as f64, i as f64, 200))
            .collect();
        rows.push(mk_row(SketchMethod::Tupsk, 99.0, 0.0, 50));
        let s = summarize(&rows, Reference::TrueMi, 100).unwrap();
        assert_eq!(s[0].count, 5);
        assert_eq!(s[0].mse, 0.0);
    }

    #[test]
    fn summarize_too_few_rows_errors() {
        let rows = vec![mk_row(SketchMethod::Tupsk, 1.0, 1.0, 200)];
        assert!(summarize(&rows, Reference::TrueMi, 0).is_err());
    }

    #[test]
    fn spearman_tie_handling() {
        // ranks of [1, 2, 2, 4] -> [1, 2.5, 2.5, 4]
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        let r = spearman(&[1.0, 2.0, 2.0, 4.0], &[10.0, 20.0, 20.0, 40.0]);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_instances_empty_sweep() {
        let mut config = SynthSweepConfig::new(DistKind::Trinomial);
        config.instances = 0;
        let rows = run_synthetic_sweep(&config).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn small_sweep_deterministic_and_sound() {
        let mut config = SynthSweepConfig::new(DistKind::Trinomial);
        config.m_choices = vec![16];
        config.instances = 4;
        config.n_rows = 2000;
        config.key_modes = vec![KeyMode::KeyInd, KeyMode::KeyDep];
        let rows = run_synthetic_sweep(&config).unwrap();
        assert_eq!(rows.len(), 4 * 2 * SketchMethod::ALL.len());
        for row in &rows {
            assert!(row.sketch_join_size <= row.full_join_size);
            assert!(row.sketch_join_size <= 2 * config.n);
            assert_eq!(row.full_join_size, 2000);
        }
        let again = run_synthetic_sweep(&config).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.mi_sketch, b.mi_sketch);
            assert_eq!(a.sketch_join_size, b.sketch_join_size);
        }
    }

    #[test]
    fn report_emission_round_trip() {
        let mut config = SynthSweepConfig::new(DistKind::Trinomial);
        config.m_choices = vec![8];
        config.instances = 3;
        config.n_rows = 500;
        config.n = 64;
        let rows = run_synthetic_sweep(&config).unwrap();
        let summaries = summarize(&rows, Reference::TrueMi, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = serde_json::to_value(&config).unwrap();
        emit_report(&rows, &summaries, &manifest, dir.path()).unwrap();
        let first = std::fs::read(dir.path().join("rows.csv")).unwrap();
        emit_report(&rows, &summaries, &manifest, dir.path()).unwrap();
        let second = std::fs::read(dir.path().join("rows.csv")).unwrap();
        assert_eq!(first, second);

        // rows.csv loads back through the CSV reader without loss
        let loaded = load_csv(&dir.path().join("rows.csv"), "dataset", "mi_sketch", b',').unwrap();
        assert_eq!(loaded.table.len() + loaded.rows_dropped, rows.len());
    }
}
