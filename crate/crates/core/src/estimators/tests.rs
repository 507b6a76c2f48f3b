use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::table::{JoinedSample, Value, ValueType};

fn discrete_sample(pairs: &[(&str, &str)]) -> JoinedSample {
    JoinedSample {
        pairs: pairs
            .iter()
            .map(|(x, y)| (Value::Discrete(x.to_string()), Value::Discrete(y.to_string())))
            .collect(),
        x_type: ValueType::Discrete,
        y_type: ValueType::Discrete,
    }
}

fn gaussian_pair(n: usize, r: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.sample(normal);
        let b: f64 = rng.sample(normal);
        xs.push(a);
        ys.push(r * a + (1.0 - r * r).sqrt() * b);
    }
    (xs, ys)
}

#[test]
fn dispatch_rule() {
    assert_eq!(
        dispatch_estimator(ValueType::Discrete, ValueType::Discrete),
        MiEstimator::Mle
    );
    assert_eq!(
        dispatch_estimator(ValueType::Numeric, ValueType::Numeric),
        MiEstimator::MixedKsg
    );
    assert_eq!(
        dispatch_estimator(ValueType::Discrete, ValueType::Numeric),
        MiEstimator::DcKsg
    );
    assert_eq!(
        dispatch_estimator(ValueType::Numeric, ValueType::Discrete),
        MiEstimator::DcKsg
    );
}

#[test]
fn mle_self_information_equals_entropy() {
    let mut rng = StdRng::seed_from_u64(1);
    let symbols = ["a", "b", "c", "d"];
    let xs: Vec<&str> = (0..400)
        .map(|_| symbols[rng.random_range(0..symbols.len())])
        .collect();
    let sample = discrete_sample(&xs.iter().map(|&x| (x, x)).collect::<Vec<_>>());
    let mi = mi_mle(&sample).unwrap();
    let h = entropy_mle(
        &xs.iter()
            .map(|&x| Value::Discrete(x.to_string()))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert!((mi.value_nats - h).abs() < 1e-12);
}

#[test]
fn mle_constant_pair_zero() {
    let sample = discrete_sample(&vec![("a", "b"); 50]);
    assert_eq!(mi_mle(&sample).unwrap().value_nats, 0.0);
}

#[test]
fn mle_nonnegative_and_symmetric() {
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..20 {
        let pairs: Vec<(String, String)> = (0..100)
            .map(|_| {
                (
                    format!("x{}", rng.random_range(0..5)),
                    format!("y{}", rng.random_range(0..5)),
                )
            })
            .collect();
        let sample = discrete_sample(
            &pairs
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect::<Vec<_>>(),
        );
        let forward = mi_mle(&sample).unwrap().value_nats;
        let backward = mi_mle(&sample.swapped()).unwrap().value_nats;
        assert!(forward >= 0.0);
        assert!((forward - backward).abs() < 1e-12);
    }
}

#[test]
fn mle_relabeling_invariance() {
    let mut rng = StdRng::seed_from_u64(3);
    let pairs: Vec<(String, String)> = (0..200)
        .map(|_| {
            (
                format!("x{}", rng.random_range(0..6)),
                format!("y{}", rng.random_range(0..4)),
            )
        })
        .collect();
    let sample = discrete_sample(
        &pairs
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect::<Vec<_>>(),
    );
    // bijection on x symbols
    let relabelled = JoinedSample {
        pairs: sample
            .pairs
            .iter()
            .map(|(x, y)| {
                let Value::Discrete(s) = x else { unreachable!() };
                (Value::Discrete(format!("relabel::{s}")), y.clone())
            })
            .collect(),
        x_type: ValueType::Discrete,
        y_type: ValueType::Discrete,
    };
    assert!(
        (mi_mle(&sample).unwrap().value_nats - mi_mle(&relabelled).unwrap().value_nats).abs()
            < 1e-12
    );
}

// Bias law for the plug-in estimator on independent uniform symbols:
// I - E[I_hat] ~ (m_x + m_y - m_xy - 1) / 2N. With I = 0 and full joint
// support (m_xy = m_x * m_y) the mean estimate should approach
// (m_x - 1)(m_y - 1) / 2N.
#[test]
fn mle_bias_law_independent_uniform() {
    let m = 8usize;
    let n = 1000usize;
    let trials = 500usize;
    let predicted = ((m - 1) * (m - 1)) as f64 / (2 * n) as f64;
    let mut rng = StdRng::seed_from_u64(4);
    let mut mean_est = 0.0;
    for _ in 0..trials {
        let pairs: Vec<(String, String)> = (0..n)
            .map(|_| {
                (
                    format!("x{}", rng.random_range(0..m)),
                    format!("y{}", rng.random_range(0..m)),
                )
            })
            .collect();
        let sample = discrete_sample(
            &pairs
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect::<Vec<_>>(),
        );
        mean_est += mi_mle(&sample).unwrap().value_nats;
    }
    mean_est /= trials as f64;
    let rel = (mean_est - predicted).abs() / predicted;
    assert!(
        rel < 0.2,
        "mean estimate {mean_est} vs predicted bias {predicted} (rel {rel})"
    );
}

#[test]
fn ksg_independent_gaussians_near_zero() {
    let (xs, ys) = gaussian_pair(10_000, 0.0, 5);
    let mi = mi_ksg(&numeric_sample(&xs, &ys), 3).unwrap();
    assert!(mi.value_nats.abs() < 0.05, "mi = {}", mi.value_nats);
}

#[test]
fn ksg_correlated_gaussians() {
    let r: f64 = 0.9;
    let expected = -0.5 * (1.0 - r * r).ln();
    let (xs, ys) = gaussian_pair(10_000, r, 6);
    let mi = mi_ksg(&numeric_sample(&xs, &ys), 3).unwrap();
    assert!(
        (mi.value_nats - expected).abs() < 0.1,
        "mi = {} vs {expected}",
        mi.value_nats
    );
}

#[test]
fn ksg_common_affine_invariance() {
    let (xs, ys) = gaussian_pair(800, 0.6, 7);
    let base = mi_ksg(&numeric_sample(&xs, &ys), 3).unwrap().value_nats;
    let sx: Vec<f64> = xs.iter().map(|x| 2.0 * x + 5.0).collect();
    let sy: Vec<f64> = ys.iter().map(|y| 2.0 * y + 5.0).collect();
    let mapped = mi_ksg(&numeric_sample(&sx, &sy), 3).unwrap().value_nats;
    assert!((base - mapped).abs() < 1e-9, "{base} vs {mapped}");
}

#[test]
fn ksg_permutation_invariance() {
    let (xs, ys) = gaussian_pair(500, 0.5, 8);
    let base = mi_ksg(&numeric_sample(&xs, &ys), 3).unwrap().value_nats;
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    let mut rng = StdRng::seed_from_u64(9);
    for i in (1..idx.len()).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let px: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let py: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let permuted = mi_ksg(&numeric_sample(&px, &py), 3).unwrap().value_nats;
    assert!((base - permuted).abs() < 1e-9);
}

#[test]
fn ksg_sample_too_small() {
    let sample = numeric_sample(&[1.0, 2.0], &[1.0, 2.0]);
    assert!(matches!(
        mi_ksg(&sample, 3),
        Err(crate::error::Error::SampleTooSmall { .. })
    ));
}

#[test]
fn mixed_ksg_recovers_plug_in_on_discrete_data() {
    // 4x4 support with a dependent joint distribution
    let mut rng = StdRng::seed_from_u64(10);
    let n = 5_000;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(0..4) as f64;
        let y = if rng.random::<f64>() < 0.6 {
            x
        } else {
            rng.random_range(0..4) as f64
        };
        xs.push(x);
        ys.push(y);
    }
    let sample = numeric_sample(&xs, &ys);
    let mixed = mi_mixed_ksg(&sample, 3).unwrap().value_nats;
    let plug_in = mi_mle(&sample).unwrap().value_nats;
    assert!(
        (mixed - plug_in).abs() < 0.05,
        "mixed {mixed} vs plug-in {plug_in}"
    );
}

#[test]
fn mixed_ksg_constant_column_near_zero() {
    let mut rng = StdRng::seed_from_u64(11);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let ys = vec![1.0; xs.len()];
    let mi = mi_mixed_ksg(&numeric_sample(&xs, &ys), 3).unwrap();
    assert!(mi.value_nats.abs() < 0.05, "mi = {}", mi.value_nats);
}

fn cdunif_raw(m: u32, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(0..m) as f64;
        xs.push(x);
        ys.push(x + 2.0 * rng.random::<f64>());
    }
    (xs, ys)
}

fn cdunif_true_mi(m: u32) -> f64 {
    (m as f64).ln() - (m as f64 - 1.0) * 2f64.ln() / m as f64
}

#[test]
fn mixed_ksg_cdunif_closed_form() {
    let (xs, ys) = cdunif_raw(5, 10_000, 12);
    let mi = mi_mixed_ksg(&numeric_sample(&xs, &ys), 3).unwrap();
    let expected = cdunif_true_mi(5);
    assert!((expected - 1.0549).abs() < 1e-3);
    assert!(
        (mi.value_nats - expected).abs() < 0.1,
        "mi = {} vs {expected}",
        mi.value_nats
    );
}

#[test]
fn dc_ksg_independent_labels_near_zero() {
    let mut rng = StdRng::seed_from_u64(13);
    let n = 10_000;
    let labels: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
    let ys: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let mi = mi_dc_ksg(&labelled_sample(&labels, &ys), 3).unwrap();
    assert!(mi.value_nats.abs() < 0.05, "mi = {}", mi.value_nats);
}

#[test]
fn dc_ksg_cdunif_closed_form() {
    let (xs, ys) = cdunif_raw(5, 10_000, 14);
    let mi = mi_dc_ksg(&labelled_sample(&xs, &ys), 3).unwrap();
    let expected = cdunif_true_mi(5);
    assert!(
        (mi.value_nats - expected).abs() < 0.1,
        "mi = {} vs {expected}",
        mi.value_nats
    );
}

#[test]
fn dc_ksg_separated_ranges() {
    let mut rng = StdRng::seed_from_u64(15);
    let n = 10_000;
    let mut labels = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random::<bool>() {
            labels.push(0.0);
            ys.push(rng.random::<f64>());
        } else {
            labels.push(1.0);
            ys.push(10.0 + rng.random::<f64>());
        }
    }
    let mi = mi_dc_ksg(&labelled_sample(&labels, &ys), 3).unwrap();
    assert!(
        (mi.value_nats - 2f64.ln()).abs() < 0.05,
        "mi = {}",
        mi.value_nats
    );
}

#[test]
fn dc_ksg_symmetry_under_swap() {
    let (xs, ys) = cdunif_raw(4, 600, 16);
    let sample = labelled_sample(&xs, &ys);
    let forward = mi_dc_ksg(&sample, 3).unwrap().value_nats;
    let backward = mi_dc_ksg(&sample.swapped(), 3).unwrap().value_nats;
    assert!((forward - backward).abs() < 1e-12);
}

#[test]
fn dc_ksg_small_classes_skipped() {
    // one big class, one singleton class
    let mut labels = vec![0.0; 50];
    labels.push(1.0);
    let mut rng = StdRng::seed_from_u64(17);
    let ys: Vec<f64> = (0..51).map(|_| rng.random::<f64>()).collect();
    let mi = mi_dc_ksg(&labelled_sample(&labels, &ys), 3).unwrap();
    assert_eq!(mi.skipped_points, Some(1));
}

#[test]
fn perturb_breaks_ties_with_small_noise() {
    let values: Vec<f64> = (0..10_000).map(|i| (i % 7) as f64).collect();
    let perturbed = perturb_to_continuous(&values, 99);
    let mut sorted = perturbed.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(sorted.windows(2).all(|w| w[0] < w[1]), "ties remain");
    let range = 6.0;
    let max_delta = values
        .iter()
        .zip(&perturbed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_delta < 1e-4 * range, "max delta {max_delta}");
}

#[test]
fn perturbed_ksg_consistent_with_mixed_ksg() {
    let (xs, ys) = cdunif_raw(5, 10_000, 18);
    let mixed = mi_mixed_ksg(&numeric_sample(&xs, &ys), 3).unwrap().value_nats;
    let px = perturb_to_continuous(&xs, 19);
    let ksg = mi_ksg(&numeric_sample(&px, &ys), 3).unwrap().value_nats;
    assert!((ksg - mixed).abs() < 0.1, "ksg {ksg} vs mixed {mixed}");
}
