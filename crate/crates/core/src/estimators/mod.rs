//! Mutual information estimators over a joined sample, all in nats:
//! the plug-in (MLE) estimator for symbol pairs and the k-NN family
//! (KSG, MixedKSG, DC-KSG) for numeric and mixed pairs, plus the
//! type-based dispatch rule and the tie-breaking perturbation helper.

mod digamma;
mod entropy;
mod knn;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use digamma::digamma;
pub use entropy::{entropy_mle, entropy_spacing_1nn};

use crate::error::{Error, Result};
use crate::table::{JoinedSample, Symbol, Value, ValueType};

use entropy::entropy_from_counts;
use knn::{knn_distances_sorted_1d, KdTree2, SortedCounter};

/// Default neighbor count for the k-NN estimators.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiEstimator {
    Mle,
    Ksg,
    MixedKsg,
    DcKsg,
}

impl MiEstimator {
    pub fn name(&self) -> &'static str {
        match self {
            MiEstimator::Mle => "mle",
            MiEstimator::Ksg => "ksg",
            MiEstimator::MixedKsg => "mixed-ksg",
            MiEstimator::DcKsg => "dc-ksg",
        }
    }
}

impl fmt::Display for MiEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MiEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mle" => Ok(MiEstimator::Mle),
            "ksg" => Ok(MiEstimator::Ksg),
            "mixed-ksg" => Ok(MiEstimator::MixedKsg),
            "dc-ksg" => Ok(MiEstimator::DcKsg),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator {other:?}"
            ))),
        }
    }
}

/// An MI estimate in nats. k-NN estimates may be negative at finite sample
/// sizes and are reported unclipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiEstimate {
    pub estimator: MiEstimator,
    pub value_nats: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Points excluded by DC-KSG because their discrete class was smaller
    /// than k+1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_points: Option<usize>,
}

/// Type-based estimator dispatch: discrete-discrete uses the plug-in
/// estimator, numeric-numeric uses MixedKSG, mixed pairs use DC-KSG.
pub fn dispatch_estimator(x_type: ValueType, y_type: ValueType) -> MiEstimator {
    match (x_type, y_type) {
        (ValueType::Discrete, ValueType::Discrete) => MiEstimator::Mle,
        (ValueType::Numeric, ValueType::Numeric) => MiEstimator::MixedKsg,
        _ => MiEstimator::DcKsg,
    }
}

fn require_non_empty(sample: &JoinedSample, estimator: &'static str) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EstimatorInput {
            estimator,
            requirement: "non-empty sample".into(),
        });
    }
    Ok(())
}

/// Plug-in MI: `H(X) + H(Y) - H(X,Y)` over exact symbol frequencies.
pub fn mi_mle(sample: &JoinedSample) -> Result<MiEstimate> {
    require_non_empty(sample, "mle")?;
    let n = sample.len();
    let mut x_counts: HashMap<Symbol<'_>, usize> = HashMap::new();
    let mut y_counts: HashMap<Symbol<'_>, usize> = HashMap::new();
    let mut xy_counts: HashMap<(Symbol<'_>, Symbol<'_>), usize> = HashMap::new();
    for (x, y) in &sample.pairs {
        *x_counts.entry(x.symbol()).or_insert(0) += 1;
        *y_counts.entry(y.symbol()).or_insert(0) += 1;
        *xy_counts.entry((x.symbol(), y.symbol())).or_insert(0) += 1;
    }
    let hx = entropy_from_counts(x_counts.values().copied(), n);
    let hy = entropy_from_counts(y_counts.values().copied(), n);
    let hxy = entropy_from_counts(xy_counts.values().copied(), n);
    Ok(MiEstimate {
        estimator: MiEstimator::Mle,
        value_nats: (hx + hy - hxy).max(0.0),
        n,
        k: None,
        skipped_points: None,
    })
}

fn numeric_columns(sample: &JoinedSample, estimator: &'static str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(sample.len());
    let mut ys = Vec::with_capacity(sample.len());
    for (x, y) in &sample.pairs {
        match (x.as_numeric(), y.as_numeric()) {
            (Some(a), Some(b)) => {
                xs.push(a);
                ys.push(b);
            }
            _ => {
                return Err(Error::EstimatorInput {
                    estimator,
                    requirement: "both columns numeric".into(),
                })
            }
        }
    }
    Ok((xs, ys))
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if n <= k {
        return Err(Error::SampleTooSmall { n, k });
    }
    Ok(())
}

/// KSG estimator (variant 1) for continuous numeric pairs:
/// `psi(k) + psi(N) - mean[psi(n_x + 1) + psi(n_y + 1)]` with strict
/// marginal counts inside the k-th neighbor max-norm radius.
pub fn mi_ksg(sample: &JoinedSample, k: usize) -> Result<MiEstimate> {
    require_non_empty(sample, "ksg")?;
    let (xs, ys) = numeric_columns(sample, "ksg")?;
    let n = xs.len();
    check_k(n, k)?;

    let tree = KdTree2::build(&xs, &ys);
    let x_counter = SortedCounter::new(&xs);
    let y_counter = SortedCounter::new(&ys);

    let mut acc = 0.0;
    for i in 0..n {
        let rho = tree.kth_neighbor_distance(i, k);
        let n_x = x_counter.count_within(xs[i], rho, true).saturating_sub(1);
        let n_y = y_counter.count_within(ys[i], rho, true).saturating_sub(1);
        acc += digamma((n_x + 1) as f64) + digamma((n_y + 1) as f64);
    }
    let value = digamma(k as f64) + digamma(n as f64) - acc / n as f64;
    Ok(MiEstimate {
        estimator: MiEstimator::Ksg,
        value_nats: value,
        n,
        k: Some(k),
        skipped_points: None,
    })
}

/// MixedKSG estimator for numeric pairs with possible ties or discrete
/// mass: in regions where the k-th neighbor distance collapses to zero it
/// counts exact tie multiplicities and recovers the plug-in estimator,
/// elsewhere it behaves like KSG with `ln N` in place of `psi(N)`.
pub fn mi_mixed_ksg(sample: &JoinedSample, k: usize) -> Result<MiEstimate> {
    require_non_empty(sample, "mixed-ksg")?;
    let (xs, ys) = numeric_columns(sample, "mixed-ksg")?;
    let n = xs.len();
    check_k(n, k)?;

    let tree = KdTree2::build(&xs, &ys);
    let x_counter = SortedCounter::new(&xs);
    let y_counter = SortedCounter::new(&ys);
    let mut dup_counts: HashMap<(u64, u64), usize> = HashMap::new();
    for i in 0..n {
        *dup_counts
            .entry((xs[i].to_bits(), ys[i].to_bits()))
            .or_insert(0) += 1;
    }

    let ln_n = (n as f64).ln();
    let mut acc = 0.0;
    for i in 0..n {
        let rho = tree.kth_neighbor_distance(i, k);
        // Counts include the query point itself: at rho = 0 they are the
        // exact tie multiplicities (plug-in recovery), otherwise strict
        // neighborhood sizes as in KSG.
        let (k_tilde, n_x, n_y) = if rho == 0.0 {
            (
                dup_counts[&(xs[i].to_bits(), ys[i].to_bits())],
                x_counter.count_within(xs[i], 0.0, false),
                y_counter.count_within(ys[i], 0.0, false),
            )
        } else {
            (
                k,
                x_counter.count_within(xs[i], rho, true),
                y_counter.count_within(ys[i], rho, true),
            )
        };
        acc += digamma(k_tilde as f64) + ln_n
            - digamma(n_x as f64)
            - digamma(n_y as f64);
    }
    Ok(MiEstimate {
        estimator: MiEstimator::MixedKsg,
        value_nats: acc / n as f64,
        n,
        k: Some(k),
        skipped_points: None,
    })
}

/// Extracts (discrete label id, continuous value) pairs from a sample with
/// exactly one discrete and one numeric column, normalizing orientation.
fn discrete_continuous_columns(
    sample: &JoinedSample,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let (discrete_is_x, ok) = match (sample.x_type, sample.y_type) {
        (ValueType::Discrete, ValueType::Numeric) => (true, true),
        (ValueType::Numeric, ValueType::Discrete) => (false, true),
        _ => (false, false),
    };
    if !ok {
        return Err(Error::EstimatorInput {
            estimator: "dc-ksg",
            requirement: "one discrete and one numeric column".into(),
        });
    }
    let mut label_ids: HashMap<Symbol<'_>, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(sample.len());
    let mut values = Vec::with_capacity(sample.len());
    for (x, y) in &sample.pairs {
        let (d, c) = if discrete_is_x { (x, y) } else { (y, x) };
        let next = label_ids.len();
        let id = *label_ids.entry(d.symbol()).or_insert(next);
        labels.push(id);
        values.push(c.as_numeric().ok_or_else(|| Error::EstimatorInput {
            estimator: "dc-ksg",
            requirement: "homogeneous numeric column".into(),
        })?);
    }
    Ok((labels, values))
}

/// DC-KSG estimator for one discrete and one continuous variable:
/// per-class k-NN distances on the continuous axis, then global
/// neighborhood cardinalities. Points whose class has fewer than k+1
/// members are skipped and counted.
pub fn mi_dc_ksg(sample: &JoinedSample, k: usize) -> Result<MiEstimate> {
    require_non_empty(sample, "dc-ksg")?;
    let (labels, values) = discrete_continuous_columns(sample)?;
    let n = values.len();
    check_k(n, k)?;

    let class_count = labels.iter().copied().max().unwrap() + 1;
    let mut class_members: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &c) in labels.iter().enumerate() {
        class_members[c].push(i);
    }

    let global = SortedCounter::new(&values);
    let mut acc = 0.0;
    let mut included = 0usize;
    let mut skipped = 0usize;
    for members in &class_members {
        if members.len() < k + 1 {
            skipped += members.len();
            continue;
        }
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| {
            values[members[a]]
                .partial_cmp(&values[members[b]])
                .unwrap()
        });
        let sorted_vals: Vec<f64> = order.iter().map(|&p| values[members[p]]).collect();
        let dists = knn_distances_sorted_1d(&sorted_vals, k);
        let n_c = members.len() as f64;
        for (pos, &d) in dists.iter().enumerate() {
            let m_i = global
                .count_within(sorted_vals[pos], d, false)
                .saturating_sub(1);
            acc += digamma(n_c) + digamma(m_i as f64);
            included += 1;
        }
    }
    if included == 0 {
        return Err(Error::EstimatorInput {
            estimator: "dc-ksg",
            requirement: format!("at least one class with more than k={k} members"),
        });
    }
    let value = digamma(n as f64) + digamma(k as f64) - acc / included as f64;
    Ok(MiEstimate {
        estimator: MiEstimator::DcKsg,
        value_nats: value,
        n,
        k: Some(k),
        skipped_points: Some(skipped),
    })
}

/// Breaks ties by adding seeded Gaussian noise with standard deviation
/// `1e-6 * max(sample std, 1)`.
pub fn perturb_to_continuous(values: &[f64], seed: u64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sigma = 1e-6 * var.sqrt().max(1.0);
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut rng = StdRng::seed_from_u64(seed);
    values.iter().map(|x| x + normal.sample(&mut rng)).collect()
}

/// Runs the estimator chosen for the sample's type combination.
pub fn estimate_dispatched(sample: &JoinedSample, k: usize) -> Result<MiEstimate> {
    match dispatch_estimator(sample.x_type, sample.y_type) {
        MiEstimator::Mle => mi_mle(sample),
        MiEstimator::MixedKsg => mi_mixed_ksg(sample, k),
        MiEstimator::DcKsg => mi_dc_ksg(sample, k),
        MiEstimator::Ksg => unreachable!("dispatch never selects plain KSG"),
    }
}

/// Runs a named estimator on the sample.
pub fn estimate_with(sample: &JoinedSample, estimator: MiEstimator, k: usize) -> Result<MiEstimate> {
    match estimator {
        MiEstimator::Mle => mi_mle(sample),
        MiEstimator::Ksg => mi_ksg(sample, k),
        MiEstimator::MixedKsg => mi_mixed_ksg(sample, k),
        MiEstimator::DcKsg => mi_dc_ksg(sample, k),
    }
}

/// Builds a numeric-numeric sample from two equal-length columns.
pub fn numeric_sample(xs: &[f64], ys: &[f64]) -> JoinedSample {
    JoinedSample {
        pairs: xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| (Value::Numeric(x), Value::Numeric(y)))
            .collect(),
        x_type: ValueType::Numeric,
        y_type: ValueType::Numeric,
    }
}

/// Builds a sample with x as discrete labels and y numeric; used when
/// applying DC-KSG to numeric data treated as discrete on one side.
pub fn labelled_sample(labels: &[f64], ys: &[f64]) -> JoinedSample {
    JoinedSample {
        pairs: labels
            .iter()
            .zip(ys)
            .map(|(&x, &y)| (Value::Discrete(format!("{x}")), Value::Numeric(y)))
            .collect(),
        x_type: ValueType::Discrete,
        y_type: ValueType::Numeric,
    }
}

#[cfg(test)]
mod tests;
