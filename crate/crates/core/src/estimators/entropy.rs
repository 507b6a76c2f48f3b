//! Entropy estimators: the plug-in (frequency) estimator for symbols and
//! the 1-NN spacing estimator for continuous samples. Outputs in nats.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::table::{Symbol, Value};

use super::digamma::digamma;

/// Plug-in entropy of an empirical symbol distribution, in nats. Numeric
/// values are compared bitwise.
pub fn entropy_mle(values: &[Value]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EstimatorInput {
            estimator: "mle",
            requirement: "non-empty input".into(),
        });
    }
    let mut counts: HashMap<Symbol<'_>, usize> = HashMap::new();
    for v in values {
        *counts.entry(v.symbol()).or_insert(0) += 1;
    }
    Ok(entropy_from_counts(counts.values().copied(), values.len()))
}

pub(crate) fn entropy_from_counts(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    // fixed summation order so results don't depend on hash-map iteration
    let mut counts: Vec<usize> = counts.collect();
    counts.sort_unstable();
    let h: f64 = counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    // -0.0 from single-symbol inputs
    h.max(0.0)
}

/// 1-NN spacing estimator of differential entropy:
/// `mean(log consecutive spacing) + psi(N) - psi(1)` on the sorted sample.
/// Zero spacings are floored at machine epsilon times the data scale.
pub fn entropy_spacing_1nn(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, k: 1 });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = sorted[n - 1] - sorted[0];
    let floor = f64::EPSILON * range.max(1.0);
    let mean_log_spacing = sorted
        .windows(2)
        .map(|w| (w[1] - w[0]).max(floor).ln())
        .sum::<f64>()
        / (n - 1) as f64;
    Ok(mean_log_spacing + digamma(n as f64) - digamma(1.0))
}
