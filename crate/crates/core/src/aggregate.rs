//! Featurization functions that collapse repeated candidate-table keys
//! into a single feature value per key.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateKind {
    Avg,
    Sum,
    Min,
    Max,
    Count,
    Mode,
    First,
}

impl AggregateKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggregateKind::Avg => "avg",
            AggregateKind::Sum => "sum",
            AggregateKind::Min => "min",
            AggregateKind::Max => "max",
            AggregateKind::Count => "count",
            AggregateKind::Mode => "mode",
            AggregateKind::First => "first",
        }
    }
}

impl fmt::Display for AggregateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" => Ok(AggregateKind::Avg),
            "sum" => Ok(AggregateKind::Sum),
            "min" => Ok(AggregateKind::Min),
            "max" => Ok(AggregateKind::Max),
            "count" => Ok(AggregateKind::Count),
            "mode" => Ok(AggregateKind::Mode),
            "first" => Ok(AggregateKind::First),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregate {other:?}"
            ))),
        }
    }
}

/// Collapses a non-empty group of values into one feature value.
///
/// AVG/SUM/MIN/MAX require numeric input; COUNT outputs the multiplicity
/// as a number for any input type; MODE picks the most frequent value with
/// ties broken by first occurrence; FIRST picks the first value in input
/// order.
pub fn aggregate<'a, I>(values: I, kind: AggregateKind) -> Result<Value>
where
    I: IntoIterator<Item = &'a Value>,
{
    let values: Vec<&Value> = values.into_iter().collect();
    if values.is_empty() {
        return Err(Error::EmptyAggregate);
    }

    let numeric = |agg: &'static str| -> Result<Vec<f64>> {
        values
            .iter()
            .map(|v| {
                v.as_numeric()
                    .ok_or(Error::AggregateTypeMismatch { agg })
            })
            .collect()
    };

    match kind {
        AggregateKind::Avg => {
            let xs = numeric("avg")?;
            Ok(Value::Numeric(xs.iter().sum::<f64>() / xs.len() as f64))
        }
        AggregateKind::Sum => {
            let xs = numeric("sum")?;
            Ok(Value::Numeric(xs.iter().sum()))
        }
        AggregateKind::Min => {
            let xs = numeric("min")?;
            Ok(Value::Numeric(xs.iter().copied().fold(f64::INFINITY, f64::min)))
        }
        AggregateKind::Max => {
            let xs = numeric("max")?;
            Ok(Value::Numeric(
                xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ))
        }
        AggregateKind::Count => Ok(Value::Numeric(values.len() as f64)),
        AggregateKind::Mode => {
            // most frequent value; ties broken by first occurrence
            let mut counts: Vec<(usize, usize)> = Vec::new(); // (first index, count)
            let mut index: std::collections::HashMap<crate::table::Symbol<'_>, usize> =
                std::collections::HashMap::new();
            for (i, v) in values.iter().enumerate() {
                match index.get(&v.symbol()) {
                    Some(&slot) => counts[slot].1 += 1,
                    None => {
                        index.insert(v.symbol(), counts.len());
                        counts.push((i, 1));
                    }
                }
            }
            let (best_idx, _) = counts
                .iter()
                .copied()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            Ok(values[best_idx].clone())
        }
        AggregateKind::First => Ok(values[0].clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(xs: &[f64]) -> Vec<Value> {
        xs.iter().map(|&x| Value::Numeric(x)).collect()
    }

    #[test]
    fn avg_worked_example() {
        assert_eq!(
            aggregate(&nums(&[2.0, 2.0, 5.0]), AggregateKind::Avg).unwrap(),
            Value::Numeric(3.0)
        );
    }

    #[test]
    fn mode_worked_example() {
        assert_eq!(
            aggregate(&nums(&[0.0, 3.0, 3.0]), AggregateKind::Mode).unwrap(),
            Value::Numeric(3.0)
        );
    }

    #[test]
    fn count_singleton() {
        assert_eq!(
            aggregate(&nums(&[1.0]), AggregateKind::Count).unwrap(),
            Value::Numeric(1.0)
        );
    }

    #[test]
    fn singleton_identity_except_count() {
        let v = nums(&[7.5]);
        for kind in [
            AggregateKind::Avg,
            AggregateKind::Sum,
            AggregateKind::Min,
            AggregateKind::Max,
            AggregateKind::Mode,
            AggregateKind::First,
        ] {
            assert_eq!(aggregate(&v, kind).unwrap(), Value::Numeric(7.5));
        }
    }

    #[test]
    fn mode_tie_breaks_by_first_occurrence() {
        let vals = vec![
            Value::Discrete("x".into()),
            Value::Discrete("y".into()),
            Value::Discrete("y".into()),
            Value::Discrete("x".into()),
        ];
        assert_eq!(
            aggregate(&vals, AggregateKind::Mode).unwrap(),
            Value::Discrete("x".into())
        );
        let permuted = vec![
            Value::Discrete("y".into()),
            Value::Discrete("x".into()),
            Value::Discrete("x".into()),
            Value::Discrete("y".into()),
        ];
        assert_eq!(
            aggregate(&permuted, AggregateKind::Mode).unwrap(),
            Value::Discrete("y".into())
        );
    }

    #[test]
    fn symmetric_aggregates_permutation_invariant() {
        let a = nums(&[3.0, 1.0, 2.0, 2.0]);
        let b = nums(&[2.0, 2.0, 3.0, 1.0]);
        for kind in [
            AggregateKind::Avg,
            AggregateKind::Sum,
            AggregateKind::Min,
            AggregateKind::Max,
            AggregateKind::Count,
        ] {
            assert_eq!(aggregate(&a, kind).unwrap(), aggregate(&b, kind).unwrap());
        }
    }

    #[test]
    fn avg_over_text_errors() {
        let vals = vec![Value::Discrete("x".into())];
        assert!(matches!(
            aggregate(&vals, AggregateKind::Avg),
            Err(Error::AggregateTypeMismatch { .. })
        ));
    }

    #[test]
    fn empty_input_errors() {
        let vals: Vec<Value> = vec![];
        assert!(matches!(
            aggregate(&vals, AggregateKind::First),
            Err(Error::EmptyAggregate)
        ));
    }

    #[test]
    fn count_accepts_text() {
        let vals = vec![Value::Discrete("x".into()), Value::Discrete("y".into())];
        assert_eq!(
            aggregate(&vals, AggregateKind::Count).unwrap(),
            Value::Numeric(2.0)
        );
    }
}
