//! Two-column (join key, value) tables: CSV ingestion with type inference,
//! key statistics, column-pair enumeration over a corpus, and the exact
//! left-outer join used as the evaluation oracle.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, AggregateKind};
use crate::error::{Error, Result};

/// A cell value: text, or a finite 64-bit float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Discrete(String),
    Numeric(f64),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Discrete(_) => ValueType::Discrete,
            Value::Numeric(_) => ValueType::Numeric,
        }
    }

    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            Value::Numeric(x) => Some(*x),
            Value::Discrete(_) => None,
        }
    }

    /// Symbol identity used by plug-in (frequency) estimators: exact text,
    /// or the bit pattern of the float.
    pub fn symbol(&self) -> Symbol<'_> {
        match self {
            Value::Discrete(s) => Symbol::Text(s),
            Value::Numeric(x) => Symbol::Bits(x.to_bits()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Discrete(s) => f.write_str(s),
            Value::Numeric(x) => write!(f, "{x}"),
        }
    }
}

/// Borrowed symbol identity of a [`Value`]; hashable and exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol<'a> {
    Text(&'a str),
    Bits(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueType {
    Discrete,
    Numeric,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Discrete => f.write_str("discrete"),
            ValueType::Numeric => f.write_str("numeric"),
        }
    }
}

/// A join-key column paired with a homogeneously-typed value column.
#[derive(Debug, Clone)]
pub struct TwoColumnTable {
    pub name: String,
    pub key_name: String,
    pub value_name: String,
    keys: Vec<String>,
    values: Vec<Value>,
    value_type: ValueType,
}

impl TwoColumnTable {
    pub fn new(
        name: impl Into<String>,
        key_name: impl Into<String>,
        value_name: impl Into<String>,
        keys: Vec<String>,
        values: Vec<Value>,
    ) -> Self {
        assert_eq!(keys.len(), values.len(), "key/value column length mismatch");
        let value_type = values
            .first()
            .map(Value::value_type)
            .unwrap_or(ValueType::Discrete);
        assert!(
            values.iter().all(|v| v.value_type() == value_type),
            "value column must be homogeneously typed"
        );
        TwoColumnTable {
            name: name.into(),
            key_name: key_name.into(),
            value_name: value_name.into(),
            keys,
            values,
            value_type,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value_type(&self) -> ValueType {
        self.value_type
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.keys.iter().map(String::as_str).zip(self.values.iter())
    }
}

/// Exact frequency table of a key column.
#[derive(Debug, Clone)]
pub struct KeyStats {
    pub total: usize,
    pub distinct: usize,
    pub frequencies: HashMap<String, usize>,
}

pub fn key_stats(table: &TwoColumnTable) -> KeyStats {
    let mut frequencies: HashMap<String, usize> = HashMap::new();
    for key in table.keys() {
        *frequencies.entry(key.clone()).or_insert(0) += 1;
    }
    KeyStats {
        total: table.len(),
        distinct: frequencies.len(),
        frequencies,
    }
}

/// A sequence of (x, y) value pairs recovered from a join.
#[derive(Debug, Clone)]
pub struct JoinedSample {
    pub pairs: Vec<(Value, Value)>,
    pub x_type: ValueType,
    pub y_type: ValueType,
}

impl JoinedSample {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Swap the roles of x and y.
    pub fn swapped(&self) -> JoinedSample {
        JoinedSample {
            pairs: self
                .pairs
                .iter()
                .map(|(x, y)| (y.clone(), x.clone()))
                .collect(),
            x_type: self.y_type,
            y_type: self.x_type,
        }
    }
}

/// Aggregates `aug` by key, then walks `train` in row order emitting
/// `(aggregated aug value, train value)` for every train row whose key
/// exists in `aug`. Rows with no match are dropped.
pub fn full_left_join(
    train: &TwoColumnTable,
    aug: &TwoColumnTable,
    agg: AggregateKind,
) -> Result<JoinedSample> {
    let mut groups: HashMap<&str, Vec<&Value>> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (key, value) in aug.rows() {
        let entry = groups.entry(key).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(value);
    }

    let mut aggregated: HashMap<&str, Value> = HashMap::with_capacity(groups.len());
    for key in order {
        let vals = &groups[key];
        aggregated.insert(key, aggregate(vals.iter().copied(), agg)?);
    }

    let x_type = aggregated
        .values()
        .next()
        .map(Value::value_type)
        .unwrap_or_else(|| match agg {
            AggregateKind::Count => ValueType::Numeric,
            _ => aug.value_type(),
        });

    let mut pairs = Vec::new();
    for (key, y) in train.rows() {
        if let Some(x) = aggregated.get(key) {
            pairs.push((x.clone(), y.clone()));
        }
    }

    Ok(JoinedSample {
        pairs,
        x_type,
        y_type: train.value_type(),
    })
}

/// Result of loading a CSV column pair, with dirty-row accounting.
#[derive(Debug)]
pub struct CsvLoad {
    pub table: TwoColumnTable,
    pub rows_dropped: usize,
}

fn parse_numeric(cell: &str) -> Option<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Loads one (key, value) column pair from a CSV file with a header row.
///
/// The value column is Numeric iff every non-empty cell parses as a finite
/// number; otherwise it is Discrete. Rows with an empty key, empty value,
/// or non-finite numeric are dropped and counted.
pub fn load_csv(
    path: &Path,
    key_column: &str,
    value_column: &str,
    delimiter: u8,
) -> Result<CsvLoad> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::Csv {
                path: path.to_path_buf(),
                source: e,
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                name: name.to_string(),
                path: path.to_path_buf(),
            })
    };
    let key_idx = find(key_column)?;
    let value_idx = find(value_column)?;

    let mut raw: Vec<(String, String)> = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let key = record.get(key_idx).unwrap_or("").trim();
        let value = record.get(value_idx).unwrap_or("").trim();
        if key.is_empty() || value.is_empty() {
            dropped += 1;
            continue;
        }
        raw.push((key.to_string(), value.to_string()));
    }

    let all_numeric = !raw.is_empty() && raw.iter().all(|(_, v)| parse_numeric(v).is_some());

    let mut keys = Vec::with_capacity(raw.len());
    let mut values = Vec::with_capacity(raw.len());
    for (key, value) in raw {
        if all_numeric {
            match parse_numeric(&value) {
                Some(x) => {
                    keys.push(key);
                    values.push(Value::Numeric(x));
                }
                None => dropped += 1,
            }
        } else {
            keys.push(key);
            values.push(Value::Discrete(value));
        }
    }

    if keys.is_empty() {
        return Err(Error::EmptyTable {
            path: path.to_path_buf(),
            dropped,
        });
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(CsvLoad {
        table: TwoColumnTable::new(name, key_column, value_column, keys, values),
        rows_dropped: dropped,
    })
}

/// Reference to one (key column, value column) pair in a corpus file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnPairRef {
    pub path: PathBuf,
    pub key_column: String,
    pub value_column: String,
}

/// Enumeration output plus the count of unreadable files skipped.
#[derive(Debug)]
pub struct CorpusPairs {
    pub pairs: Vec<ColumnPairRef>,
    pub files_skipped: usize,
}

fn infer_column_types(path: &Path) -> Result<(Vec<String>, Vec<ValueType>)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?
        .iter()
        .map(str::to_string)
        .collect();

    let mut numeric = vec![true; headers.len()];
    let mut nonempty = vec![false; headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        for i in 0..headers.len() {
            let cell = record.get(i).unwrap_or("").trim();
            if cell.is_empty() {
                continue;
            }
            nonempty[i] = true;
            if parse_numeric(cell).is_none() {
                numeric[i] = false;
            }
        }
    }
    let types = numeric
        .iter()
        .zip(&nonempty)
        .map(|(&num, &ne)| {
            if num && ne {
                ValueType::Numeric
            } else {
                ValueType::Discrete
            }
        })
        .collect();
    Ok((headers, types))
}

/// Enumerates every (key, value) column pair across all CSV files in a
/// directory: the key column must be text-typed, the value column may be
/// text or numeric. Deterministic order: file path, then column indices.
pub fn enumerate_column_pairs(corpus_dir: &Path) -> Result<CorpusPairs> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir)
        .map_err(|e| Error::Io {
            path: corpus_dir.to_path_buf(),
            source: e,
        })?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("csv"))
                .unwrap_or(false)
        })
        .collect();
    files.sort();

    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for path in files {
        let (headers, types) = match infer_column_types(&path) {
            Ok(x) => x,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        for (ki, key_type) in types.iter().enumerate() {
            if *key_type != ValueType::Discrete {
                continue;
            }
            for vi in 0..headers.len() {
                if vi == ki {
                    continue;
                }
                pairs.push(ColumnPairRef {
                    path: path.clone(),
                    key_column: headers[ki].clone(),
                    value_column: headers[vi].clone(),
                });
            }
        }
    }
    Ok(CorpusPairs {
        pairs,
        files_skipped: skipped,
    })
}
