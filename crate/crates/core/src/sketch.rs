//! Fixed-budget sketches of two-column tables and the sketch join that
//! recovers a sample of the full left join.
//!
//! Five builders share one hash pipeline (see [`crate::hashing`]) so that
//! sketches built independently from two tables still select overlapping
//! key sets:
//!
//! - `TUPSK`: ranks individual rows by the hash of the occurrence-indexed
//!   key `<k, j>`, giving every row the same inclusion probability.
//! - `LV2SK`: k-minimum-values over distinct keys, then per-key
//!   subsampling proportional to key frequency; size bounded by `2n`.
//! - `PRISK`: `LV2SK` with a frequency-weighted (priority sampling) first
//!   level.
//! - `INDSK`: independent Bernoulli sampling, the uncoordinated baseline.
//! - `CSK`: k-minimum-values over distinct keys keeping the first value
//!   seen per key.
//!
//! The aug side of every method aggregates repeated keys first, so aug
//! sketches always carry pairwise distinct key hashes.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, AggregateKind};
use crate::error::{Error, Result};
use crate::hashing::{
    hash_derived_key_seeded, hash_key, hash_key_seeded, unit_hash, KeyHash, HASH_CONTRACT,
};
use crate::table::{JoinedSample, TwoColumnTable, Value, ValueType};

pub const SKETCH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SketchMethod {
    Tupsk,
    Lv2sk,
    Prisk,
    Indsk,
    Csk,
}

impl SketchMethod {
    pub const ALL: [SketchMethod; 5] = [
        SketchMethod::Tupsk,
        SketchMethod::Lv2sk,
        SketchMethod::Prisk,
        SketchMethod::Indsk,
        SketchMethod::Csk,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SketchMethod::Tupsk => "tupsk",
            SketchMethod::Lv2sk => "lv2sk",
            SketchMethod::Prisk => "prisk",
            SketchMethod::Indsk => "indsk",
            SketchMethod::Csk => "csk",
        }
    }
}

impl fmt::Display for SketchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SketchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tupsk" => Ok(SketchMethod::Tupsk),
            "lv2sk" => Ok(SketchMethod::Lv2sk),
            "prisk" => Ok(SketchMethod::Prisk),
            "indsk" => Ok(SketchMethod::Indsk),
            "csk" => Ok(SketchMethod::Csk),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SketchSide {
    Train,
    Aug,
}

impl SketchSide {
    pub fn name(&self) -> &'static str {
        match self {
            SketchSide::Train => "train",
            SketchSide::Aug => "aug",
        }
    }
}

impl FromStr for SketchSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SketchSide::Train),
            "aug" => Ok(SketchSide::Aug),
            other => Err(Error::InvalidParameter(format!("unknown side {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchEntry {
    pub key_hash: KeyHash,
    pub value: Value,
}

/// A fixed-budget summary of one table side.
#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    pub method: SketchMethod,
    pub side: SketchSide,
    pub budget: usize,
    pub agg: Option<AggregateKind>,
    pub seed: u64,
    pub source_n: usize,
    pub source_m_k: usize,
    pub entries: Vec<SketchEntry>,
}

impl Sketch {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value_type(&self) -> Option<ValueType> {
        self.entries.first().map(|e| e.value.value_type())
    }
}

/// A joined pair sample plus the count of distinct matched key hashes.
#[derive(Debug, Clone)]
pub struct SketchJoin {
    pub sample: JoinedSample,
    pub matched_keys: usize,
}

/// Mixes the 64-bit build seed down to the 32-bit selection-hash seed.
/// Seed 0 maps to 0, keeping the default pipeline on the serialization
/// contract `murmur3_x86_32/seed0+fib32`.
fn selection_seed(seed: u64) -> u32 {
    if seed == 0 {
        return 0;
    }
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z = z ^ (z >> 31);
    (z ^ (z >> 32)) as u32
}

/// Selection rank: unit hash first, ties broken by stored key hash then
/// original row index so builds are totally ordered.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rank {
    unit: f64,
    key_hash: u32,
    row: usize,
}

impl Rank {
    fn cmp_key(&self) -> (f64, u32, usize) {
        (self.unit, self.key_hash, self.row)
    }
}

fn take_n_min(mut ranked: Vec<(Rank, SketchEntry)>, n: usize) -> Vec<SketchEntry> {
    ranked.sort_by(|a, b| a.0.cmp_key().partial_cmp(&b.0.cmp_key()).unwrap());
    ranked.truncate(n);
    // keep original row order within the selection for readability of the
    // raw entry list; canonical order is applied at serialization
    ranked.sort_by_key(|(rank, _)| rank.row);
    ranked.into_iter().map(|(_, e)| e).collect()
}

/// Distinct keys in first-occurrence order, with their row values grouped.
struct KeyGroups<'a> {
    keys: Vec<&'a str>,
    rows: Vec<Vec<(usize, &'a Value)>>,
}

fn group_by_key(table: &TwoColumnTable) -> KeyGroups<'_> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut keys = Vec::new();
    let mut rows: Vec<Vec<(usize, &Value)>> = Vec::new();
    for (row, (key, value)) in table.rows().enumerate() {
        match index.get(key) {
            Some(&slot) => rows[slot].push((row, value)),
            None => {
                index.insert(key, keys.len());
                keys.push(key);
                rows.push(vec![(row, value)]);
            }
        }
    }
    KeyGroups { keys, rows }
}

fn aggregated_entries(
    groups: &KeyGroups<'_>,
    agg: AggregateKind,
) -> Result<Vec<(usize, KeyHash, Value)>> {
    groups
        .keys
        .iter()
        .zip(&groups.rows)
        .map(|(key, rows)| {
            let value = aggregate(rows.iter().map(|(_, v)| *v), agg)?;
            Ok((rows[0].0, hash_key(key.as_bytes()), value))
        })
        .collect()
}

fn build_tupsk(
    table: &TwoColumnTable,
    side: SketchSide,
    n: usize,
    agg: Option<AggregateKind>,
    seed: u64,
) -> Result<Vec<SketchEntry>> {
    let sel = selection_seed(seed);
    match side {
        SketchSide::Train => {
            let mut occurrence: HashMap<&str, u32> = HashMap::new();
            let ranked = table
                .rows()
                .enumerate()
                .map(|(row, (key, value))| {
                    let j = occurrence.entry(key).or_insert(0);
                    *j += 1;
                    let kh = hash_key(key.as_bytes());
                    let rank = Rank {
                        unit: unit_hash(hash_derived_key_seeded(key.as_bytes(), *j, sel)).0,
                        key_hash: kh.0,
                        row,
                    };
                    (
                        rank,
                        SketchEntry {
                            key_hash: kh,
                            value: value.clone(),
                        },
                    )
                })
                .collect();
            Ok(take_n_min(ranked, n))
        }
        SketchSide::Aug => {
            let agg = agg.ok_or(Error::MissingAggregate)?;
            let groups = group_by_key(table);
            let ranked = aggregated_entries(&groups, agg)?
                .into_iter()
                .zip(&groups.keys)
                .map(|((row, kh, value), key)| {
                    let rank = Rank {
                        unit: unit_hash(hash_derived_key_seeded(key.as_bytes(), 1, sel)).0,
                        key_hash: kh.0,
                        row,
                    };
                    (rank, SketchEntry { key_hash: kh, value })
                })
                .collect();
            Ok(take_n_min(ranked, n))
        }
    }
}

/// Deterministic per-key RNG for second-level reservoir subsampling,
/// independent across keys.
fn per_key_rng(seed: u64, key_hash: KeyHash) -> StdRng {
    let mut z = seed ^ ((key_hash.0 as u64) << 32 | key_hash.0 as u64);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    StdRng::seed_from_u64(z ^ (z >> 31))
}

/// Algorithm R over one key's rows, keeping `n_k` of them.
fn reservoir_pick<'a>(
    rows: &[(usize, &'a Value)],
    n_k: usize,
    rng: &mut StdRng,
) -> Vec<(usize, &'a Value)> {
    if rows.len() <= n_k {
        return rows.to_vec();
    }
    let mut reservoir: Vec<(usize, &Value)> = rows[..n_k].to_vec();
    for (i, item) in rows.iter().enumerate().skip(n_k) {
        let j = rng.random_range(0..=i);
        if j < n_k {
            reservoir[j] = *item;
        }
    }
    reservoir.sort_by_key(|(row, _)| *row);
    reservoir
}

/// First-level key selection shared by LV2SK and PRISK.
enum FirstLevel {
    MinHash,
    Priority,
}

fn build_two_level(
    table: &TwoColumnTable,
    side: SketchSide,
    n: usize,
    agg: Option<AggregateKind>,
    seed: u64,
    first_level: FirstLevel,
) -> Result<Vec<SketchEntry>> {
    let sel = selection_seed(seed);
    let groups = group_by_key(table);
    let total = table.len();

    // rank distinct keys; selection keeps the min(n, m_K) best
    let mut key_order: Vec<usize> = (0..groups.keys.len()).collect();
    let rank_of = |slot: usize| -> (f64, u32, usize) {
        let key = groups.keys[slot];
        let kh = hash_key(key.as_bytes());
        let u = unit_hash(hash_key_seeded(key.as_bytes(), sel)).0;
        let first_row = groups.rows[slot][0].0;
        match first_level {
            FirstLevel::MinHash => (u, kh.0, first_row),
            FirstLevel::Priority => {
                // largest priority N_k / u first; negate so one ascending
                // sort covers both variants
                let u = u.max(2.0_f64.powi(-32));
                let priority = groups.rows[slot].len() as f64 / u;
                (-priority, kh.0, first_row)
            }
        }
    };
    key_order.sort_by(|&a, &b| rank_of(a).partial_cmp(&rank_of(b)).unwrap());
    key_order.truncate(n);
    key_order.sort_by_key(|&slot| groups.rows[slot][0].0);

    match side {
        SketchSide::Train => {
            let mut entries = Vec::new();
            for slot in key_order {
                let key = groups.keys[slot];
                let rows = &groups.rows[slot];
                let kh = hash_key(key.as_bytes());
                let n_k = ((n * rows.len()) / total).max(1);
                let mut rng = per_key_rng(seed, kh);
                for (_, value) in reservoir_pick(rows, n_k, &mut rng) {
                    entries.push(SketchEntry {
                        key_hash: kh,
                        value: value.clone(),
                    });
                }
            }
            Ok(entries)
        }
        SketchSide::Aug => {
            let agg = agg.ok_or(Error::MissingAggregate)?;
            key_order
                .into_iter()
                .map(|slot| {
                    let key = groups.keys[slot];
                    let value = aggregate(groups.rows[slot].iter().map(|(_, v)| *v), agg)?;
                    Ok(SketchEntry {
                        key_hash: hash_key(key.as_bytes()),
                        value,
                    })
                })
                .collect()
        }
    }
}

fn build_indsk(
    table: &TwoColumnTable,
    side: SketchSide,
    n: usize,
    agg: Option<AggregateKind>,
    seed: u64,
) -> Result<Vec<SketchEntry>> {
    // each side gets its own stream so the two samples are genuinely
    // independent; sharing one stream would accidentally coordinate them
    let side_salt = match side {
        SketchSide::Train => 0x1D5B_9F2E_6A43_C871u64,
        SketchSide::Aug => 0x84C6_21F3_0B7D_5A19u64,
    };
    let mut rng = StdRng::seed_from_u64(seed.wrapping_add(side_salt));
    match side {
        SketchSide::Train => {
            let p = (n as f64 / table.len().max(1) as f64).min(1.0);
            Ok(table
                .rows()
                .filter(|_| rng.random::<f64>() < p)
                .map(|(key, value)| SketchEntry {
                    key_hash: hash_key(key.as_bytes()),
                    value: value.clone(),
                })
                .collect())
        }
        SketchSide::Aug => {
            let agg = agg.ok_or(Error::MissingAggregate)?;
            let groups = group_by_key(table);
            let m_k = groups.keys.len();
            let p = (n as f64 / m_k.max(1) as f64).min(1.0);
            let entries = aggregated_entries(&groups, agg)?;
            Ok(entries
                .into_iter()
                .filter(|_| rng.random::<f64>() < p)
                .map(|(_, key_hash, value)| SketchEntry { key_hash, value })
                .collect())
        }
    }
}

fn build_csk(table: &TwoColumnTable, n: usize, seed: u64) -> Vec<SketchEntry> {
    let sel = selection_seed(seed);
    let groups = group_by_key(table);
    let ranked = groups
        .keys
        .iter()
        .zip(&groups.rows)
        .map(|(key, rows)| {
            let kh = hash_key(key.as_bytes());
            let rank = Rank {
                unit: unit_hash(hash_key_seeded(key.as_bytes(), sel)).0,
                key_hash: kh.0,
                row: rows[0].0,
            };
            (
                rank,
                SketchEntry {
                    key_hash: kh,
                    value: rows[0].1.clone(),
                },
            )
        })
        .collect();
    take_n_min(ranked, n)
}

/// Builds a sketch of `table` with the given method and budget.
///
/// The aug side always needs `agg` (except CSK, which collapses repeated
/// keys to the first value seen and ignores `agg`).
pub fn build_sketch(
    table: &TwoColumnTable,
    method: SketchMethod,
    side: SketchSide,
    n: usize,
    agg: Option<AggregateKind>,
    seed: u64,
) -> Result<Sketch> {
    if n == 0 {
        return Err(Error::InvalidParameter("budget n must be >= 1".into()));
    }
    let stats_m_k = {
        let mut distinct: HashSet<&str> = HashSet::new();
        for key in table.keys() {
            distinct.insert(key.as_str());
        }
        distinct.len()
    };
    let entries = match method {
        SketchMethod::Tupsk => build_tupsk(table, side, n, agg, seed)?,
        SketchMethod::Lv2sk => build_two_level(table, side, n, agg, seed, FirstLevel::MinHash)?,
        SketchMethod::Prisk => build_two_level(table, side, n, agg, seed, FirstLevel::Priority)?,
        SketchMethod::Indsk => build_indsk(table, side, n, agg, seed)?,
        SketchMethod::Csk => build_csk(table, n, seed),
    };
    Ok(Sketch {
        method,
        side,
        budget: n,
        agg: if method == SketchMethod::Csk { None } else { agg },
        seed,
        source_n: table.len(),
        source_m_k: stats_m_k,
        entries,
    })
}

/// Joins a train-side sketch against an aug-side sketch on key hashes.
///
/// For each train entry whose key hash appears in the aug sketch, emits
/// `(x = aug value, y = train value)` in train entry order.
pub fn join_sketches(train: &Sketch, aug: &Sketch) -> Result<SketchJoin> {
    let mut lookup: HashMap<u32, &Value> = HashMap::with_capacity(aug.entries.len());
    for entry in &aug.entries {
        if lookup.insert(entry.key_hash.0, &entry.value).is_some() {
            return Err(Error::DuplicateAugKeys);
        }
    }

    let mut pairs = Vec::new();
    let mut matched: HashSet<u32> = HashSet::new();
    for entry in &train.entries {
        if let Some(&x) = lookup.get(&entry.key_hash.0) {
            matched.insert(entry.key_hash.0);
            pairs.push((x.clone(), entry.value.clone()));
        }
    }

    let x_type = aug.value_type().unwrap_or(ValueType::Discrete);
    let y_type = train.value_type().unwrap_or(ValueType::Discrete);
    Ok(SketchJoin {
        sample: JoinedSample {
            pairs,
            x_type,
            y_type,
        },
        matched_keys: matched.len(),
    })
}

// --- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SketchEntryDoc {
    kh: u32,
    t: String,
    v: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct SketchDoc {
    format_version: u32,
    method: SketchMethod,
    side: SketchSide,
    n: usize,
    agg: Option<AggregateKind>,
    seed: u64,
    source_n: usize,
    source_m_k: usize,
    hash: String,
    entries: Vec<SketchEntryDoc>,
}

impl Sketch {
    /// Canonical JSON: entries sorted by key hash ascending (stable),
    /// byte-identical for identical build inputs.
    pub fn to_json(&self) -> String {
        let mut entries: Vec<&SketchEntry> = self.entries.iter().collect();
        entries.sort_by_key(|e| e.key_hash.0);
        let doc = SketchDoc {
            format_version: SKETCH_FORMAT_VERSION,
            method: self.method,
            side: self.side,
            n: self.budget,
            agg: self.agg,
            seed: self.seed,
            source_n: self.source_n,
            source_m_k: self.source_m_k,
            hash: HASH_CONTRACT.to_string(),
            entries: entries
                .into_iter()
                .map(|e| match &e.value {
                    Value::Discrete(s) => SketchEntryDoc {
                        kh: e.key_hash.0,
                        t: "d".into(),
                        v: serde_json::Value::String(s.clone()),
                    },
                    Value::Numeric(x) => SketchEntryDoc {
                        kh: e.key_hash.0,
                        t: "n".into(),
                        v: serde_json::json!(x),
                    },
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("sketch serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Sketch> {
        let doc: SketchDoc = serde_json::from_str(text)?;
        if doc.format_version != SKETCH_FORMAT_VERSION {
            return Err(Error::SketchFormat(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        if doc.hash != HASH_CONTRACT {
            return Err(Error::HashContractMismatch {
                expected: HASH_CONTRACT.to_string(),
                actual: doc.hash,
            });
        }
        let entries = doc
            .entries
            .into_iter()
            .map(|e| {
                let value = match e.t.as_str() {
                    "d" => match e.v {
                        serde_json::Value::String(s) => Value::Discrete(s),
                        other => {
                            return Err(Error::SketchFormat(format!(
                                "discrete entry with non-string value {other}"
                            )))
                        }
                    },
                    "n" => match e.v.as_f64() {
                        Some(x) => Value::Numeric(x),
                        None => {
                            return Err(Error::SketchFormat(
                                "numeric entry with non-number value".into(),
                            ))
                        }
                    },
                    other => {
                        return Err(Error::SketchFormat(format!("unknown entry type {other:?}")))
                    }
                };
                Ok(SketchEntry {
                    key_hash: KeyHash(e.kh),
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sketch {
            method: doc.method,
            side: doc.side,
            budget: doc.n,
            agg: doc.agg,
            seed: doc.seed,
            source_n: doc.source_n,
            source_m_k: doc.source_m_k,
            entries,
        })
    }
}
