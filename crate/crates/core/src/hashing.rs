//! Deterministic hash pipeline shared by all sketch builders.
//!
//! Join keys are mapped to 32-bit integers with MurmurHash3 (x86 variant,
//! 32-bit output) and from there to the unit interval with Fibonacci
//! hashing. Both tables of a join pair run the same pipeline, so equal raw
//! keys always land on equal hashes and equal unit-interval positions.
//! That shared ranking is what makes min-hash selections on the two sides
//! overlap.
//!
//! The constants here are part of the sketch serialization contract
//! (`murmur3_x86_32/seed0+fib32`). Changing any of them invalidates every
//! stored sketch.

/// 32-bit hash of a raw join key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeyHash(pub u32);

/// Position in `[0, 1)` derived from a [`KeyHash`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitHash(pub f64);

/// Fixed MurmurHash3 seed for stored key hashes.
pub const KEY_HASH_SEED: u32 = 0;

/// `round(2^32 / phi)`, Knuth's multiplicative hashing constant.
pub const FIBONACCI_MULTIPLIER: u32 = 2_654_435_769;

/// Separator byte between the raw key and the occurrence index in derived
/// keys. Prevents ambiguity between e.g. `("ab", 1)` and `("a", "b1")`.
const DERIVED_KEY_SEPARATOR: u8 = 0x1F;

/// Hash contract identifier embedded in serialized sketches.
pub const HASH_CONTRACT: &str = "murmur3_x86_32/seed0+fib32";

/// MurmurHash3, x86 32-bit variant (Austin Appleby's reference algorithm).
pub fn murmur3_x86_32(data: &[u8], seed: u32) -> u32 {
    const C1: u32 = 0xcc9e_2d51;
    const C2: u32 = 0x1b87_3593;

    let mut h = seed;
    let mut chunks = data.chunks_exact(4);
    for chunk in &mut chunks {
        let mut k = u32::from_le_bytes(chunk.try_into().unwrap());
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
        h = h.rotate_left(13).wrapping_mul(5).wrapping_add(0xe654_6b64);
    }

    let tail = chunks.remainder();
    let mut k: u32 = 0;
    if tail.len() >= 3 {
        k ^= (tail[2] as u32) << 16;
    }
    if tail.len() >= 2 {
        k ^= (tail[1] as u32) << 8;
    }
    if !tail.is_empty() {
        k ^= tail[0] as u32;
        k = k.wrapping_mul(C1).rotate_left(15).wrapping_mul(C2);
        h ^= k;
    }

    h ^= data.len() as u32;
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 16;
    h
}

/// Hash of a raw join key, using the fixed contract seed. This is the hash
/// stored in sketch entries and matched on during sketch joins.
pub fn hash_key(key_bytes: &[u8]) -> KeyHash {
    KeyHash(murmur3_x86_32(key_bytes, KEY_HASH_SEED))
}

/// Like [`hash_key`] but with a caller-supplied MurmurHash3 seed. Used for
/// selection ranking, where sketch builders mix in their build seed; seed 0
/// reproduces [`hash_key`] exactly.
pub fn hash_key_seeded(key_bytes: &[u8], seed: u32) -> KeyHash {
    KeyHash(murmur3_x86_32(key_bytes, seed))
}

fn derived_key_bytes(key_bytes: &[u8], occurrence_index: u32) -> Vec<u8> {
    let mut buf = Vec::with_capacity(key_bytes.len() + 5);
    buf.extend_from_slice(key_bytes);
    buf.push(DERIVED_KEY_SEPARATOR);
    buf.extend_from_slice(&occurrence_index.to_le_bytes());
    buf
}

/// Hash of the occurrence-indexed derived key `<key, j>`, `j >= 1`.
///
/// `hash_derived_key(k, 1)` is the coordination hash used by aggregated
/// (unique-key) sketch sides.
pub fn hash_derived_key(key_bytes: &[u8], occurrence_index: u32) -> KeyHash {
    hash_derived_key_seeded(key_bytes, occurrence_index, KEY_HASH_SEED)
}

/// Seeded variant of [`hash_derived_key`]; seed 0 reproduces it exactly.
pub fn hash_derived_key_seeded(key_bytes: &[u8], occurrence_index: u32, seed: u32) -> KeyHash {
    debug_assert!(occurrence_index >= 1, "occurrence index is 1-based");
    KeyHash(murmur3_x86_32(
        &derived_key_bytes(key_bytes, occurrence_index),
        seed,
    ))
}

/// Fibonacci hashing: maps a 32-bit hash to `[0, 1)` by taking the
/// fractional part of multiplication with `2^32 / phi`.
pub fn unit_hash(h: KeyHash) -> UnitHash {
    let scrambled = h.0.wrapping_mul(FIBONACCI_MULTIPLIER);
    UnitHash(scrambled as f64 / 4_294_967_296.0)
}
