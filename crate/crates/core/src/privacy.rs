//! Privacy amplification by Toeplitz hashing.

use alloc::vec::Vec;

use rand::Rng;

use crate::bits::pack_words;
use crate::error::{invalid, Error, Result};
use crate::rng::substream;

/// Default smoothing allowance subtracted from every key, in bits.
pub const DEFAULT_SECURITY_MARGIN: usize = 64;

/// Inputs to the output-length rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationBudget {
    pub reconciled_length: usize,
    /// Entropy per reconciled bit, in `[0, 1]`.
    pub entropy_per_bit: f64,
    /// Every bit disclosed publicly about the key.
    pub leaked_bits: usize,
    pub security_margin: usize,
}

/// `max(0, floor(reconciled_length * entropy_per_bit) - leaked_bits - security_margin)`.
pub fn key_length_budget(b: &AmplificationBudget) -> Result<usize> {
    if !(0.0..=1.0).contains(&b.entropy_per_bit) {
        return Err(invalid("entropy_per_bit", "must lie in [0, 1]"));
    }
    let raw = libm::floor(b.reconciled_length as f64 * b.entropy_per_bit) as usize;
    Ok(raw
        .saturating_sub(b.leaked_bits)
        .saturating_sub(b.security_margin))
}

/// Public Toeplitz seed of `len` bits drawn from the simulation generator.
pub fn toeplitz_seed(len: usize, seed: u64) -> Vec<bool> {
    let mut rng = substream(seed, 0);
    (0..len).map(|_| rng.random::<bool>()).collect()
}

/// Hashes `key` (length `L`) to `out_len` bits with the Toeplitz matrix
/// `T[i][j] = seed_bits[j + out_len - 1 - i]`.
///
/// The first row of `T` is `seed_bits[out_len - 1..]`; its first column,
/// read bottom to top, is `seed_bits[..out_len]`. `seed_bits` must hold
/// exactly `L + out_len - 1` bits.
pub fn toeplitz_hash(key: &[bool], seed_bits: &[bool], out_len: usize) -> Result<Vec<bool>> {
    let len = key.len();
    if out_len > len {
        return Err(invalid("out_len", "must not exceed the key length"));
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let expected = len + out_len - 1;
    if seed_bits.len() != expected {
        return Err(Error::LengthMismatch {
            what: "toeplitz seed",
            expected,
            actual: seed_bits.len(),
        });
    }

    let key_words = pack_words(key);
    let mut seed_words = pack_words(seed_bits);
    seed_words.push(0);
    let window = |start: usize, w: usize| -> u64 {
        let idx = start + 64 * w;
        let (q, r) = (idx / 64, idx % 64);
        let lo = seed_words.get(q).copied().unwrap_or(0) >> r;
        if r == 0 {
            lo
        } else {
            lo | seed_words.get(q + 1).copied().unwrap_or(0) << (64 - r)
        }
    };
    // Key padding bits are zero, so window bits past the key never count.
    Ok((0..out_len)
        .map(|i| {
            let start = out_len - 1 - i;
            let ones: u32 = key_words
                .iter()
                .enumerate()
                .map(|(w, &k)| (k & window(start, w)).count_ones())
                .sum();
            ones & 1 == 1
        })
        .collect())
}
