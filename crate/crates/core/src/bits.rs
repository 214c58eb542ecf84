//! Small helpers for bit vectors represented as `[bool]`.

use alloc::string::String;
use alloc::vec::Vec;

/// Renders bits as a string of `0`/`1`.
pub fn to_bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a `0`/`1` string; any other character yields `None`.
pub fn from_bit_string(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Packs bits MSB-first into bytes; the last byte is zero padded.
pub fn pack_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}

/// Lowercase hex of the MSB-first byte packing.
pub fn to_hex(bits: &[bool]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut out = String::with_capacity(bits.len().div_ceil(4));
    for byte in pack_bytes(bits) {
        out.push(DIGITS[(byte >> 4) as usize] as char);
        out.push(DIGITS[(byte & 0xf) as usize] as char);
    }
    out
}

/// Packs bits little-endian into 64-bit words (bit `i` is bit `i % 64` of word `i / 64`).
pub(crate) fn pack_words(bits: &[bool]) -> Vec<u64> {
    let mut words = alloc::vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

pub fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}
