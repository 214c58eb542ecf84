mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use timebin_core::info::{binary_entropy, downtime_entropy_ratio, entropy_bits};
use timebin_core::privacy::*;

/// Row-by-row product with the dense Toeplitz matrix.
fn dense_toeplitz(key: &[bool], seed: &[bool], out: usize) -> Vec<bool> {
    (0..out)
        .map(|i| (0..key.len()).fold(false, |acc, j| acc ^ (seed[j + out - 1 - i] & key[j])))
        .collect()
}

fn random_bits(r: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| r.random()).collect()
}

#[test]
fn small_dense_case() {
    let mut r = rng(2);
    for _ in 0..50 {
        let key = random_bits(&mut r, 16);
        let seed = random_bits(&mut r, 16 + 8 - 1);
        assert_eq!(
            toeplitz_hash(&key, &seed, 8).unwrap(),
            dense_toeplitz(&key, &seed, 8)
        );
    }
}

#[test]
fn identity_seed() {
    let mut seed = vec![false; 2 * 100 - 1];
    seed[99] = true;
    let key = random_bits(&mut rng(3), 100);
    assert_eq!(toeplitz_hash(&key, &seed, 100).unwrap(), key);
}

#[test]
fn collisions_are_universal() {
    let (len, out, trials) = (48, 4, 100_000);
    let mut r = rng(4);
    let k1 = random_bits(&mut r, len);
    let mut k2 = k1.clone();
    k2[17] ^= true;
    k2[40] ^= true;
    let collisions = (0..trials)
        .filter(|_| {
            let seed = random_bits(&mut r, len + out - 1);
            toeplitz_hash(&k1, &seed, out).unwrap() == toeplitz_hash(&k2, &seed, out).unwrap()
        })
        .count();
    let p = 1.0 / (1u64 << out) as f64;
    let freq = collisions as f64 / trials as f64;
    assert!(
        freq <= p + 5.0 * (p * (1.0 - p) / trials as f64).sqrt(),
        "{freq}"
    );
}

#[test]
fn seeds_are_reproducible() {
    assert_eq!(toeplitz_seed(300, 8), toeplitz_seed(300, 8));
    assert_ne!(toeplitz_seed(300, 8), toeplitz_seed(300, 9));
}

#[test]
fn fig5_budget_by_hand() {
    // Two bins, one bin of downtime, p = 0.3: the carry-free rows see
    // H(q^2, qp, p), the carried row sees h(p), and the carried state has
    // stationary mass p / (1 + p).
    let (p, q) = (0.3f64, 0.7f64);
    let carried = p / (1.0 + p);
    let rate = (1.0 - carried) * entropy_bits([q * q, q * p, p]) + carried * binary_entropy(p);
    let ratio = rate / (2.0 * binary_entropy(p));
    assert!((downtime_entropy_ratio(2, 1, p).unwrap() - ratio).abs() < 1e-10);

    let budget = AmplificationBudget {
        reconciled_length: 10_000,
        entropy_per_bit: ratio,
        leaked_bits: 5_000,
        security_margin: DEFAULT_SECURITY_MARGIN,
    };
    let expected = (10_000.0 * ratio).floor() as usize - 5_000 - 64;
    assert_eq!(key_length_budget(&budget).unwrap(), expected);
}

proptest! {
    #[test]
    fn hash_matches_dense_product(len in 1usize..200, frac in 0.0..=1.0f64, seed in any::<u64>()) {
        let out = ((len as f64 * frac) as usize).clamp(1, len);
        let mut r = rng(seed);
        let key = random_bits(&mut r, len);
        let s = random_bits(&mut r, len + out - 1);
        prop_assert_eq!(toeplitz_hash(&key, &s, out).unwrap(), dense_toeplitz(&key, &s, out));
    }

    #[test]
    fn hash_is_linear(len in 1usize..300, seed in any::<u64>()) {
        let out = (len / 2).max(1);
        let mut r = rng(seed);
        let a = random_bits(&mut r, len);
        let b = random_bits(&mut r, len);
        let s = random_bits(&mut r, len + out - 1);
        let ab: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ha = toeplitz_hash(&a, &s, out).unwrap();
        let hb = toeplitz_hash(&b, &s, out).unwrap();
        let sum: Vec<bool> = ha.iter().zip(&hb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(toeplitz_hash(&ab, &s, out).unwrap(), sum);
    }

    #[test]
    fn budget_is_monotone(
        len in 0usize..100_000,
        e in 0.0..=1.0f64,
        de in 0.0..=1.0f64,
        leaked in 0usize..50_000,
        extra in 0usize..1_000,
        margin in 0usize..200,
    ) {
        let base = AmplificationBudget { reconciled_length: len, entropy_per_bit: e, leaked_bits: leaked, security_margin: margin };
        let k = key_length_budget(&base).unwrap();
        prop_assert!(k <= len);
        let more_leak = AmplificationBudget { leaked_bits: leaked + extra, ..base };
        prop_assert!(key_length_budget(&more_leak).unwrap() <= k);
        let more_entropy = AmplificationBudget { entropy_per_bit: (e + de).min(1.0), ..base };
        prop_assert!(key_length_budget(&more_entropy).unwrap() >= k);
        let longer = AmplificationBudget { reconciled_length: len + extra, ..base };
        prop_assert!(key_length_budget(&longer).unwrap() >= k);
    }
}
