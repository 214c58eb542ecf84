//! Independent oracles shared by the integration tests. Nothing here calls
//! the code paths it is used to check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Frame-pattern sequence of a bin-level downtime simulation: each unblocked
/// bin is occupied with probability `p` and blocks the following `d` bins.
/// Pattern bit `i` is bin `i` of the frame.
pub fn simulate_downtime_frames(n: u32, d: u32, p: f64, frames: usize, seed: u64) -> Vec<u32> {
    let mut r = rng(seed);
    let mut blocked = 0u32;
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let mut pattern = 0u32;
        for bin in 0..n {
            if blocked > 0 {
                blocked -= 1;
            } else if r.random::<f64>() < p {
                pattern |= 1 << bin;
                blocked = d;
            }
        }
        out.push(pattern);
    }
    out
}

pub fn pattern_label(n: u32, pattern: u32) -> String {
    (0..n)
        .map(|i| if pattern >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Plug-in Shannon entropy (bits) of the empirical distribution of `items`.
pub fn empirical_entropy<T: Ord>(items: impl IntoIterator<Item = T>) -> f64 {
    let mut counts = std::collections::BTreeMap::new();
    let mut total = 0usize;
    for it in items {
        *counts.entry(it).or_insert(0usize) += 1;
        total += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Exact I(X;Y) of the cyclic uniform-offset channel by integrating the
/// offset over each bin: Alice at the start of bin `x`, Bob at `x w + v`,
/// `v ~ U[0, span)`, wrapped within the frame.
pub fn uniform_offset_mi_exact(n: u32, frame: f64, span: f64) -> f64 {
    let w = frame / n as f64;
    // P(shift = k) for the integer bin shift floor(v / w).
    let mut shift = vec![0.0; n as usize];
    let mut k = 0usize;
    loop {
        let lo = k as f64 * w;
        if lo >= span {
            break;
        }
        let hi = ((k + 1) as f64 * w).min(span);
        shift[k % n as usize] += (hi - lo) / span;
        k += 1;
    }
    // X uniform, Y = X + shift mod n: I = H(Y) - H(shift) = log n - H(shift).
    let h_shift: f64 = shift
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    (n as f64).log2() - h_shift
}

/// Dense GF(2) matrix-vector product.
pub fn gf2_matvec(rows: &[Vec<bool>], x: &[bool]) -> Vec<bool> {
    rows.iter()
        .map(|row| row.iter().zip(x).fold(false, |acc, (&a, &b)| acc ^ (a & b)))
        .collect()
}

/// Dense parity-check matrix from sparse check rows.
pub fn dense_rows(n: usize, checks: &[Vec<u32>]) -> Vec<Vec<bool>> {
    checks
        .iter()
        .map(|row| {
            let mut dense = vec![false; n];
            for &v in row {
                dense[v as usize] = true;
            }
            dense
        })
        .collect()
}

/// Counts 4-cycles by enumerating row pairs and column pairs of the dense matrix.
pub fn four_cycles_dense(rows: &[Vec<bool>]) -> u64 {
    let mut total = 0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            let shared: Vec<usize> = (0..rows[a].len())
                .filter(|&j| rows[a][j] && rows[b][j])
                .collect();
            for i in 0..shared.len() {
                for _ in i + 1..shared.len() {
                    total += 1;
                }
            }
        }
    }
    total
}

/// Maximum-likelihood member of the coset `{x : H x = s}` for LLRs
/// `ln P(0)/P(1)`, by enumerating all `2^n` words. Returns the winner and
/// whether it is strictly better than every other coset member.
/// Log-likelihood of a word up to a constant: sum over ones of -llr.
pub fn log_likelihood(x: &[bool], llrs: &[f64]) -> f64 {
    x.iter()
        .zip(llrs)
        .map(|(&b, &l)| if b { -l } else { 0.0 })
        .sum()
}

pub fn ml_in_coset(
    rows: &[Vec<bool>],
    syndrome: &[bool],
    llrs: &[f64],
) -> Option<(Vec<bool>, bool)> {
    let n = llrs.len();
    assert!(n <= 20);
    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut unique = true;
    for word in 0u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| word >> i & 1 == 1).collect();
        if gf2_matvec(rows, &x) != syndrome {
            continue;
        }
        let score = log_likelihood(&x, llrs);
        match &best {
            Some((s, _)) if (score - s).abs() < 1e-9 => unique = false,
            Some((s, _)) if score < *s => {}
            _ => {
                best = Some((score, x));
                unique = true;
            }
        }
    }
    best.map(|(_, x)| (x, unique))
}

/// Frame and bin of a time tag by the textbook formulas.
pub fn scalar_frame_bin(t: f64, frame: f64, n: u32) -> (u64, u32) {
    let f = (t / frame).floor();
    let within = t - f * frame;
    let bin = (within / (frame / n as f64)).floor() as u32;
    (f as u64, bin.min(n - 1))
}

/// One-sample Kolmogorov-Smirnov statistic against U[0, 1).
pub fn ks_uniform(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}
