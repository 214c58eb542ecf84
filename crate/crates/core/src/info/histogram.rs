use alloc::vec;
use alloc::vec::Vec;

use crate::binning::SiftedPair;
use crate::error::{invalid, Error, Result};

/// Counts of (Alice bin, Bob bin) over retained frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHistogram {
    n: u32,
    /// Row-major, indexed `[alice * n + bob]`.
    counts: Vec<u64>,
}

impl JointHistogram {
    pub fn new(n: u32) -> Self {
        JointHistogram {
            n,
            counts: vec![0; (n as usize) * (n as usize)],
        }
    }

    /// Builds a histogram from row-major counts.
    pub fn from_counts(n: u32, counts: Vec<u64>) -> Result<Self> {
        let expected = (n as usize) * (n as usize);
        if counts.len() != expected {
            return Err(Error::LengthMismatch {
                what: "histogram counts",
                expected,
                actual: counts.len(),
            });
        }
        Ok(JointHistogram { n, counts })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, alice: u32, bob: u32) -> u64 {
        self.counts[(alice * self.n + bob) as usize]
    }

    pub fn add(&mut self, alice: u32, bob: u32) -> Result<()> {
        for b in [alice, bob] {
            if b >= self.n {
                return Err(Error::OutOfRange {
                    what: "bin",
                    index: b as usize,
                    limit: self.n as usize,
                });
            }
        }
        self.counts[(alice * self.n + bob) as usize] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn alice_marginal(&self) -> Vec<u64> {
        self.counts
            .chunks(self.n as usize)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn bob_marginal(&self) -> Vec<u64> {
        let n = self.n as usize;
        (0..n)
            .map(|b| (0..n).map(|a| self.counts[a * n + b]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n as usize;
        let mut counts = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                counts[b * n + a] = self.counts[a * n + b];
            }
        }
        JointHistogram { n: self.n, counts }
    }
}

/// Tallies sifted pairs into an `n x n` histogram.
pub fn joint_histogram(pairs: &[SiftedPair], n: u32) -> Result<JointHistogram> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let mut h = JointHistogram::new(n);
    for p in pairs {
        h.add(p.alice_bin, p.bob_bin)?;
    }
    Ok(h)
}

/// Plug-in mutual information in bits, with `0 log 0 = 0`.
pub fn mutual_information(h: &JointHistogram) -> Result<f64> {
    mutual_information_with_stderr(h).map(|(mi, _)| mi)
}

/// Plug-in mutual information together with its delta-method standard error
/// `sqrt(Var[pmi] / N)`, where `pmi` is the pointwise mutual information.
pub fn mutual_information_with_stderr(h: &JointHistogram) -> Result<(f64, f64)> {
    let total = h.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let n = h.n as usize;
    let nt = total as f64;
    let pa = h.alice_marginal();
    let pb = h.bob_marginal();
    let mut mean = 0.0;
    let mut second = 0.0;
    for a in 0..n {
        for b in 0..n {
            let c = h.counts[a * n + b];
            if c == 0 {
                continue;
            }
            let p = c as f64 / nt;
            // log2(p(a,b) / (p(a) p(b))) = log2(c N / (c_a c_b))
            let pmi = libm::log2(c as f64 * nt / (pa[a] as f64 * pb[b] as f64));
            mean += p * pmi;
            second += p * pmi * pmi;
        }
    }
    let var = (second - mean * mean).max(0.0);
    Ok((mean.max(0.0), libm::sqrt(var / nt)))
}

/// Magnitude of the first-order (Miller-Madow) bias of the plug-in estimate:
/// `|K_ab - K_a - K_b + 1| / (2 N ln 2)` with `K` the occupied cell counts.
pub fn mutual_information_bias(h: &JointHistogram) -> Result<f64> {
    let total = h.total();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let occupied = |c: &[u64]| c.iter().filter(|&&x| x > 0).count() as f64;
    let k = occupied(&h.counts) - occupied(&h.alice_marginal()) - occupied(&h.bob_marginal()) + 1.0;
    Ok(libm::fabs(k) / (2.0 * total as f64 * core::f64::consts::LN_2))
}

/// Shannon entropy in bits of a probability vector (zeros ignored).
pub fn entropy_bits(probabilities: impl IntoIterator<Item = f64>) -> f64 {
    probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * libm::log2(p))
        .sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits([p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: u32, b: u32) -> SiftedPair {
        SiftedPair {
            frame_index: 0,
            alice_bin: a,
            bob_bin: b,
        }
    }

    #[test]
    fn empty_histogram() {
        let h = joint_histogram(&[], 4).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(mutual_information(&h), Err(Error::EmptyHistogram));
    }

    #[test]
    fn out_of_range() {
        assert!(joint_histogram(&[pair(4, 0)], 4).is_err());
    }

    #[test]
    fn diagonal_and_product() {
        let diag: Vec<_> = (0..400).map(|i| pair(i % 4, i % 4)).collect();
        let h = joint_histogram(&diag, 4).unwrap();
        let (mi, se) = mutual_information_with_stderr(&h).unwrap();
        assert!((mi - 2.0).abs() < 1e-12);
        assert!(se < 1e-12);

        let prod = JointHistogram::from_counts(2, vec![3, 6, 5, 10]).unwrap();
        assert!(mutual_information(&prod).unwrap().abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
    }
}
