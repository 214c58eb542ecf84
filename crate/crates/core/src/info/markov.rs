//! Frame-pattern Markov chains for detector downtime.
//!
//! A state is the occupancy pattern of one frame together with the downtime
//! (in bins) it carries into the next frame. Transitions depend only on the
//! carried downtime, so chains store one outgoing distribution per distinct
//! carry and share it between states. This keeps `n = 16` chains tractable.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use super::histogram::entropy_bits;
use crate::error::{invalid, Error, Result};

/// Largest number of bins per frame handled by exact enumeration.
pub const MAX_CHAIN_BINS: u32 = 16;
/// Largest downtime, in bins, accepted by [`build_downtime_chain`].
pub const MAX_DOWNTIME_BINS: u32 = 1024;
/// Chains up to this many states are solved densely; larger ones iterate.
pub const DENSE_SOLVE_LIMIT: usize = 1000;

const ROW_SUM_TOLERANCE: f64 = 1e-12;
const STATIONARY_TOLERANCE: f64 = 1e-10;

/// Descriptor of a downtime-chain state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameState {
    /// Bit `i` set when bin `i` is occupied.
    pub pattern: u32,
    /// Bins of downtime carried into the next frame.
    pub carry: u32,
}

/// A finite Markov chain with row-shared sparse transitions.
#[derive(Debug)]
pub struct MarkovChain {
    labels: Vec<String>,
    frame_states: Vec<FrameState>,
    /// `row_of[i]` indexes into `rows`.
    row_of: Vec<usize>,
    /// Distinct outgoing distributions, sorted by target state.
    rows: Vec<Vec<(usize, f64)>>,
    stationary: OnceBox<Vec<f64>>,
}

impl Clone for MarkovChain {
    fn clone(&self) -> Self {
        let stationary = OnceBox::new();
        if let Some(pi) = self.stationary.get() {
            let _ = stationary.set(alloc::boxed::Box::new(pi.clone()));
        }
        MarkovChain {
            labels: self.labels.clone(),
            frame_states: self.frame_states.clone(),
            row_of: self.row_of.clone(),
            rows: self.rows.clone(),
            stationary,
        }
    }
}

impl MarkovChain {
    /// Builds a chain from a dense row-stochastic matrix.
    pub fn from_dense(labels: Vec<String>, matrix: &[Vec<f64>]) -> Result<Self> {
        let rows = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(j, &p)| (j, p))
                    .collect()
            })
            .collect();
        let row_of = (0..matrix.len()).collect();
        Self::from_shared_rows(labels, Vec::new(), row_of, rows)
    }

    /// Builds a chain whose state `i` follows the distribution `rows[row_of[i]]`.
    pub fn from_shared_rows(
        labels: Vec<String>,
        frame_states: Vec<FrameState>,
        row_of: Vec<usize>,
        mut rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let len = labels.len();
        if row_of.len() != len {
            return Err(Error::LengthMismatch {
                what: "state rows",
                expected: len,
                actual: row_of.len(),
            });
        }
        if len == 0 {
            return Err(invalid("states", "chain has no states"));
        }
        if let Some(&r) = row_of.iter().find(|&&r| r >= rows.len()) {
            return Err(Error::OutOfRange {
                what: "row",
                index: r,
                limit: rows.len(),
            });
        }
        for (k, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut sum = 0.0;
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(invalid(
                        "transition",
                        format!("row {k} repeats target {}", w[0].0),
                    ));
                }
            }
            for &(j, p) in row.iter() {
                if j >= len {
                    return Err(Error::OutOfRange {
                        what: "target state",
                        index: j,
                        limit: len,
                    });
                }
                if !(p.is_finite() && p >= 0.0) {
                    return Err(invalid(
                        "transition",
                        format!("row {k} has probability {p}"),
                    ));
                }
                sum += p;
            }
            if libm::fabs(sum - 1.0) > ROW_SUM_TOLERANCE {
                return Err(invalid("transition", format!("row {k} sums to {sum}")));
            }
        }
        Ok(MarkovChain {
            labels,
            frame_states,
            row_of,
            rows,
            stationary: OnceBox::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Frame descriptors; empty for chains built from a plain matrix.
    pub fn frame_states(&self) -> &[FrameState] {
        &self.frame_states
    }

    /// Outgoing `(target, probability)` pairs of state `i`, sorted by target.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[self.row_of[i]]
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        let row = self.row(i);
        row.binary_search_by_key(&j, |&(t, _)| t)
            .map(|k| row[k].1)
            .unwrap_or(0.0)
    }

    /// All nonzero transitions in state order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |i| self.row(i).iter().map(move |&(j, p)| (i, j, p)))
    }

    /// `x P` for a row vector `x`.
    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        let mut mass = vec![0.0; self.rows.len()];
        for (i, &xi) in x.iter().enumerate() {
            mass[self.row_of[i]] += xi;
        }
        let mut out = vec![0.0; self.len()];
        for (row, &m) in self.rows.iter().zip(&mass) {
            if m == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += m * p;
            }
        }
        out
    }

    /// Sup-norm of `pi P - pi`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        self.step(pi)
            .iter()
            .zip(pi)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Checks that every state reaches every other.
    pub fn check_irreducible(&self) -> Result<()> {
        let len = self.len();
        let mut forward = vec![false; len];
        let mut row_done = vec![false; self.rows.len()];
        let mut queue = VecDeque::from([0usize]);
        forward[0] = true;
        while let Some(i) = queue.pop_front() {
            let r = self.row_of[i];
            if core::mem::replace(&mut row_done[r], true) {
                continue;
            }
            for &(j, p) in &self.rows[r] {
                if p > 0.0 && !forward[j] {
                    forward[j] = true;
                    queue.push_back(j);
                }
            }
        }

        // Reverse edges at row granularity: rows feeding state j.
        let mut feeds: Vec<Vec<usize>> = vec![Vec::new(); len];
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                if p > 0.0 {
                    feeds[j].push(r);
                }
            }
        }
        let mut states_of_row: Vec<Vec<usize>> = vec![Vec::new(); self.rows.len()];
        for (i, &r) in self.row_of.iter().enumerate() {
            states_of_row[r].push(i);
        }
        let mut backward = vec![false; len];
        let mut row_seen = vec![false; self.rows.len()];
        backward[0] = true;
        queue.push_back(0);
        while let Some(j) = queue.pop_front() {
            for &r in &feeds[j] {
                if core::mem::replace(&mut row_seen[r], true) {
                    continue;
                }
                for &i in &states_of_row[r] {
                    if !backward[i] {
                        backward[i] = true;
                        queue.push_back(i);
                    }
                }
            }
        }

        let bad: Vec<String> = (0..len)
            .filter(|&i| !(forward[i] && backward[i]))
            .map(|i| self.labels[i].clone())
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Reducible(bad))
        }
    }

    /// Stationary distribution, computed once and cached.
    pub fn stationary(&self) -> Result<&[f64]> {
        if let Some(pi) = self.stationary.get() {
            return Ok(pi);
        }
        let pi = self.solve_stationary()?;
        // A concurrent caller may have won the race; both computed the same vector.
        let _ = self.stationary.set(alloc::boxed::Box::new(pi));
        Ok(self.stationary.get().expect("just set"))
    }

    fn solve_stationary(&self) -> Result<Vec<f64>> {
        self.check_irreducible()?;
        let len = self.len();
        let mut pi = if len <= DENSE_SOLVE_LIMIT {
            self.dense_solve()
        } else {
            vec![1.0 / len as f64; len]
        };
        // Lazy power iteration, x <- (x + xP) / 2, polishes the dense solution
        // and is the whole method for large chains. Laziness removes periodicity.
        let mut residual = self.residual(&pi);
        let mut iterations = 0;
        while residual > STATIONARY_TOLERANCE * 1e-2 && iterations < 200_000 {
            let next = self.step(&pi);
            for (p, q) in pi.iter_mut().zip(&next) {
                *p = 0.5 * (*p + q);
            }
            normalize(&mut pi);
            iterations += 1;
            if iterations % 16 == 0 || len <= DENSE_SOLVE_LIMIT {
                residual = self.residual(&pi);
            }
        }
        if residual > STATIONARY_TOLERANCE {
            return Err(Error::NotConverged { residual });
        }
        Ok(pi)
    }

    /// Solves `pi (P - I) = 0`, `sum pi = 1` by Gaussian elimination.
    fn dense_solve(&self) -> Vec<f64> {
        let len = self.len();
        // a[j][i] = P[i][j] - delta_ij, last row replaced by normalization.
        let mut a = vec![vec![0.0; len + 1]; len];
        for i in 0..len {
            for &(j, p) in self.row(i) {
                a[j][i] += p;
            }
            a[i][i] -= 1.0;
        }
        a[len - 1].fill(1.0);
        for col in 0..len {
            let pivot = (col..len)
                .max_by(|&x, &y| libm::fabs(a[x][col]).total_cmp(&libm::fabs(a[y][col])))
                .expect("non-empty range");
            a.swap(col, pivot);
            let d = a[col][col];
            if d == 0.0 {
                continue;
            }
            for row in 0..len {
                if row == col {
                    continue;
                }
                let f = a[row][col] / d;
                if f == 0.0 {
                    continue;
                }
                for k in col..=len {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
        let mut pi: Vec<f64> = (0..len)
            .map(|i| {
                if a[i][i] == 0.0 {
                    0.0
                } else {
                    a[i][len] / a[i][i]
                }
            })
            .map(|x| x.max(0.0))
            .collect();
        normalize(&mut pi);
        pi
    }
}

fn normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// Stationary distribution `pi` with `pi P = pi` and `sum pi = 1`.
pub fn stationary_distribution(mc: &MarkovChain) -> Result<Vec<f64>> {
    mc.stationary().map(<[f64]>::to_vec)
}

/// Entropy rate `-sum_i pi_i sum_j P_ij log2 P_ij` in bits per step.
pub fn entropy_rate(mc: &MarkovChain) -> Result<f64> {
    let pi = mc.stationary()?;
    let mut mass = vec![0.0; mc.rows.len()];
    for (i, &p) in pi.iter().enumerate() {
        mass[mc.row_of[i]] += p;
    }
    Ok(mc
        .rows
        .iter()
        .zip(&mass)
        .map(|(row, &m)| m * entropy_bits(row.iter().map(|&(_, p)| p)))
        .sum())
}

/// Outcomes of one frame given `carry_in` blocked bins at its start.
fn frame_outcomes(n: u32, d: u32, p: f64, carry_in: u32) -> BTreeMap<FrameState, f64> {
    let mut out = BTreeMap::new();
    // (next bin, remaining block, pattern so far, probability)
    let mut stack = vec![(0u32, carry_in, 0u32, 1.0f64)];
    while let Some((bin, block, pattern, prob)) = stack.pop() {
        if bin == n {
            *out.entry(FrameState {
                pattern,
                carry: block,
            })
            .or_insert(0.0) += prob;
            continue;
        }
        if block > 0 {
            stack.push((bin + 1, block - 1, pattern, prob));
        } else {
            stack.push((bin + 1, 0, pattern, prob * (1.0 - p)));
            stack.push((bin + 1, d, pattern | (1 << bin), prob * p));
        }
    }
    out
}

fn pattern_label(n: u32, state: FrameState, with_carry: bool) -> String {
    let mut s: String = (0..n)
        .map(|i| {
            if state.pattern >> i & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect();
    if with_carry {
        s.push_str(&format!("/{}", state.carry));
    }
    s
}

/// Frame-pattern chain for `n` bins per frame, downtime of `d` bins after each
/// detection, and independent per-bin arrival probability `p`.
///
/// Bins are scanned left to right; an unblocked bin is occupied with
/// probability `p`, and an occupancy blocks the next `d` bins, across frame
/// boundaries included. Only states reachable from an idle detector are kept.
/// Labels list bins left to right (`"10"` means bin 0 occupied); when
/// `d > n` the carried downtime is appended as `/carry`.
pub fn build_downtime_chain(n: u32, d: u32, p: f64) -> Result<MarkovChain> {
    if n == 0 || n > MAX_CHAIN_BINS {
        return Err(invalid("n", format!("must lie in 1..={MAX_CHAIN_BINS}")));
    }
    if d > MAX_DOWNTIME_BINS {
        return Err(invalid("d", format!("must be <= {MAX_DOWNTIME_BINS}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "must lie strictly between 0 and 1"));
    }

    let mut by_carry: BTreeMap<u32, BTreeMap<FrameState, f64>> = BTreeMap::new();
    let mut pending = VecDeque::from([0u32]);
    while let Some(carry) = pending.pop_front() {
        if by_carry.contains_key(&carry) {
            continue;
        }
        let outcomes = frame_outcomes(n, d, p, carry);
        for s in outcomes.keys() {
            if !by_carry.contains_key(&s.carry) {
                pending.push_back(s.carry);
            }
        }
        by_carry.insert(carry, outcomes);
    }

    let mut states: Vec<FrameState> = by_carry.values().flat_map(|o| o.keys().copied()).collect();
    let with_carry = d > n;
    let mut labelled: Vec<(String, FrameState)> = states
        .drain(..)
        .map(|s| (pattern_label(n, s, with_carry), s))
        .collect();
    labelled.sort();
    labelled.dedup();
    let index: BTreeMap<FrameState, usize> = labelled
        .iter()
        .enumerate()
        .map(|(i, &(_, s))| (s, i))
        .collect();

    let carries: Vec<u32> = by_carry.keys().copied().collect();
    let rows: Vec<Vec<(usize, f64)>> = by_carry
        .values()
        .map(|o| o.iter().map(|(s, &prob)| (index[s], prob)).collect())
        .collect();
    let row_of = labelled
        .iter()
        .map(|(_, s)| {
            carries
                .binary_search(&s.carry)
                .expect("every carry enumerated")
        })
        .collect();
    let (labels, frame_states) = labelled.into_iter().unzip();
    MarkovChain::from_shared_rows(labels, frame_states, row_of, rows)
}

/// Entropy rate of the downtime chain divided by that of the same bins
/// without downtime (`n * h(p)`): the fraction of raw randomness that
/// survives detector memory. Equals 1 for `d = 0`.
pub fn downtime_entropy_ratio(n: u32, d: u32, p: f64) -> Result<f64> {
    let with = entropy_rate(&build_downtime_chain(n, d, p)?)?;
    let without = n as f64 * super::binary_entropy(p);
    Ok((with / without).clamp(0.0, 1.0))
}
