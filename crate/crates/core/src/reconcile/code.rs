use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::tag::crc64;
use crate::error::{invalid, Error, Result};
use crate::rng::{substream, StreamRng};

/// A binary linear code given by the sparse rows of its parity-check matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    checks: Vec<Vec<u32>>,
    var_checks: Vec<Vec<u32>>,
}

impl LinearCode {
    /// Validates that positions are in range, rows have no repeats, and every
    /// bit takes part in at least one check.
    pub fn new(n: usize, mut checks: Vec<Vec<u32>>) -> Result<Self> {
        let mut var_checks = vec![Vec::new(); n];
        for (c, row) in checks.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid("checks", format!("check {c} repeats a position")));
            }
            for &v in row.iter() {
                let slot = var_checks.get_mut(v as usize).ok_or(Error::OutOfRange {
                    what: "bit position",
                    index: v as usize,
                    limit: n,
                })?;
                slot.push(c as u32);
            }
        }
        if let Some(v) = var_checks.iter().position(Vec::is_empty) {
            return Err(invalid(
                "checks",
                format!("bit {v} is not covered by any check"),
            ));
        }
        Ok(LinearCode {
            n,
            checks,
            var_checks,
        })
    }

    /// The rate-0 code whose syndrome is the input itself.
    pub fn identity(n: usize) -> Self {
        LinearCode {
            n,
            checks: (0..n as u32).map(|v| vec![v]).collect(),
            var_checks: (0..n as u32).map(|c| vec![c]).collect(),
        }
    }

    /// Block length in bits.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.checks.len()
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - self.m() as f64 / self.n as f64
    }

    pub fn checks(&self) -> &[Vec<u32>] {
        &self.checks
    }

    pub fn var_checks(&self) -> &[Vec<u32>] {
        &self.var_checks
    }

    /// Checksum of the code structure, used to tie syndromes to their code.
    pub fn id(&self) -> u64 {
        let mut bytes = Vec::with_capacity(16 + 4 * self.n * 3);
        bytes.extend_from_slice(&(self.n as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.m() as u64).to_le_bytes());
        for row in &self.checks {
            bytes.extend_from_slice(&(row.len() as u32).to_le_bytes());
            for &v in row {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        crc64(&bytes)
    }

    /// Number of length-4 cycles in the Tanner graph: the sum over check
    /// pairs of `C(shared, 2)`.
    pub fn count_four_cycles(&self) -> u64 {
        count_cycles(&self.checks, &self.var_checks)
    }
}

fn count_cycles(checks: &[Vec<u32>], var_checks: &[Vec<u32>]) -> u64 {
    let mut overlap = vec![0u32; checks.len()];
    let mut total = 0u64;
    for (c, row) in checks.iter().enumerate() {
        let mut touched = Vec::new();
        for &v in row {
            for &c2 in &var_checks[v as usize] {
                if (c2 as usize) > c {
                    if overlap[c2 as usize] == 0 {
                        touched.push(c2);
                    }
                    overlap[c2 as usize] += 1;
                }
            }
        }
        for c2 in touched {
            let k = overlap[c2 as usize] as u64;
            total += k * (k - 1) / 2;
            overlap[c2 as usize] = 0;
        }
    }
    total
}

/// Parity-check evaluations of a bit vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syndrome {
    pub bits: Vec<bool>,
    /// [`LinearCode::id`] of the generating code.
    pub code_id: u64,
}

pub fn compute_syndrome(code: &LinearCode, x: &[bool]) -> Result<Syndrome> {
    if x.len() != code.n {
        return Err(Error::LengthMismatch {
            what: "syndrome input",
            expected: code.n,
            actual: x.len(),
        });
    }
    Ok(Syndrome {
        bits: syndrome_bits(code, x),
        code_id: code.id(),
    })
}

pub(crate) fn syndrome_bits(code: &LinearCode, x: &[bool]) -> Vec<bool> {
    code.checks
        .iter()
        .map(|row| row.iter().fold(false, |acc, &v| acc ^ x[v as usize]))
        .collect()
}

/// A regular code together with its 4-cycle bookkeeping.
#[derive(Debug, Clone)]
pub struct LdpcConstruction {
    pub code: LinearCode,
    /// 4-cycles in the first valid socket permutation.
    pub raw_four_cycles: u64,
    /// 4-cycles left after resampling.
    pub four_cycles: u64,
}

/// Random `(column_weight, row_weight)`-regular code of length `n_code`.
pub fn make_regular_ldpc(
    n_code: usize,
    column_weight: usize,
    row_weight: usize,
    seed: u64,
) -> Result<LinearCode> {
    make_regular_ldpc_report(n_code, column_weight, row_weight, seed).map(|c| c.code)
}

/// As [`make_regular_ldpc`], also reporting 4-cycle counts before and after
/// the resampling pass.
pub fn make_regular_ldpc_report(
    n_code: usize,
    column_weight: usize,
    row_weight: usize,
    seed: u64,
) -> Result<LdpcConstruction> {
    if column_weight < 2 {
        return Err(invalid("column_weight", "must be >= 2"));
    }
    if row_weight < 2 || row_weight > n_code {
        return Err(invalid("row_weight", "must lie in 2..=n_code"));
    }
    let sockets = n_code * column_weight;
    if !sockets.is_multiple_of(row_weight) {
        return Err(invalid(
            "row_weight",
            format!("{n_code} x {column_weight} is not divisible by {row_weight}"),
        ));
    }
    let m = sockets / row_weight;
    if column_weight > m {
        return Err(invalid(
            "column_weight",
            format!("exceeds the {m} available checks"),
        ));
    }

    let mut rng = substream(seed, 0);
    let mut edges = None;
    for _ in 0..64 {
        let mut e: Vec<u32> = (0..n_code as u32)
            .flat_map(|v| core::iter::repeat_n(v, column_weight))
            .collect();
        e.shuffle(&mut rng);
        if repair_duplicates(&mut e, row_weight, &mut rng) {
            edges = Some(e);
            break;
        }
    }
    let edges = edges.ok_or_else(|| {
        Error::Construction(format!(
            "no simple ({column_weight},{row_weight}) graph found for n = {n_code}"
        ))
    })?;

    let mut graph = Graph::new(&edges, row_weight, n_code);
    let raw_four_cycles = count_cycles(&graph.checks, &graph.var_checks);
    let four_cycles = remove_four_cycles(&mut graph, raw_four_cycles, &mut rng);

    let code = LinearCode::new(n_code, graph.checks)?;
    debug_assert_eq!(code.count_four_cycles(), four_cycles);
    Ok(LdpcConstruction {
        code,
        raw_four_cycles,
        four_cycles,
    })
}

fn row_has(edges: &[u32], row_weight: usize, check: usize, v: u32) -> bool {
    edges[check * row_weight..(check + 1) * row_weight].contains(&v)
}

/// Swaps sockets until no check holds the same bit twice.
fn repair_duplicates(edges: &mut [u32], row_weight: usize, rng: &mut StreamRng) -> bool {
    let m = edges.len() / row_weight;
    for pos in 0..edges.len() {
        let check = pos / row_weight;
        let start = check * row_weight;
        let dup = |e: &[u32]| e[start..pos].contains(&e[pos]);
        if !dup(edges) {
            continue;
        }
        let mut fixed = false;
        for _ in 0..4 * edges.len() {
            let other = rng.random_range(0..edges.len());
            let other_check = other / row_weight;
            if other_check == check {
                continue;
            }
            let (a, b) = (edges[pos], edges[other]);
            if row_has(edges, row_weight, check, b) || row_has(edges, row_weight, other_check, a) {
                continue;
            }
            edges.swap(pos, other);
            fixed = true;
            break;
        }
        if !fixed {
            return false;
        }
    }
    debug_assert!((0..m).all(|c| {
        let mut row = edges[c * row_weight..(c + 1) * row_weight].to_vec();
        row.sort_unstable();
        row.windows(2).all(|w| w[0] != w[1])
    }));
    true
}

struct Graph {
    checks: Vec<Vec<u32>>,
    var_checks: Vec<Vec<u32>>,
    overlap: Vec<u32>,
}

impl Graph {
    fn new(edges: &[u32], row_weight: usize, n: usize) -> Self {
        let checks: Vec<Vec<u32>> = edges.chunks(row_weight).map(<[u32]>::to_vec).collect();
        let mut var_checks = vec![Vec::new(); n];
        for (c, row) in checks.iter().enumerate() {
            for &v in row {
                var_checks[v as usize].push(c as u32);
            }
        }
        let overlap = vec![0; checks.len()];
        Graph {
            checks,
            var_checks,
            overlap,
        }
    }

    /// 4-cycles through check `c`, skipping partner `skip`.
    fn cycles_at(&mut self, c: usize, skip: usize) -> u64 {
        let mut touched = Vec::new();
        for &v in &self.checks[c] {
            for &c2 in &self.var_checks[v as usize] {
                let c2 = c2 as usize;
                if c2 != c && c2 != skip {
                    if self.overlap[c2] == 0 {
                        touched.push(c2);
                    }
                    self.overlap[c2] += 1;
                }
            }
        }
        let mut total = 0;
        for c2 in touched {
            let k = self.overlap[c2] as u64;
            total += k * (k - 1) / 2;
            self.overlap[c2] = 0;
        }
        total
    }

    fn local_cycles(&mut self, a: usize, b: usize) -> u64 {
        let shared = self.checks[a]
            .iter()
            .filter(|v| self.checks[b].contains(v))
            .count() as u64;
        self.cycles_at(a, b) + self.cycles_at(b, a) + shared * shared.saturating_sub(1) / 2
    }

    fn replace(&mut self, check: usize, old: u32, new: u32) {
        let slot = self.checks[check]
            .iter_mut()
            .find(|v| **v == old)
            .expect("edge present");
        *slot = new;
        let vc = &mut self.var_checks[old as usize];
        vc.retain(|&c| c as usize != check);
        self.var_checks[new as usize].push(check as u32);
    }

    /// Check pairs sharing at least two bits, with one shared bit.
    fn conflicts(&mut self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for c in 0..self.checks.len() {
            for &v in &self.checks[c] {
                for &c2 in &self.var_checks[v as usize] {
                    if (c2 as usize) > c {
                        self.overlap[c2 as usize] += 1;
                        if self.overlap[c2 as usize] == 2 {
                            out.push((c, c2 as usize, v));
                        }
                    }
                }
            }
            for &v in &self.checks[c] {
                for &c2 in &self.var_checks[v as usize] {
                    self.overlap[c2 as usize] = 0;
                }
            }
        }
        out
    }
}

/// Greedy edge swaps that strictly lower the 4-cycle count; bounded effort.
fn remove_four_cycles(graph: &mut Graph, mut cycles: u64, rng: &mut StreamRng) -> u64 {
    const ROUNDS: usize = 12;
    const TRIES_PER_CONFLICT: usize = 64;
    let row_weight = graph.checks[0].len();
    let total_edges = graph.checks.len() * row_weight;
    for _ in 0..ROUNDS {
        if cycles == 0 {
            break;
        }
        let before = cycles;
        for (check, _, v) in graph.conflicts() {
            if !graph.checks[check].contains(&v) {
                continue;
            }
            for _ in 0..TRIES_PER_CONFLICT {
                let other = rng.random_range(0..total_edges) / row_weight;
                if other == check {
                    continue;
                }
                let w = graph.checks[other][rng.random_range(0..row_weight)];
                if graph.checks[check].contains(&w) || graph.checks[other].contains(&v) {
                    continue;
                }
                let old = graph.local_cycles(check, other);
                graph.replace(check, v, w);
                graph.replace(other, w, v);
                let new = graph.local_cycles(check, other);
                if new < old {
                    cycles = cycles - old + new;
                    break;
                }
                graph.replace(check, w, v);
                graph.replace(other, v, w);
            }
        }
        if cycles >= before {
            break;
        }
    }
    cycles
}

/// Column weight used for every ladder code.
const COLUMN_WEIGHT: usize = 3;

/// A code of length `len` at one of the ladder rates.
///
/// Rate 0 yields the identity code (the layer is disclosed); otherwise a
/// `(3, 3 / (1 - rate))`-regular code. `len` must be a multiple of 10.
pub fn code_for_rate(rate: f64, len: usize, seed: u64) -> Result<LinearCode> {
    if rate == 0.0 {
        return Ok(LinearCode::identity(len));
    }
    if !(rate > 0.0 && rate < 1.0) {
        return Err(invalid("rate", "must lie in [0, 1)"));
    }
    let row_weight = libm::round(COLUMN_WEIGHT as f64 / (1.0 - rate)) as usize;
    make_regular_ldpc(len, COLUMN_WEIGHT, row_weight, seed)
}
