//! Syndrome-driven sum-product decoding.

use alloc::vec;
use alloc::vec::Vec;

use super::code::{syndrome_bits, LinearCode, Syndrome};
use super::llr::LLR_MAX;
use super::multilevel::LayerReport;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderSettings {
    pub max_iters: usize,
    /// Weight of the fresh check message; 1.0 disables damping.
    pub damping: f64,
}

impl Default for DecoderSettings {
    fn default() -> Self {
        DecoderSettings {
            max_iters: 100,
            damping: 1.0,
        }
    }
}

impl DecoderSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Outcome of decoding one block, or of a whole multilevel reconciliation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconciliationResult {
    /// Bob's estimate of Alice's bits.
    pub decoded: Vec<bool>,
    pub converged: bool,
    /// Iterations used; summed over layers for multilevel runs.
    pub iterations_used: usize,
    /// Syndrome bits plus verification tag bits disclosed.
    pub leaked_bits: usize,
    /// Verification tags matched. Always false for a bare block decode,
    /// which exchanges no tag.
    pub verified: bool,
    /// Per-layer details; empty for a bare block decode.
    pub layers: Vec<LayerReport>,
}

/// Flooding sum-product decoding of Alice's word from its syndrome and
/// Bob's per-bit log-likelihood ratios (`ln P(0)/P(1)`).
///
/// Check `c` enforces parity `s_c`: its outgoing messages are negated when
/// `s_c = 1`. Decoding stops as soon as the hard decision reproduces the
/// syndrome; iteration 0 tests the channel decisions alone.
pub fn bp_decode_syndrome(
    code: &LinearCode,
    syndrome: &Syndrome,
    llrs: &[f64],
    settings: &DecoderSettings,
) -> Result<ReconciliationResult> {
    settings.validate()?;
    let n = code.n();
    let m = code.m();
    if llrs.len() != n {
        return Err(Error::LengthMismatch {
            what: "llrs",
            expected: n,
            actual: llrs.len(),
        });
    }
    if syndrome.bits.len() != m {
        return Err(Error::LengthMismatch {
            what: "syndrome",
            expected: m,
            actual: syndrome.bits.len(),
        });
    }

    let channel: Vec<f64> = llrs.iter().map(|&l| clamp(l)).collect();
    let mut decoded: Vec<bool> = channel.iter().map(|&l| l < 0.0).collect();
    let done = |d: &[bool]| syndrome_bits(code, d) == syndrome.bits;
    let result = |decoded, converged, iterations_used| ReconciliationResult {
        decoded,
        converged,
        iterations_used,
        leaked_bits: m,
        verified: false,
        layers: Vec::new(),
    };
    if done(&decoded) {
        return Ok(result(decoded, true, 0));
    }

    // Edges in check-major order.
    let checks = code.checks();
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0);
    for row in checks {
        offsets.push(offsets.last().unwrap() + row.len());
    }
    let edge_var: Vec<usize> = checks.iter().flatten().map(|&v| v as usize).collect();
    let edges = edge_var.len();
    let mut var_to_check: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
    let mut check_to_var = vec![0.0; edges];
    let mut tanh_half = vec![0.0; edges];
    let mut prefix = Vec::new();
    let mut totals = vec![0.0; n];

    for iteration in 1..=settings.max_iters {
        for c in 0..m {
            let (lo, hi) = (offsets[c], offsets[c + 1]);
            let sign = if syndrome.bits[c] { -1.0 } else { 1.0 };
            for e in lo..hi {
                tanh_half[e] = libm::tanh(0.5 * var_to_check[e]);
            }
            // Exclusive products via prefix/suffix sweeps.
            prefix.clear();
            let mut acc = 1.0;
            for &t in &tanh_half[lo..hi] {
                prefix.push(acc);
                acc *= t;
            }
            let mut suffix = 1.0;
            for e in (lo..hi).rev() {
                let product = (sign * prefix[e - lo] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                let fresh = clamp(2.0 * libm::atanh(product));
                check_to_var[e] =
                    settings.damping * fresh + (1.0 - settings.damping) * check_to_var[e];
                suffix *= tanh_half[e];
            }
        }

        totals.copy_from_slice(&channel);
        for (e, &v) in edge_var.iter().enumerate() {
            totals[v] += check_to_var[e];
        }
        for (e, &v) in edge_var.iter().enumerate() {
            var_to_check[e] = clamp(totals[v] - check_to_var[e]);
        }
        for (d, &t) in decoded.iter_mut().zip(&totals) {
            *d = t < 0.0;
        }
        if done(&decoded) {
            return Ok(result(decoded, true, iteration));
        }
    }
    Ok(result(decoded, false, settings.max_iters))
}

fn clamp(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_MAX, LLR_MAX)
    }
}
