//! Channel model and per-layer log-likelihood ratios.

use alloc::vec;
use alloc::vec::Vec;

use crate::binning::FrameConfig;
use crate::error::{invalid, Error, Result};
use crate::info::{entropy_bits, JointHistogram};

/// Magnitude clamp for all LLRs, natural-log units.
pub const LLR_MAX: f64 = 30.0;
/// Add-alpha smoothing applied to training counts.
pub const SMOOTHING_ALPHA: f64 = 0.5;
/// Syndrome-rate overhead over the estimated conditional entropy.
pub const EFFICIENCY_MARGIN: f64 = 1.15;
/// Design rates of the available LDPC codes.
pub const RATE_LADDER: [f64; 4] = [0.5, 0.7, 0.8, 0.9];

/// Smoothed joint law of (Alice bin, Bob bin) estimated from training frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    n: u32,
    /// Row-major `P(alice, bob)`.
    joint: Vec<f64>,
}

impl ChannelModel {
    /// `P(a, b) = (count(a, b) + alpha) / (total + alpha n^2)`.
    pub fn from_histogram(h: &JointHistogram, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid("alpha", "must be finite and >= 0"));
        }
        let n = h.n();
        let denom = h.total() as f64 + alpha * (n as f64) * (n as f64);
        if denom <= 0.0 {
            return Err(Error::EmptyHistogram);
        }
        let joint = h
            .counts()
            .iter()
            .map(|&c| (c as f64 + alpha) / denom)
            .collect();
        Ok(ChannelModel { n, joint })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn joint(&self, alice: u32, bob: u32) -> f64 {
        self.joint[(alice * self.n + bob) as usize]
    }
}

fn check_model(model: &ChannelModel, cfg: &FrameConfig) -> Result<()> {
    if model.n != cfg.bins_per_frame {
        return Err(invalid(
            "model",
            alloc::format!(
                "model has {} bins, frame config {}",
                model.n,
                cfg.bins_per_frame
            ),
        ));
    }
    Ok(())
}

/// LLRs `ln P(bit = 0 | y, prior) / P(bit = 1 | y, prior)` of Alice's bit in
/// `layer` (0 = most significant) for every frame.
///
/// `prior_layers[k][f]` is the already-decoded bit of layer `k < layer` in
/// frame `f`. Infinite ratios are clamped to `±LLR_MAX`; a frame whose
/// conditioning event has no mass gets 0.
pub fn channel_llrs(
    bob_bins: &[u32],
    layer: usize,
    prior_layers: &[Vec<bool>],
    model: &ChannelModel,
    cfg: &FrameConfig,
) -> Result<Vec<f64>> {
    check_model(model, cfg)?;
    let width = cfg.bits_per_symbol();
    if layer >= width {
        return Err(Error::OutOfRange {
            what: "layer",
            index: layer,
            limit: width,
        });
    }
    if prior_layers.len() < layer {
        return Err(Error::LengthMismatch {
            what: "prior layers",
            expected: layer,
            actual: prior_layers.len(),
        });
    }
    for prior in &prior_layers[..layer] {
        if prior.len() != bob_bins.len() {
            return Err(Error::LengthMismatch {
                what: "prior layer",
                expected: bob_bins.len(),
                actual: prior.len(),
            });
        }
    }

    // table[y][prefix]: LLR given Bob's bin and the decoded higher bits.
    let n = cfg.bins_per_frame;
    let prefixes = 1usize << layer;
    let mut sums = vec![[0.0f64; 2]; n as usize * prefixes];
    for a in 0..n {
        let code = cfg.mapping.code(a) as usize;
        let prefix = code >> (width - layer);
        let bit = (code >> (width - 1 - layer)) & 1;
        for y in 0..n {
            sums[y as usize * prefixes + prefix][bit] += model.joint(a, y);
        }
    }
    let table: Vec<f64> = sums
        .iter()
        .map(|&[zero, one]| match (zero > 0.0, one > 0.0) {
            (true, true) => (libm::log(zero) - libm::log(one)).clamp(-LLR_MAX, LLR_MAX),
            (true, false) => LLR_MAX,
            (false, true) => -LLR_MAX,
            (false, false) => 0.0,
        })
        .collect();

    bob_bins
        .iter()
        .enumerate()
        .map(|(f, &y)| {
            if y >= n {
                return Err(Error::OutOfRange {
                    what: "bin",
                    index: y as usize,
                    limit: n as usize,
                });
            }
            let prefix = prior_layers[..layer]
                .iter()
                .fold(0usize, |acc, bits| (acc << 1) | bits[f] as usize);
            Ok(table[y as usize * prefixes + prefix])
        })
        .collect()
}

/// `H(X_l | Y, X_0..X_{l-1})` in bits for every layer `l` under the model.
pub fn layer_conditional_entropies(model: &ChannelModel, cfg: &FrameConfig) -> Result<Vec<f64>> {
    check_model(model, cfg)?;
    let width = cfg.bits_per_symbol();
    let n = cfg.bins_per_frame;
    // H(Y, top-k bits of X) for k = 0..=width.
    let joint_entropy = |k: usize| {
        let mut p = vec![0.0; (n as usize) << k];
        for a in 0..n {
            let prefix = (cfg.mapping.code(a) as usize) >> (width - k);
            for y in 0..n {
                p[((y as usize) << k) | prefix] += model.joint(a, y);
            }
        }
        entropy_bits(p)
    };
    let h: Vec<f64> = (0..=width).map(joint_entropy).collect();
    Ok(h.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect())
}

/// Highest ladder rate whose syndrome rate `1 - r` covers
/// `margin * conditional_entropy`; 0.0 (full disclosure) when none does.
pub fn select_rate(conditional_entropy: f64, margin: f64, ladder: &[f64]) -> f64 {
    let needed = margin * conditional_entropy;
    ladder
        .iter()
        .copied()
        .filter(|&r| 1.0 - r >= needed)
        .fold(0.0, f64::max)
}
