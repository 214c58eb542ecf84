use rand::Rng;

use crate::binning::{SiftedPair, SiftedPairs};
use crate::error::{invalid, Result};
use crate::rng::substream;

/// Key rate in bits per frame when Bob's detection trails Alice's by an
/// offset uniform on `[0, offset_span)`:
/// `min(log2 n, log2(T_f / offset_span))`, floored at zero.
///
/// For `n > T_f / offset_span` the conditional entropy is
/// `log2(n * offset_span / T_f)`, so the plateau is `log2(T_f / offset_span)`.
pub fn analytic_rate_uniform_jitter(n: u32, frame_duration: f64, offset_span: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    if !(frame_duration.is_finite() && frame_duration > 0.0) {
        return Err(invalid("frame_duration", "must be finite and > 0"));
    }
    if !(offset_span.is_finite() && offset_span > 0.0) {
        return Err(invalid("offset_span", "must be finite and > 0"));
    }
    let full = libm::log2(n as f64);
    let plateau = libm::log2(frame_duration / offset_span);
    Ok(full.min(plateau).max(0.0))
}

/// Monte-Carlo version of the uniform-offset channel.
///
/// Alice's noiseless detector fires at the start of a uniformly chosen bin;
/// Bob's fires a uniform `[0, offset_span)` later, wrapping cyclically within
/// the frame. Every frame is retained by both parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformOffsetChannel {
    pub frame_duration: f64,
    pub offset_span: f64,
}

impl UniformOffsetChannel {
    pub fn sample_pairs(&self, n: u32, frames: usize, seed: u64) -> Result<SiftedPairs> {
        analytic_rate_uniform_jitter(n.max(1), self.frame_duration, self.offset_span)?;
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        let mut rng = substream(seed, 0);
        let pairs = (0..frames as u64)
            .map(|frame_index| {
                let alice_bin = rng.random_range(0..n);
                let offset = rng.random::<f64>() * self.offset_span;
                let shift = libm::floor(offset * n as f64 / self.frame_duration) as u64;
                let bob_bin = ((alice_bin as u64 + shift) % n as u64) as u32;
                SiftedPair {
                    frame_index,
                    alice_bin,
                    bob_bin,
                }
            })
            .collect();
        Ok(SiftedPairs {
            pairs,
            discards: Default::default(),
            frames_total: frames as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_values() {
        assert_eq!(analytic_rate_uniform_jitter(4, 1.0, 0.25).unwrap(), 2.0);
        assert_eq!(analytic_rate_uniform_jitter(16, 1.0, 0.25).unwrap(), 2.0);
        assert_eq!(analytic_rate_uniform_jitter(1, 1.0, 0.25).unwrap(), 0.0);
        assert_eq!(analytic_rate_uniform_jitter(2, 1.0, 0.25).unwrap(), 1.0);
        assert!(analytic_rate_uniform_jitter(0, 1.0, 0.25).is_err());
        assert!(analytic_rate_uniform_jitter(4, 0.0, 0.25).is_err());
        assert!(analytic_rate_uniform_jitter(4, 1.0, -1.0).is_err());
    }

    #[test]
    fn small_n_is_noiseless() {
        let ch = UniformOffsetChannel {
            frame_duration: 1.0,
            offset_span: 0.25,
        };
        let s = ch.sample_pairs(4, 1000, 1).unwrap();
        assert_eq!(s.symbol_error_rate(), 0.0);
        assert!(ch.sample_pairs(8, 1000, 1).unwrap().symbol_error_rate() > 0.3);
    }
}
