//! Choosing the number of bins per frame.

use alloc::vec::Vec;

use super::histogram::{
    joint_histogram, mutual_information_bias, mutual_information_with_stderr, JointHistogram,
};
use super::rate::UniformOffsetChannel;
use crate::binning::{frame_and_bin, ppm_sift, FrameConfig, Mapping};
use crate::error::{invalid, Result};
use crate::source::{run_two_party_counted, DetectorParams, SourceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Mutual information per retained frame.
    BitsPerFrame,
    /// Mutual information times retained frames per simulated second.
    BitsPerSecond,
    /// Mutual information times retained frames per emitted pair.
    BitsPerPhoton,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::BitsPerFrame => "bits_per_frame",
            Metric::BitsPerSecond => "bits_per_second",
            Metric::BitsPerPhoton => "bits_per_photon",
        }
    }
}

/// What to evaluate for each candidate `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepModel {
    /// Full source/detector/binning simulation.
    Simulated {
        source: SourceParams,
        alice: DetectorParams,
        bob: DetectorParams,
        frame_duration: f64,
    },
    /// The cyclic uniform-offset channel, one photon per frame.
    UniformOffset {
        channel: UniformOffsetChannel,
        frames: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub value: f64,
    pub stderr: f64,
    /// First-order bias bound of `value`, same units.
    pub bias: f64,
    /// Mutual information per retained frame behind `value`.
    pub mutual_information: f64,
    pub retained_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metric: Metric,
    pub rows: Vec<SweepRow>,
    pub best_n: u32,
}

/// Picks the best candidate from `(n, value, uncertainty)` triples.
///
/// The winner is the smallest `n` whose value is within two combined
/// uncertainties of the maximum; exact ties therefore go to the smaller `n`.
pub fn select_best(rows: &[(u32, f64, f64)]) -> Option<u32> {
    let &(_, best_value, best_se) = rows
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?;
    rows.iter()
        .filter(|&&(_, v, se)| {
            let slack = 2.0 * libm::sqrt(se * se + best_se * best_se) + 1e-12;
            v >= best_value - slack
        })
        .map(|&(n, _, _)| n)
        .min()
}

/// Evaluates each candidate `n` through the mutual-information estimate and
/// returns the full table with the chosen `n`.
///
/// All candidates share `seed`, so simulated candidates bin the same photon
/// record.
pub fn optimize_bins(
    candidates: &[u32],
    model: &SweepModel,
    metric: Metric,
    seed: u64,
) -> Result<SweepTable> {
    if candidates.is_empty() {
        return Err(invalid("candidates", "empty candidate list"));
    }
    if let Some(n) = candidates.iter().find(|n| !n.is_power_of_two()) {
        return Err(invalid(
            "candidates",
            alloc::format!("{n} is not a power of two"),
        ));
    }

    let mut rows = Vec::with_capacity(candidates.len());
    match model {
        SweepModel::Simulated {
            source,
            alice,
            bob,
            frame_duration,
        } => {
            let (ta, tb, emitted) = run_two_party_counted(source, alice, bob, seed)?;
            for &n in candidates {
                let cfg = FrameConfig::new(*frame_duration, n, Mapping::Gray)?;
                let fa = frame_and_bin(&ta, &cfg, source.duration)?;
                let fb = frame_and_bin(&tb, &cfg, source.duration)?;
                let sifted = ppm_sift(&fa, &fb)?;
                let retained = sifted.len() as u64;
                let (mi, se, bias) = if retained == 0 {
                    (0.0, 0.0, 0.0)
                } else {
                    estimate(&joint_histogram(&sifted.pairs, n)?)?
                };
                let scale = match metric {
                    Metric::BitsPerFrame => 1.0,
                    Metric::BitsPerSecond if source.duration > 0.0 => {
                        retained as f64 / source.duration
                    }
                    Metric::BitsPerPhoton if emitted > 0 => retained as f64 / emitted as f64,
                    _ => 0.0,
                };
                rows.push(SweepRow {
                    n,
                    value: mi * scale,
                    stderr: se * scale,
                    bias: bias * scale,
                    mutual_information: mi,
                    retained_frames: retained,
                });
            }
        }
        SweepModel::UniformOffset { channel, frames } => {
            for &n in candidates {
                let sifted = channel.sample_pairs(n, *frames, seed)?;
                let (mi, se, bias) = estimate(&joint_histogram(&sifted.pairs, n)?)?;
                let scale = match metric {
                    Metric::BitsPerSecond => 1.0 / channel.frame_duration,
                    _ => 1.0,
                };
                rows.push(SweepRow {
                    n,
                    value: mi * scale,
                    stderr: se * scale,
                    bias: bias * scale,
                    mutual_information: mi,
                    retained_frames: *frames as u64,
                });
            }
        }
    }

    let triples: Vec<_> = rows
        .iter()
        .map(|r| {
            (
                r.n,
                r.value,
                libm::sqrt(r.stderr * r.stderr + r.bias * r.bias),
            )
        })
        .collect();
    let best_n = select_best(&triples).expect("non-empty");
    Ok(SweepTable {
        metric,
        rows,
        best_n,
    })
}

fn estimate(h: &JointHistogram) -> Result<(f64, f64, f64)> {
    let (mi, se) = mutual_information_with_stderr(h)?;
    Ok((mi, se, mutual_information_bias(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_break_prefers_small_n() {
        assert_eq!(
            select_best(&[(2, 1.0, 0.0), (4, 2.0, 0.0), (8, 2.0, 0.0)]),
            Some(4)
        );
        assert_eq!(
            select_best(&[(2, 1.0, 0.0), (4, 2.0, 0.0), (8, 3.0, 0.0)]),
            Some(8)
        );
        assert_eq!(select_best(&[(4, 2.0, 0.01), (8, 2.005, 0.01)]), Some(4));
        assert_eq!(select_best(&[]), None);
    }

    #[test]
    fn rejects_bad_candidates() {
        let model = SweepModel::UniformOffset {
            channel: UniformOffsetChannel {
                frame_duration: 1.0,
                offset_span: 0.25,
            },
            frames: 10,
        };
        assert!(optimize_bins(&[], &model, Metric::BitsPerFrame, 0).is_err());
        assert!(optimize_bins(&[3], &model, Metric::BitsPerFrame, 0).is_err());
    }
}
