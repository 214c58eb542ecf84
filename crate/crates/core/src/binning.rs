//! Pulse-position-modulation framing, sifting and symbol mapping.
//!
//! The timeline is tiled from `t = 0` by frames of duration `T_f`, each split
//! into `n` equal bins. Bins and frames are half-open, so a tag landing exactly
//! on a boundary belongs to the later bin.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::source::TimeTagStream;

/// How a bin index is turned into `log2 n` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mapping {
    /// Big-endian binary expansion.
    Natural,
    /// Reflected binary Gray code.
    #[default]
    Gray,
}

impl Mapping {
    /// Codeword of `index` as an integer (bits are read MSB first).
    pub fn code(self, index: u32) -> u32 {
        match self {
            Mapping::Natural => index,
            Mapping::Gray => index ^ (index >> 1),
        }
    }

    /// Inverse of [`Mapping::code`].
    pub fn index(self, code: u32) -> u32 {
        match self {
            Mapping::Natural => code,
            Mapping::Gray => {
                let mut index = code;
                let mut shift = code >> 1;
                while shift != 0 {
                    index ^= shift;
                    shift >>= 1;
                }
                index
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    /// Frame duration `T_f` in seconds.
    pub frame_duration: f64,
    /// Bins per frame; a power of two.
    pub bins_per_frame: u32,
    pub mapping: Mapping,
}

impl FrameConfig {
    pub fn new(frame_duration: f64, bins_per_frame: u32, mapping: Mapping) -> Result<Self> {
        let cfg = FrameConfig {
            frame_duration,
            bins_per_frame,
            mapping,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_duration.is_finite() && self.frame_duration > 0.0) {
            return Err(invalid("frame_duration", "must be finite and > 0"));
        }
        if !self.bins_per_frame.is_power_of_two() {
            return Err(invalid(
                "bins_per_frame",
                format!("{} is not a power of two", self.bins_per_frame),
            ));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        self.frame_duration / self.bins_per_frame as f64
    }

    /// Bits carried by one retained frame, `log2 n`.
    pub fn bits_per_symbol(&self) -> usize {
        self.bins_per_frame.trailing_zeros() as usize
    }

    /// Number of whole frames in `[0, duration)`.
    pub fn frame_count(&self, duration: f64) -> usize {
        let ratio = duration / self.frame_duration;
        let nearest = libm::round(ratio);
        // Absorb rounding in e.g. 0.1 / 1e-6.
        if libm::fabs(ratio - nearest) <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            libm::floor(ratio) as usize
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Exactly one occupied bin.
    Retained(u32),
    Empty,
    /// More than one distinct bin occupied.
    Multi,
}

impl Verdict {
    pub fn is_retained(&self) -> bool {
        matches!(self, Verdict::Retained(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameObservation {
    pub frame_index: u64,
    /// Sorted, distinct bin indices.
    pub occupied_bins: Vec<u32>,
    pub verdict: Verdict,
}

impl FrameObservation {
    fn from_bins(frame_index: u64, mut occupied_bins: Vec<u32>) -> Self {
        occupied_bins.sort_unstable();
        occupied_bins.dedup();
        let verdict = match occupied_bins.as_slice() {
            [] => Verdict::Empty,
            [b] => Verdict::Retained(*b),
            _ => Verdict::Multi,
        };
        FrameObservation {
            frame_index,
            occupied_bins,
            verdict,
        }
    }
}

/// Maps a sorted tag stream onto `frame_count(duration)` frames.
///
/// Tags past the last whole frame are ignored. Frames without tags are
/// reported as [`Verdict::Empty`].
pub fn frame_and_bin(
    stream: &TimeTagStream,
    cfg: &FrameConfig,
    duration: f64,
) -> Result<Vec<FrameObservation>> {
    cfg.validate()?;
    let frames = cfg.frame_count(duration);
    let n = cfg.bins_per_frame as u64;
    let width = cfg.bin_width();

    let mut out = Vec::with_capacity(frames);
    let mut current: Vec<u32> = Vec::new();
    let mut current_frame = 0u64;
    for tag in &stream.tags {
        if tag.time < 0.0 {
            continue;
        }
        let global = libm::floor(tag.time / width) as u64;
        let frame = global / n;
        if frame >= frames as u64 {
            break;
        }
        while current_frame < frame {
            out.push(FrameObservation::from_bins(
                current_frame,
                core::mem::take(&mut current),
            ));
            current_frame += 1;
        }
        current.push((global % n) as u32);
    }
    while (current_frame as usize) < frames {
        out.push(FrameObservation::from_bins(
            current_frame,
            core::mem::take(&mut current),
        ));
        current_frame += 1;
    }
    Ok(out)
}

/// Reasons a frame did not survive sifting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DiscardCounts {
    pub alice_empty: u64,
    pub bob_empty: u64,
    pub alice_multi: u64,
    pub bob_multi: u64,
    /// Both parties invalid, whatever the reasons.
    pub both_invalid: u64,
}

impl DiscardCounts {
    pub fn total(&self) -> u64 {
        self.alice_empty + self.bob_empty + self.alice_multi + self.bob_multi + self.both_invalid
    }

    /// Counts with the roles of Alice and Bob exchanged.
    pub fn swapped(&self) -> Self {
        DiscardCounts {
            alice_empty: self.bob_empty,
            bob_empty: self.alice_empty,
            alice_multi: self.bob_multi,
            bob_multi: self.alice_multi,
            both_invalid: self.both_invalid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiftedPair {
    pub frame_index: u64,
    pub alice_bin: u32,
    pub bob_bin: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SiftedPairs {
    /// Sorted by frame index.
    pub pairs: Vec<SiftedPair>,
    pub discards: DiscardCounts,
    pub frames_total: u64,
}

impl SiftedPairs {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Fraction of retained frames whose bins disagree.
    pub fn symbol_error_rate(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let errors = self
            .pairs
            .iter()
            .filter(|p| p.alice_bin != p.bob_bin)
            .count();
        errors as f64 / self.pairs.len() as f64
    }

    /// Splits off the first `count` pairs; discard counters stay with `self`.
    pub fn split_at(&self, count: usize) -> (Vec<SiftedPair>, Vec<SiftedPair>) {
        let count = count.min(self.pairs.len());
        (self.pairs[..count].to_vec(), self.pairs[count..].to_vec())
    }
}

/// Keeps the frames both parties retained, emulating the public
/// frame-validity exchange.
pub fn ppm_sift(alice: &[FrameObservation], bob: &[FrameObservation]) -> Result<SiftedPairs> {
    if alice.len() != bob.len() {
        return Err(Error::Alignment(format!(
            "alice has {} frames, bob has {}",
            alice.len(),
            bob.len()
        )));
    }
    let mut out = SiftedPairs {
        frames_total: alice.len() as u64,
        ..SiftedPairs::default()
    };
    for (a, b) in alice.iter().zip(bob) {
        if a.frame_index != b.frame_index {
            return Err(Error::Alignment(format!(
                "frame {} paired with frame {}",
                a.frame_index, b.frame_index
            )));
        }
        let d = &mut out.discards;
        match (a.verdict, b.verdict) {
            (Verdict::Retained(x), Verdict::Retained(y)) => out.pairs.push(SiftedPair {
                frame_index: a.frame_index,
                alice_bin: x,
                bob_bin: y,
            }),
            (Verdict::Retained(_), Verdict::Empty) => d.bob_empty += 1,
            (Verdict::Retained(_), Verdict::Multi) => d.bob_multi += 1,
            (Verdict::Empty, Verdict::Retained(_)) => d.alice_empty += 1,
            (Verdict::Multi, Verdict::Retained(_)) => d.alice_multi += 1,
            _ => d.both_invalid += 1,
        }
    }
    Ok(out)
}

/// The `log2 n` bits of `bin_index`, most significant first.
pub fn encode_symbol(bin_index: u32, cfg: &FrameConfig) -> Result<Vec<bool>> {
    if bin_index >= cfg.bins_per_frame {
        return Err(Error::OutOfRange {
            what: "bin",
            index: bin_index as usize,
            limit: cfg.bins_per_frame as usize,
        });
    }
    let width = cfg.bits_per_symbol();
    let code = cfg.mapping.code(bin_index);
    Ok((0..width)
        .map(|i| (code >> (width - 1 - i)) & 1 == 1)
        .collect())
}

/// Inverse of [`encode_symbol`].
pub fn decode_symbol(bits: &[bool], mapping: Mapping) -> u32 {
    let code = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
    mapping.index(code)
}

/// Concatenated encodings of Alice's and Bob's retained bins in frame order.
pub fn symbols_to_bitstring(
    pairs: &SiftedPairs,
    cfg: &FrameConfig,
) -> Result<(Vec<bool>, Vec<bool>)> {
    let width = cfg.bits_per_symbol();
    let mut alice = Vec::with_capacity(pairs.len() * width);
    let mut bob = Vec::with_capacity(pairs.len() * width);
    for p in &pairs.pairs {
        alice.extend(encode_symbol(p.alice_bin, cfg)?);
        bob.extend(encode_symbol(p.bob_bin, cfg)?);
    }
    Ok((alice, bob))
}
