//! Entangled-pair emission and single-photon detector models.
//!
//! Emissions form a homogeneous Poisson process. Each party's detector then
//! applies, in order: loss, Gaussian timing jitter, dark counts, optional
//! 50:50 beam-splitter routing onto two detectors, and non-paralyzable dead
//! time per detector.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{invalid, Result};
use crate::rng::{derive_seed, substream};

/// Parameters of the pair source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Mean pair emission rate in pairs per second.
    pub pair_rate: f64,
    /// Pump coherence time in seconds.
    pub coherence_time: f64,
    /// Simulated wall time in seconds. Zero is accepted and yields no events.
    pub duration: f64,
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate.is_finite() && self.pair_rate > 0.0) {
            return Err(invalid("pair_rate", "must be finite and > 0"));
        }
        if !(self.coherence_time.is_finite() && self.coherence_time > 0.0) {
            return Err(invalid("coherence_time", "must be finite and > 0"));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(invalid("duration", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Parameters of one party's detection chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Standard deviation of the Gaussian timing error, seconds.
    pub jitter_sigma: f64,
    /// Dead time after an accepted detection, seconds. May be `f64::INFINITY`.
    pub dead_time: f64,
    /// Dark count rate, events per second.
    pub dark_rate: f64,
    /// Detection efficiency in `[0, 1]`.
    pub efficiency: f64,
    /// 1, or 2 for beam-splitter mode.
    pub num_detectors: u8,
}

impl DetectorParams {
    /// A lossless, noiseless detector with no dead time.
    pub const IDEAL: DetectorParams = DetectorParams {
        jitter_sigma: 0.0,
        dead_time: 0.0,
        dark_rate: 0.0,
        efficiency: 1.0,
        num_detectors: 1,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(invalid("jitter_sigma", "must be finite and >= 0"));
        }
        if self.dead_time.is_nan() || self.dead_time < 0.0 {
            return Err(invalid("dead_time", "must be >= 0"));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(invalid("dark_rate", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(invalid("efficiency", "must lie in [0, 1]"));
        }
        if !matches!(self.num_detectors, 1 | 2) {
            return Err(invalid("num_detectors", "must be 1 or 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Alice,
    Bob,
}

/// Ground-truth origin of a tag. Only diagnostics and tests look at it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Signal,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeTag {
    pub time: f64,
    pub origin: Origin,
    pub detector: u8,
}

/// Time-ordered detector output of one party.
///
/// Tags from both detectors are merged into a single sorted stream; within
/// each `detector` id, consecutive timestamps are separated by more than the
/// dead time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    pub party: Party,
    pub tags: Vec<TimeTag>,
}

impl TimeTagStream {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.tags.iter().map(|t| t.time)
    }

    pub fn count_origin(&self, origin: Origin) -> usize {
        self.tags.iter().filter(|t| t.origin == origin).count()
    }
}

// Sub-stream labels used by `detect`.
const STREAM_LOSS: u64 = 0;
const STREAM_JITTER: u64 = 1;
const STREAM_DARK: u64 = 2;
const STREAM_ROUTE_SIGNAL: u64 = 3;
const STREAM_ROUTE_DARK: u64 = 4;

/// Samples sorted pair emission times in `[0, duration)` with i.i.d.
/// exponential gaps of mean `1 / pair_rate`.
pub fn generate_pair_arrivals(src: &SourceParams, seed: u64) -> Result<Vec<f64>> {
    src.validate()?;
    Ok(poisson_process(src.pair_rate, src.duration, seed, 0))
}

fn poisson_process(rate: f64, duration: f64, seed: u64, stream: u64) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 || duration <= 0.0 {
        return out;
    }
    let gaps = Exp::new(rate).expect("rate validated positive");
    let mut rng = substream(seed, stream);
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t >= duration {
            break;
        }
        out.push(t);
    }
    out
}

/// Applies one party's detection chain to sorted emission times.
///
/// `window` is the observation interval `[0, window)`: dark counts are drawn
/// over it and jittered tags falling outside it are dropped.
pub fn detect(
    emissions: &[f64],
    det: &DetectorParams,
    window: f64,
    party: Party,
    seed: u64,
) -> Result<TimeTagStream> {
    det.validate()?;
    if !(window.is_finite() && window >= 0.0) {
        return Err(invalid("window", "must be finite and >= 0"));
    }

    let mut loss = substream(seed, STREAM_LOSS);
    let mut jitter_rng = substream(seed, STREAM_JITTER);
    let mut route_signal = substream(seed, STREAM_ROUTE_SIGNAL);
    let jitter = Normal::new(0.0, det.jitter_sigma).expect("sigma validated");
    let two = det.num_detectors == 2;

    let mut tags = Vec::with_capacity(emissions.len());
    // One draw per emission on every stream keeps the streams aligned with
    // the emission index whatever the other parameters are.
    for &t in emissions {
        let keep = loss.random::<f64>() < det.efficiency;
        let shift = if det.jitter_sigma > 0.0 {
            jitter.sample(&mut jitter_rng)
        } else {
            0.0
        };
        let detector = if two {
            route_signal.random::<bool>() as u8
        } else {
            0
        };
        if !keep {
            continue;
        }
        let time = t + shift;
        if time < 0.0 || time >= window {
            continue;
        }
        tags.push(TimeTag {
            time,
            origin: Origin::Signal,
            detector,
        });
    }

    let mut route_dark = substream(seed, STREAM_ROUTE_DARK);
    for time in poisson_process(det.dark_rate, window, seed, STREAM_DARK) {
        let detector = if two {
            route_dark.random::<bool>() as u8
        } else {
            0
        };
        tags.push(TimeTag {
            time,
            origin: Origin::Dark,
            detector,
        });
    }

    tags.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut last: [Option<f64>; 2] = [None, None];
    tags.retain(|tag| {
        let slot = &mut last[tag.detector as usize];
        match *slot {
            Some(prev) if tag.time - prev <= det.dead_time => false,
            _ => {
                *slot = Some(tag.time);
                true
            }
        }
    });

    Ok(TimeTagStream { party, tags })
}

/// Generates one shared emission sequence and detects it independently at
/// Alice and Bob.
pub fn run_two_party(
    src: &SourceParams,
    det_alice: &DetectorParams,
    det_bob: &DetectorParams,
    seed: u64,
) -> Result<(TimeTagStream, TimeTagStream)> {
    let (alice, bob, _) = run_two_party_counted(src, det_alice, det_bob, seed)?;
    Ok((alice, bob))
}

/// Like [`run_two_party`] but also returns the number of emitted pairs.
pub fn run_two_party_counted(
    src: &SourceParams,
    det_alice: &DetectorParams,
    det_bob: &DetectorParams,
    seed: u64,
) -> Result<(TimeTagStream, TimeTagStream, usize)> {
    let emissions = generate_pair_arrivals(src, derive_seed(seed, 0))?;
    let alice = detect(
        &emissions,
        det_alice,
        src.duration,
        Party::Alice,
        derive_seed(seed, 1),
    )?;
    let bob = detect(
        &emissions,
        det_bob,
        src.duration,
        Party::Bob,
        derive_seed(seed, 2),
    )?;
    Ok((alice, bob, emissions.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(rate: f64, duration: f64) -> SourceParams {
        SourceParams {
            pair_rate: rate,
            coherence_time: 1e-6,
            duration,
        }
    }

    #[test]
    fn zero_duration_is_empty() {
        assert!(generate_pair_arrivals(&src(1e6, 0.0), 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_pair_arrivals(&src(0.0, 1.0), 1).is_err());
        let mut det = DetectorParams::IDEAL;
        det.efficiency = 1.5;
        assert!(detect(&[], &det, 1.0, Party::Alice, 0).is_err());
        det.efficiency = 1.0;
        det.num_detectors = 3;
        assert!(detect(&[], &det, 1.0, Party::Alice, 0).is_err());
    }

    #[test]
    fn arrivals_sorted_in_window() {
        let t = generate_pair_arrivals(&src(1e4, 0.5), 3).unwrap();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t.iter().all(|&x| (0.0..0.5).contains(&x)));
    }

    #[test]
    fn ideal_detector_is_identity() {
        let e = generate_pair_arrivals(&src(1e5, 0.01), 9).unwrap();
        let s = detect(&e, &DetectorParams::IDEAL, 0.01, Party::Bob, 4).unwrap();
        let times: Vec<f64> = s.times().collect();
        assert_eq!(times, e);
    }

    #[test]
    fn infinite_dead_time_keeps_one_tag() {
        let e = generate_pair_arrivals(&src(1e5, 0.01), 9).unwrap();
        let mut det = DetectorParams::IDEAL;
        det.dead_time = f64::INFINITY;
        let s = detect(&e, &det, 0.01, Party::Alice, 4).unwrap();
        assert_eq!(s.len(), 1);
        det.dead_time = 0.01;
        assert_eq!(detect(&e, &det, 0.01, Party::Alice, 4).unwrap().len(), 1);
    }

    #[test]
    fn beam_splitter_dead_time_per_detector() {
        let e = generate_pair_arrivals(&src(1e6, 0.01), 2).unwrap();
        let det = DetectorParams {
            dead_time: 5e-6,
            num_detectors: 2,
            ..DetectorParams::IDEAL
        };
        let s = detect(&e, &det, 0.01, Party::Alice, 8).unwrap();
        for id in 0..2u8 {
            let times: Vec<f64> = s
                .tags
                .iter()
                .filter(|t| t.detector == id)
                .map(|t| t.time)
                .collect();
            assert!(times.len() > 100);
            assert!(times.windows(2).all(|w| w[1] - w[0] > 5e-6));
        }
        // Two detectors recover more than one would.
        let single = detect(
            &e,
            &DetectorParams {
                num_detectors: 1,
                ..det
            },
            0.01,
            Party::Alice,
            8,
        )
        .unwrap();
        assert!(s.len() > single.len());
    }

    #[test]
    fn dead_efficiency_leaves_only_dark() {
        let s = src(1e5, 0.1);
        let bob = DetectorParams {
            efficiency: 0.0,
            dark_rate: 1e3,
            ..DetectorParams::IDEAL
        };
        let (a, b) = run_two_party(&s, &DetectorParams::IDEAL, &bob, 5).unwrap();
        assert!(!a.is_empty());
        assert!(!b.is_empty());
        assert_eq!(b.count_origin(Origin::Signal), 0);
    }
}
