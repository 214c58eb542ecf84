//! The full Alice/Bob run: photons to final key.

use timebin_core::binning::{
    frame_and_bin, ppm_sift, symbols_to_bitstring, DiscardCounts, FrameConfig, SiftedPairs,
};
use timebin_core::bits::hamming_distance;
use timebin_core::info::{
    binary_entropy, build_downtime_chain, joint_histogram, mutual_information_with_stderr,
    JointHistogram, MAX_CHAIN_BINS, MAX_DOWNTIME_BINS,
};
use timebin_core::privacy::{key_length_budget, toeplitz_hash, toeplitz_seed, AmplificationBudget};
use timebin_core::reconcile::{
    code_for_rate, layer_conditional_entropies, reconcile_multilevel, select_rate, ChannelModel,
    EFFICIENCY_MARGIN, RATE_LADDER, SMOOTHING_ALPHA,
};
use timebin_core::rng::derive_seed;
use timebin_core::source::{run_two_party_counted, Origin, TimeTagStream};

use crate::config::ExperimentConfig;
use crate::error::{AppError, AppResult};

const CODE_SEED_LABEL: u64 = 100;
const TOEPLITZ_SEED_LABEL: u64 = 200;

/// Payload lengths are cut to a multiple of this so every ladder code exists.
pub const BLOCK_QUANTUM: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconciliationSummary {
    /// Design rate per layer, most significant first.
    pub layer_rates: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Syndrome and tag bits.
    pub leaked_bits: usize,
    pub residual_bit_errors: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub bins_per_frame: u32,
    pub emitted_pairs: u64,
    pub detected_alice: u64,
    pub detected_bob: u64,
    pub frames_total: u64,
    pub frames_retained: u64,
    pub discards: DiscardCounts,
    pub training_frames: u64,
    pub payload_frames: u64,
    /// `frames_retained * log2 n`.
    pub raw_bits: u64,
    pub symbol_error_rate: f64,
    pub mi_estimate: f64,
    pub mi_stderr: f64,
    /// Detector-memory chain entropy rate, bits per frame, when Alice's
    /// detector has dead time and `n <= 16`.
    pub entropy_rate: Option<f64>,
    /// Entropy rate of the same bins without dead time.
    pub memoryless_rate: Option<f64>,
    pub entropy_per_bit: f64,
    pub reconciliation: Option<ReconciliationSummary>,
    /// `log2 n` bits for every training frame disclosed.
    pub training_leaked_bits: usize,
    pub reconciled_bits: usize,
    pub final_key_bits: usize,
    pub keys_match: bool,
    pub bits_per_photon_emitted: f64,
    pub bits_per_photon_detected: f64,
    pub bits_per_photon_retained: f64,
    /// Final key bits per simulated second.
    pub bits_per_second: f64,
}

impl RunReport {
    pub fn verified(&self) -> bool {
        self.reconciliation.as_ref().is_some_and(|r| r.verified)
    }

    pub fn leaked_bits_total(&self) -> usize {
        self.training_leaked_bits + self.reconciliation.as_ref().map_or(0, |r| r.leaked_bits)
    }
}

/// A report together with the data it was computed from.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: RunReport,
    pub sifted: SiftedPairs,
    /// Joint histogram of every sifted pair.
    pub histogram: JointHistogram,
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
    /// Raw detector streams, kept when the config asks for tag export.
    pub tags: Option<(TimeTagStream, TimeTagStream)>,
}

/// Per-bin downtime description of Alice's detector, if it has dead time.
fn downtime_model(cfg: &ExperimentConfig, frame: &FrameConfig) -> AppResult<Option<(u32, f64)>> {
    let det = &cfg.detector_alice;
    if det.dead_time <= 0.0 || frame.bins_per_frame > MAX_CHAIN_BINS {
        return Ok(None);
    }
    let width = frame.bin_width();
    let bins = (det.dead_time / width).ceil();
    if bins > MAX_DOWNTIME_BINS as f64 {
        return Err(AppError::Parameter(format!(
            "detector_alice.dead_time spans {bins} bins, more than {MAX_DOWNTIME_BINS}"
        )));
    }
    let rate = cfg.source.pair_rate * det.efficiency + det.dark_rate;
    let p = (1.0 - (-rate * width).exp()).clamp(1e-12, 1.0 - 1e-12);
    Ok(Some((bins as u32, p)))
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> AppResult<Run> {
    cfg.validate()?;
    let frame = cfg.frame_config()?;
    let n = frame.bins_per_frame;
    let width = frame.bits_per_symbol();
    let duration = cfg.source.duration;

    let (ta, tb, emitted) = run_two_party_counted(
        &cfg.source_params(),
        &cfg.detector_alice.params(),
        &cfg.detector_bob.params(),
        cfg.seed,
    )
    .map_err(|e| AppError::stage("source", e))?;
    let fa = frame_and_bin(&ta, &frame, duration).map_err(|e| AppError::stage("binning", e))?;
    let fb = frame_and_bin(&tb, &frame, duration).map_err(|e| AppError::stage("binning", e))?;
    let sifted = ppm_sift(&fa, &fb).map_err(|e| AppError::stage("sifting", e))?;
    let histogram =
        joint_histogram(&sifted.pairs, n).map_err(|e| AppError::stage("histogram", e))?;
    let (mi_estimate, mi_stderr) = if sifted.is_empty() {
        (0.0, 0.0)
    } else {
        mutual_information_with_stderr(&histogram).map_err(|e| AppError::stage("histogram", e))?
    };

    let (entropy_rate, memoryless_rate, entropy_per_bit) = match downtime_model(cfg, &frame)? {
        Some((d, p)) => {
            let chain =
                build_downtime_chain(n, d, p).map_err(|e| AppError::stage("downtime chain", e))?;
            let rate = timebin_core::info::entropy_rate(&chain)
                .map_err(|e| AppError::stage("downtime chain", e))?;
            let memoryless = n as f64 * binary_entropy(p);
            (
                Some(rate),
                Some(memoryless),
                (rate / memoryless).clamp(0.0, 1.0),
            )
        }
        None => (None, None, 1.0),
    };

    let retained = sifted.len();
    let training = ((retained as f64) * cfg.codes.training_fraction).floor() as usize;
    let (train_pairs, rest) = sifted.split_at(training);
    let payload_len = rest.len() / BLOCK_QUANTUM * BLOCK_QUANTUM;
    let training_leaked_bits = training * width;

    let mut report = RunReport {
        seed: cfg.seed,
        bins_per_frame: n,
        emitted_pairs: emitted as u64,
        detected_alice: ta.count_origin(Origin::Signal) as u64,
        detected_bob: tb.count_origin(Origin::Signal) as u64,
        frames_total: sifted.frames_total,
        frames_retained: retained as u64,
        discards: sifted.discards,
        training_frames: training as u64,
        payload_frames: payload_len as u64,
        raw_bits: (retained * width) as u64,
        symbol_error_rate: sifted.symbol_error_rate(),
        mi_estimate,
        mi_stderr,
        entropy_rate,
        memoryless_rate,
        entropy_per_bit,
        reconciliation: None,
        training_leaked_bits,
        reconciled_bits: 0,
        final_key_bits: 0,
        keys_match: false,
        bits_per_photon_emitted: 0.0,
        bits_per_photon_detected: 0.0,
        bits_per_photon_retained: 0.0,
        bits_per_second: 0.0,
    };
    let mut alice_key = Vec::new();
    let mut bob_key = Vec::new();

    if payload_len > 0 && training > 0 {
        let train_hist =
            joint_histogram(&train_pairs, n).map_err(|e| AppError::stage("training", e))?;
        let model = ChannelModel::from_histogram(&train_hist, SMOOTHING_ALPHA)
            .map_err(|e| AppError::stage("training", e))?;
        let rates = if cfg.codes.rates.is_empty() {
            layer_conditional_entropies(&model, &frame)
                .map_err(|e| AppError::stage("rate selection", e))?
                .into_iter()
                .map(|h| select_rate(h, EFFICIENCY_MARGIN, &RATE_LADDER))
                .collect()
        } else {
            cfg.codes.rates.clone()
        };
        let codes = rates
            .iter()
            .enumerate()
            .map(|(layer, &r)| {
                code_for_rate(
                    r,
                    payload_len,
                    derive_seed(cfg.seed, CODE_SEED_LABEL + layer as u64),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| AppError::stage("code construction", e))?;

        let payload = SiftedPairs {
            pairs: rest[..payload_len].to_vec(),
            ..Default::default()
        };
        let (alice_bits, _) =
            symbols_to_bitstring(&payload, &frame).map_err(|e| AppError::stage("encoding", e))?;
        let bob_bins: Vec<u32> = payload.pairs.iter().map(|p| p.bob_bin).collect();
        let r = reconcile_multilevel(
            &alice_bits,
            &bob_bins,
            &codes,
            &model,
            &frame,
            &cfg.decoder_settings(),
        )
        .map_err(|e| AppError::stage("reconciliation", e))?;
        let residual = hamming_distance(&alice_bits, &r.decoded);
        report.reconciled_bits = alice_bits.len();
        report.reconciliation = Some(ReconciliationSummary {
            layer_rates: rates,
            converged: r.converged,
            iterations: r.iterations_used,
            leaked_bits: r.leaked_bits,
            residual_bit_errors: residual,
            verified: r.verified,
        });

        if r.verified {
            let budget = AmplificationBudget {
                reconciled_length: alice_bits.len(),
                entropy_per_bit,
                leaked_bits: r.leaked_bits + training_leaked_bits,
                security_margin: cfg.privacy.security_margin,
            };
            let out = key_length_budget(&budget).map_err(|e| AppError::stage("privacy", e))?;
            if out > 0 {
                let seed_bits = toeplitz_seed(
                    alice_bits.len() + out - 1,
                    derive_seed(cfg.seed, TOEPLITZ_SEED_LABEL),
                );
                alice_key = toeplitz_hash(&alice_bits, &seed_bits, out)
                    .map_err(|e| AppError::stage("privacy", e))?;
                bob_key = toeplitz_hash(&r.decoded, &seed_bits, out)
                    .map_err(|e| AppError::stage("privacy", e))?;
            }
        }
    }

    let final_bits = alice_key.len();
    let ratio = |den: u64| {
        if den == 0 {
            0.0
        } else {
            final_bits as f64 / den as f64
        }
    };
    report.final_key_bits = final_bits;
    report.keys_match = final_bits > 0 && alice_key == bob_key;
    report.bits_per_photon_emitted = ratio(report.emitted_pairs);
    report.bits_per_photon_detected = ratio(report.detected_alice);
    report.bits_per_photon_retained = ratio(report.frames_retained);
    report.bits_per_second = if duration > 0.0 {
        final_bits as f64 / duration
    } else {
        0.0
    };

    let tags = cfg.output.export_tags.then_some((ta, tb));
    Ok(Run {
        report,
        sifted,
        histogram,
        alice_key,
        bob_key,
        tags,
    })
}
