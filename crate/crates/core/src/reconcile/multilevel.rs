use alloc::vec::Vec;

use super::bp::{bp_decode_syndrome, DecoderSettings, ReconciliationResult};
use super::code::{compute_syndrome, LinearCode};
use super::llr::{channel_llrs, ChannelModel};
use super::tag::{verification_tag, TAG_BITS};
use crate::binning::FrameConfig;
use crate::error::{invalid, Error, Result};

/// Per-layer outcome of a multilevel reconciliation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub layer: usize,
    pub design_rate: f64,
    pub syndrome_bits: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Reconciles Alice's symbol bits layer by layer, most significant first.
///
/// `alice_bits` is the frame-ordered concatenation of `log2 n`-bit symbols
/// (as produced by `symbols_to_bitstring`); `bob_bins` holds Bob's bin for
/// the same frames. `codes[l]` protects layer `l` and must have one bit per
/// frame. Every layer is attempted even if an earlier one fails, using the
/// best available estimate as conditioning. A 64-bit tag of the decoded
/// string is compared with Alice's to set `verified`.
pub fn reconcile_multilevel(
    alice_bits: &[bool],
    bob_bins: &[u32],
    codes: &[LinearCode],
    model: &ChannelModel,
    cfg: &FrameConfig,
    settings: &DecoderSettings,
) -> Result<ReconciliationResult> {
    let width = cfg.bits_per_symbol();
    let frames = bob_bins.len();
    if alice_bits.len() != frames * width {
        return Err(Error::LengthMismatch {
            what: "alice bits",
            expected: frames * width,
            actual: alice_bits.len(),
        });
    }
    if codes.len() != width {
        return Err(Error::LengthMismatch {
            what: "layer codes",
            expected: width,
            actual: codes.len(),
        });
    }
    if let Some((l, c)) = codes.iter().enumerate().find(|(_, c)| c.n() != frames) {
        return Err(invalid(
            "codes",
            alloc::format!("layer {l} code has length {}, expected {frames}", c.n()),
        ));
    }

    let mut decoded_layers: Vec<Vec<bool>> = Vec::with_capacity(width);
    let mut layers = Vec::with_capacity(width);
    let mut leaked = 0;
    let mut iterations = 0;
    let mut converged = true;
    for (layer, code) in codes.iter().enumerate() {
        // Alice's side: publish the syndrome of her layer bits.
        let alice_layer: Vec<bool> = (0..frames).map(|f| alice_bits[f * width + layer]).collect();
        let syndrome = compute_syndrome(code, &alice_layer)?;

        // Bob's side.
        let llrs = channel_llrs(bob_bins, layer, &decoded_layers, model, cfg)?;
        let r = bp_decode_syndrome(code, &syndrome, &llrs, settings)?;
        leaked += r.leaked_bits;
        iterations += r.iterations_used;
        converged &= r.converged;
        layers.push(LayerReport {
            layer,
            design_rate: code.design_rate(),
            syndrome_bits: code.m(),
            converged: r.converged,
            iterations: r.iterations_used,
        });
        decoded_layers.push(r.decoded);
    }

    let mut decoded = Vec::with_capacity(alice_bits.len());
    for f in 0..frames {
        decoded.extend(decoded_layers.iter().map(|bits| bits[f]));
    }
    let verified = verification_tag(alice_bits) == verification_tag(&decoded);
    Ok(ReconciliationResult {
        decoded,
        converged,
        iterations_used: iterations,
        leaked_bits: leaked + TAG_BITS,
        verified,
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{symbols_to_bitstring, Mapping, SiftedPair, SiftedPairs};
    use crate::info::joint_histogram;
    use crate::reconcile::{make_regular_ldpc, SMOOTHING_ALPHA};

    #[test]
    fn noiseless_layers_need_no_iterations() {
        let cfg = FrameConfig::new(1.0, 8, Mapping::Gray).unwrap();
        let frames = 120;
        let pairs = SiftedPairs {
            pairs: (0..frames)
                .map(|i| SiftedPair {
                    frame_index: i as u64,
                    alice_bin: (i * 5 % 8) as u32,
                    bob_bin: (i * 5 % 8) as u32,
                })
                .collect(),
            ..Default::default()
        };
        let (alice, _) = symbols_to_bitstring(&pairs, &cfg).unwrap();
        let bob: Vec<u32> = pairs.pairs.iter().map(|p| p.bob_bin).collect();
        let h = joint_histogram(&pairs.pairs, 8).unwrap();
        let model = ChannelModel::from_histogram(&h, SMOOTHING_ALPHA).unwrap();
        let codes: Vec<_> = (0..3)
            .map(|l| make_regular_ldpc(frames, 3, 6, l).unwrap())
            .collect();
        let r = reconcile_multilevel(
            &alice,
            &bob,
            &codes,
            &model,
            &cfg,
            &DecoderSettings::default(),
        )
        .unwrap();
        assert!(r.converged && r.verified);
        assert_eq!(r.iterations_used, 0);
        assert_eq!(r.decoded, alice);
        assert_eq!(r.leaked_bits, 3 * 60 + 64);
    }

    #[test]
    fn shape_errors() {
        let cfg = FrameConfig::new(1.0, 4, Mapping::Gray).unwrap();
        let model =
            ChannelModel::from_histogram(&crate::info::JointHistogram::new(4), 0.5).unwrap();
        let code = LinearCode::identity(2);
        let s = DecoderSettings::default();
        assert!(reconcile_multilevel(
            &[false; 3],
            &[0, 1],
            &[code.clone(), code.clone()],
            &model,
            &cfg,
            &s
        )
        .is_err());
        assert!(reconcile_multilevel(
            &[false; 4],
            &[0, 1],
            std::slice::from_ref(&code),
            &model,
            &cfg,
            &s
        )
        .is_err());
        let short = LinearCode::identity(1);
        assert!(
            reconcile_multilevel(&[false; 4], &[0, 1], &[code, short], &model, &cfg, &s).is_err()
        );
    }
}
