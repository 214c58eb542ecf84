mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use timebin_core::binning::{symbols_to_bitstring, FrameConfig, Mapping, SiftedPair, SiftedPairs};
use timebin_core::info::JointHistogram;
use timebin_core::reconcile::*;

fn random_bits(r: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| r.random()).collect()
}

#[test]
fn syndrome_matches_dense_product() {
    let code = make_regular_ldpc(12, 3, 6, 11).unwrap();
    let dense = dense_rows(12, code.checks());
    let mut r = rng(1);
    for _ in 0..200 {
        let x = random_bits(&mut r, 12);
        assert_eq!(
            compute_syndrome(&code, &x).unwrap().bits,
            gf2_matvec(&dense, &x)
        );
    }
}

#[test]
fn single_check_example() {
    let code = LinearCode::new(3, vec![vec![0, 1, 2]]).unwrap();
    assert_eq!(
        compute_syndrome(&code, &[true, false, true]).unwrap().bits,
        vec![false]
    );
}

proptest! {
    #[test]
    fn syndrome_is_linear(seed in 0u64..1000, xs in proptest::collection::vec(any::<(bool, bool)>(), 60)) {
        let code = make_regular_ldpc(60, 3, 6, seed).unwrap();
        let x: Vec<bool> = xs.iter().map(|p| p.0).collect();
        let y: Vec<bool> = xs.iter().map(|p| p.1).collect();
        let xy: Vec<bool> = xs.iter().map(|p| p.0 ^ p.1).collect();
        let sx = compute_syndrome(&code, &x).unwrap().bits;
        let sy = compute_syndrome(&code, &y).unwrap().bits;
        let sxy = compute_syndrome(&code, &xy).unwrap().bits;
        let sum: Vec<bool> = sx.iter().zip(&sy).map(|(a, b)| a ^ b).collect();
        prop_assert_eq!(sxy, sum);
    }

    #[test]
    fn regular_construction_is_regular(seed in 0u64..200, k in 1usize..20) {
        let n = 12 * k;
        let code = make_regular_ldpc(n, 3, 6, seed).unwrap();
        prop_assert!(code.var_checks().iter().all(|c| c.len() == 3));
        prop_assert!(code.checks().iter().all(|r| r.len() == 6));
        prop_assert_eq!(code.count_four_cycles(), four_cycles_dense(&dense_rows(n, code.checks())));
    }
}

#[test]
fn resampling_does_not_add_four_cycles() {
    let report = make_regular_ldpc_report(1024, 3, 6, 42).unwrap();
    let dense = dense_rows(1024, report.code.checks());
    let counted = four_cycles_dense(&dense);
    assert_eq!(counted, report.four_cycles);
    assert!(report.four_cycles <= report.raw_four_cycles);
    println!(
        "4-cycles: raw {} -> {}",
        report.raw_four_cycles, report.four_cycles
    );
}

#[test]
fn ldpc_is_deterministic() {
    assert_eq!(
        make_regular_ldpc(1024, 3, 6, 9).unwrap(),
        make_regular_ldpc(1024, 3, 6, 9).unwrap()
    );
    assert_ne!(
        make_regular_ldpc(1024, 3, 6, 9).unwrap(),
        make_regular_ldpc(1024, 3, 6, 10).unwrap()
    );
}

#[test]
fn one_flip_matches_exhaustive_ml() {
    let code = make_regular_ldpc(12, 3, 6, 3).unwrap();
    let dense = dense_rows(12, code.checks());
    let mut r = rng(5);
    let mut checked = 0;
    for _ in 0..100 {
        let x = random_bits(&mut r, 12);
        let flip = r.random_range(0..12);
        let llrs: Vec<f64> = (0..12)
            .map(|i| {
                let bob = x[i] ^ (i == flip);
                let mag = if i == flip { 1.0 } else { 6.0 };
                if bob {
                    -mag
                } else {
                    mag
                }
            })
            .collect();
        let s = compute_syndrome(&code, &x).unwrap();
        let (ml, unique) = ml_in_coset(&dense, &s.bits, &llrs).unwrap();
        assert_eq!(ml, x);
        if unique {
            checked += 1;
            let res = bp_decode_syndrome(&code, &s, &llrs, &DecoderSettings::default()).unwrap();
            assert!(res.converged);
            assert_eq!(res.decoded, x);
        }
    }
    assert!(checked > 50);
}

#[test]
fn bsc_two_percent_frame_error_rate() {
    let n = 10_000;
    let code = make_regular_ldpc(n, 3, 6, 77).unwrap();
    let p: f64 = 0.02;
    let l = ((1.0 - p) / p).ln();
    let mut r = rng(8);
    let mut failures = 0;
    for _ in 0..100 {
        let x = random_bits(&mut r, n);
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| {
                let y = b ^ (r.random::<f64>() < p);
                if y {
                    -l
                } else {
                    l
                }
            })
            .collect();
        let s = compute_syndrome(&code, &x).unwrap();
        let res = bp_decode_syndrome(&code, &s, &llrs, &DecoderSettings::default()).unwrap();
        if !(res.converged && res.decoded == x) {
            failures += 1;
        }
    }
    assert!(failures < 1, "frame errors {failures}/100");
}

/// Fig. 4 retained frames: Alice (0, 1, 1), Bob (0, 2, 3), three-bit codes per layer.
#[test]
fn fig4_scale_multilevel_matches_exhaustive() {
    let cfg = FrameConfig::new(1.0, 4, Mapping::Gray).unwrap();
    let pairs = SiftedPairs {
        pairs: [(0, 0), (1, 2), (1, 3)]
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| SiftedPair {
                frame_index: i as u64,
                alice_bin: a,
                bob_bin: b,
            })
            .collect(),
        ..Default::default()
    };
    let (alice, _) = symbols_to_bitstring(&pairs, &cfg).unwrap();
    let bob: Vec<u32> = pairs.pairs.iter().map(|p| p.bob_bin).collect();
    // Training model: mass falls off with bin distance.
    let counts: Vec<u64> = (0..16)
        .map(|i| [70, 12, 3, 1][(i / 4usize).abs_diff(i % 4)])
        .collect();
    let model = ChannelModel::from_histogram(
        &JointHistogram::from_counts(4, counts).unwrap(),
        SMOOTHING_ALPHA,
    )
    .unwrap();
    let codes = vec![
        LinearCode::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap(),
        LinearCode::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap(),
    ];
    let res = reconcile_multilevel(
        &alice,
        &bob,
        &codes,
        &model,
        &cfg,
        &DecoderSettings::default(),
    )
    .unwrap();

    // Replay layer by layer with the exhaustive oracle.
    let mut prior: Vec<Vec<bool>> = Vec::new();
    for (layer, code) in codes.iter().enumerate() {
        let x: Vec<bool> = (0..3).map(|f| alice[f * 2 + layer]).collect();
        let s = compute_syndrome(code, &x).unwrap();
        let llrs = channel_llrs(&bob, layer, &prior, &model, &cfg).unwrap();
        let dense = dense_rows(3, code.checks());
        let (ml, unique) = ml_in_coset(&dense, &s.bits, &llrs).unwrap();
        let decoded: Vec<bool> = (0..3).map(|f| res.decoded[f * 2 + layer]).collect();
        assert!(unique, "layer {layer}");
        assert_eq!(decoded, ml, "layer {layer}");
        prior.push(decoded);
    }
    assert!(res.converged);
    assert_eq!(res.verified, res.decoded == alice);
    assert_eq!(res.leaked_bits, 2 + 2 + TAG_BITS);
}

#[test]
fn converged_results_lie_in_coset() {
    let code = make_regular_ldpc(60, 3, 6, 4).unwrap();
    let mut r = rng(12);
    for _ in 0..200 {
        let x = random_bits(&mut r, 60);
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| {
                let y = b ^ (r.random::<f64>() < 0.1);
                let m = r.random_range(0.5..3.0);
                if y {
                    -m
                } else {
                    m
                }
            })
            .collect();
        let s = compute_syndrome(&code, &x).unwrap();
        let res = bp_decode_syndrome(
            &code,
            &s,
            &llrs,
            &DecoderSettings {
                max_iters: 30,
                damping: 0.8,
            },
        )
        .unwrap();
        if res.converged {
            assert_eq!(compute_syndrome(&code, &res.decoded).unwrap().bits, s.bits);
        }
        let again = bp_decode_syndrome(
            &code,
            &s,
            &llrs,
            &DecoderSettings {
                max_iters: 30,
                damping: 0.8,
            },
        )
        .unwrap();
        assert_eq!(again, res);
    }
}

#[test]
fn bp_agrees_with_ml_on_soft_awgn_instances() {
    let code = make_regular_ldpc(12, 3, 6, 2024).unwrap();
    let dense = dense_rows(12, code.checks());
    let sigma = 0.5;
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut r = rng(99);
    let (mut unique, mut agree) = (0, 0);
    for _ in 0..300 {
        let x = random_bits(&mut r, 12);
        let llrs: Vec<f64> = x
            .iter()
            .map(|&b| 2.0 * ((if b { -1.0 } else { 1.0 }) + noise.sample(&mut r)) / (sigma * sigma))
            .collect();
        let s = compute_syndrome(&code, &x).unwrap();
        let (ml, u) = ml_in_coset(&dense, &s.bits, &llrs).unwrap();
        let res = bp_decode_syndrome(&code, &s, &llrs, &DecoderSettings::default()).unwrap();
        if res.converged {
            assert_eq!(compute_syndrome(&code, &res.decoded).unwrap().bits, s.bits);
        }
        if u {
            unique += 1;
            agree += (res.decoded == ml) as usize;
        }
    }
    assert!(agree as f64 >= 0.95 * unique as f64, "{agree}/{unique}");
}
