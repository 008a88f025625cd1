use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use iasim_core::exit::{
    build_jtable, decoder_curve, gen_apriori, mi_grid, mutual_information, trajectory, TransferCurve, JTABLE_NODES,
    JTABLE_POINTS,
};
use iasim_core::modem::ChannelInterleaver;
use iasim_core::receiver::Link;
use iasim_core::{LlrBlock, Modulation, ReceiverKind, RngStream, Role, Scenario, Side, Signal, TurboCode, LLR_CLAMP};

// J(σ) by adaptive quadrature of the consistent Gaussian density, computed
// offline.
const FROZEN_J: [(f64, f64); 5] = [
    (0.5, 0.0437299629),
    (1.0, 0.1607472198),
    (2.0, 0.4859441541),
    (3.0, 0.7599790078),
    (5.0, 0.9751790043),
];

#[test]
fn jtable_matches_frozen_quadrature() {
    let t = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    for (sigma, j) in FROZEN_J {
        assert_abs_diff_eq!(t.j(sigma), j, epsilon = 1e-5);
        assert_abs_diff_eq!(t.j_inv(j).unwrap(), sigma, epsilon = 1e-3);
    }
}

#[test]
fn decoder_curve_ends() {
    let t = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    let code = TurboCode::new(400, 0.5).unwrap();
    let curve = decoder_curve(&code, &[0.0, 1.0], 20_000, 4, &t, 3).unwrap();
    assert_abs_diff_eq!(curve.points[0].1, 0.0, epsilon = 1e-9);
    assert!(curve.points[1].1 > 0.999, "{:?}", curve.points);
}

#[test]
fn decoder_curve_is_monotone_for_each_rate() {
    let t = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    let grid = mi_grid(6);
    for rate in [0.33, 0.5, 0.75, 0.83] {
        let code = TurboCode::new(400, rate).unwrap();
        let curve = decoder_curve(&code, &grid, 40_000, 4, &t, 9).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].1 + 0.01 >= w[0].1, "rate {rate}: {:?}", curve.points);
        }
    }
}

#[test]
fn trajectory_respects_iteration_cap() {
    let det = TransferCurve {
        label: "det".into(),
        points: vec![(0.0, 0.3), (1.0, 0.9)],
    };
    let dec = TransferCurve {
        label: "dec".into(),
        points: vec![(0.0, 0.0), (0.3, 0.5), (0.9, 1.0), (1.0, 1.0)],
    };
    let one = trajectory(&det, &dec, 1).unwrap();
    assert_eq!(one.iterations, 1);
    assert!(!one.converged);
    let many = trajectory(&det, &dec, 10).unwrap();
    assert!(many.converged);
    assert!(many.iterations > 1 && many.iterations <= 10);
}

#[test]
fn noiseless_interference_free_packets_decode() {
    for receiver in ReceiverKind::ALL {
        let scenario = Scenario {
            desired: iasim_core::channel::SignalConfig {
                modulation: Modulation::Qam16,
                rate: 0.75,
            },
            sir_db: 60.0,
            noiseless: true,
            ..Scenario::for_receiver(receiver)
        };
        let link = Link::new(&scenario).unwrap();
        for p in 0..3 {
            assert!(!link.run_packet(p, 20.0).unwrap().packet_error(), "{receiver}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn turbo_roundtrip(seed in any::<u64>(), rate_idx in 0usize..4, k in 40usize..300) {
        let rate = [0.33, 0.5, 0.75, 0.83][rate_idx];
        let code = TurboCode::new(k, rate).unwrap();
        let mut rng = RngStream::new(seed, 1).generator();
        let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let coded = code.encode(&info).unwrap();
        prop_assert_eq!(coded.len(), code.coded_len());
        let llr: Vec<f64> = coded.iter().map(|&c| if c == 1 { 8.0 } else { -8.0 }).collect();
        let dec = code.decode(&LlrBlock::new(llr, Role::APriori, Side::Decoder, Signal::Desired), 4).unwrap();
        prop_assert_eq!(dec.info_bits, info);
    }

    #[test]
    fn turbo_outputs_are_clamped(seed in any::<u64>(), scale in 0.1f64..40.0) {
        let code = TurboCode::new(100, 0.5).unwrap();
        let mut rng = RngStream::new(seed, 2).generator();
        let llr: Vec<f64> = (0..code.coded_len()).map(|_| rng.random_range(-scale..scale)).collect();
        let dec = code.decode(&LlrBlock::new(llr, Role::APriori, Side::Decoder, Signal::Desired), 3).unwrap();
        for v in dec.a_posteriori.values.iter().chain(&dec.extrinsic.values) {
            prop_assert!(v.abs() <= LLR_CLAMP);
        }
    }

    #[test]
    fn channel_interleaver_roundtrip(seed in any::<u64>(), sys in 1usize..500, par in 0usize..900) {
        let il = ChannelInterleaver::random(sys, par, seed, 5);
        let v: Vec<u32> = (0..(sys + par) as u32).collect();
        let back = il.deinterleave(&il.interleave(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn measured_mi_tracks_apriori_target(seed in any::<u64>(), ia in 0.05f64..0.95) {
        let t = build_jtable(401, 80).unwrap();
        let mut rng = RngStream::new(seed, 3).generator();
        let bits: Vec<i8> = (0..40_000).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let l = gen_apriori(&bits, ia, &t, &mut rng, Side::Decoder, Signal::Desired).unwrap();
        let mi = mutual_information(&l.values, &bits).unwrap();
        prop_assert!((mi - ia).abs() < 0.02, "target {} measured {}", ia, mi);
    }
}
