use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use iasim_core::channel::{powers_from_db, sample_channel, transmit, ChannelRealization, NOISE_VARIANCE};
use iasim_core::detect::{ia_llr, iw_llr, joint_llr, prior_aware_llr, DetectionMode, DetectorInput};
use iasim_core::oracle;
use iasim_core::{Complex64, ComplexMatrix, Constellation, LlrBlock, Modulation, Role, RngStream, Side, Signal};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fixed_instance() -> (Vec<Complex64>, ChannelRealization) {
    let hd = [[c(0.8, -0.3), c(-0.2, 0.5)], [c(0.1, 0.9), c(0.6, -0.4)]];
    let hi = [[c(-0.5, 0.2), c(0.7, 0.1)], [c(0.3, -0.6), c(-0.4, -0.8)]];
    let ch = ChannelRealization::new(
        ComplexMatrix::from_fn(2, 2, |r, s| hd[r][s]),
        ComplexMatrix::from_fn(2, 2, |r, s| hi[r][s]),
        10f64.powf(0.8),
        10f64.powf(0.5),
    )
    .unwrap();
    (vec![c(1.2, -0.7), c(-0.4, 1.9)], ch)
}

// Values computed offline by direct enumeration in double precision with an
// explicit R_v^-1 quadratic form for IW.
const FROZEN_IW: [f64; 4] = [5.681010207679, 0.981652453147, -0.448613592662, 0.533352706424];
const FROZEN_IA: [f64; 4] = [6.948221633029, 0.993180280397, -0.193376855662, 0.301336653223];
const FROZEN_PA_D: [f64; 4] = [7.239479336984, 2.606416212325, 0.915174815481, 0.309317828190];
const FROZEN_PA_I: [f64; 8] = [
    0.422769628689,
    0.431404847989,
    0.581740697307,
    -0.911967530511,
    2.169264706169,
    -0.462977868526,
    -0.175407539068,
    -0.647716327586,
];
const PRIOR_D: [f64; 4] = [0.7, -1.1, 0.0, 2.3];
const PRIOR_I: [f64; 8] = [-0.4, 1.6, 0.9, -2.0, 0.3, 0.0, -1.2, 0.5];

#[test]
fn frozen_reference_instance() {
    let (y, ch) = fixed_instance();
    let cd = Constellation::new(Modulation::Qam4);
    let ci = Constellation::new(Modulation::Qam16);
    let input = DetectorInput::new(&y, &ch, &cd, &ci, DetectionMode::Exact);
    let check = |got: &[f64], want: &[f64]| {
        for (g, w) in got.iter().zip(want) {
            assert_abs_diff_eq!(*g, *w, epsilon = 1e-9);
        }
    };
    check(&iw_llr(&input).unwrap().values, &FROZEN_IW);
    check(&ia_llr(&input).unwrap().values, &FROZEN_IA);

    let pd = LlrBlock::new(PRIOR_D.to_vec(), Role::APriori, Side::Detector, Signal::Desired);
    let pi = LlrBlock::new(PRIOR_I.to_vec(), Role::APriori, Side::Detector, Signal::Interference);
    let with = input.with_priors(Some(&pd), Some(&pi));
    check(&prior_aware_llr(&with, Signal::Desired).unwrap().values, &FROZEN_PA_D);
    check(&prior_aware_llr(&with, Signal::Interference).unwrap().values, &FROZEN_PA_I);
    let (d, i) = joint_llr(&with).unwrap();
    check(&d.values, &FROZEN_PA_D);
    check(&i.values, &FROZEN_PA_I);
}

fn modulation(i: usize) -> Modulation {
    [Modulation::Qam4, Modulation::Qam16, Modulation::Qam64][i]
}

struct Case {
    y: Vec<Complex64>,
    ch: ChannelRealization,
    cd: Constellation,
    ci: Constellation,
    prior_d: Vec<f64>,
    prior_i: Vec<f64>,
}

fn case(seed: u64, md: usize, mi: usize, snr: f64, sir: f64) -> Case {
    let mut rng = RngStream::new(seed, 0).generator();
    let cd = Constellation::new(modulation(md));
    let ci = Constellation::new(modulation(mi));
    let (p_d, p_i) = powers_from_db(snr, sir);
    let ch = ChannelRealization::new(sample_channel(&mut rng, 2, 2).unwrap(), sample_channel(&mut rng, 2, 2).unwrap(), p_d, p_i)
        .unwrap();
    let xd: Vec<_> = (0..2).map(|_| cd.point(rng.random_range(0..cd.order()))).collect();
    let xi: Vec<_> = (0..2).map(|_| ci.point(rng.random_range(0..ci.order()))).collect();
    let y = transmit(&xd, &xi, &ch, &mut rng, NOISE_VARIANCE).unwrap();
    let prior_d = (0..2 * cd.bits_per_symbol()).map(|_| rng.random_range(-6.0..6.0)).collect();
    let prior_i = (0..2 * ci.bits_per_symbol()).map(|_| rng.random_range(-6.0..6.0)).collect();
    Case {
        y,
        ch,
        cd,
        ci,
        prior_d,
        prior_i,
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // joint hypothesis count stays at or below 4096 so the brute force is quick
    #[test]
    fn detectors_match_enumeration(
        seed in any::<u64>(),
        (md, mi) in prop_oneof![Just((0usize, 0usize)), Just((0, 1)), Just((1, 0)), Just((1, 1)), Just((2, 0))],
        snr in -5.0f64..20.0,
        sir in -10.0f64..10.0,
        max_log in any::<bool>(),
    ) {
        let k = case(seed, md, mi, snr, sir);
        let mode = if max_log { DetectionMode::MaxLog } else { DetectionMode::Exact };
        let input = DetectorInput::new(&k.y, &k.ch, &k.cd, &k.ci, mode);
        let iw = iw_llr(&input).unwrap();
        prop_assert!(close(&iw.values, &oracle::brute_force_iw_llr(&k.y, &k.ch, &k.cd, max_log), 1e-9));
        let ia = ia_llr(&input).unwrap();
        prop_assert!(close(&ia.values, &oracle::brute_force_desired_llr(&k.y, &k.ch, &k.cd, &k.ci, &[], &[], max_log), 1e-9));

        let bd = LlrBlock::new(k.prior_d.clone(), Role::APriori, Side::Detector, Signal::Desired);
        let bi = LlrBlock::new(k.prior_i.clone(), Role::APriori, Side::Detector, Signal::Interference);
        let (d, i) = joint_llr(&input.with_priors(Some(&bd), Some(&bi))).unwrap();
        prop_assert!(close(&d.values, &oracle::brute_force_desired_llr(&k.y, &k.ch, &k.cd, &k.ci, &k.prior_d, &k.prior_i, max_log), 1e-9));
        prop_assert!(close(&i.values, &oracle::brute_force_interference_llr(&k.y, &k.ch, &k.cd, &k.ci, &k.prior_d, &k.prior_i, max_log), 1e-9));
    }

    #[test]
    fn maxlog_agrees_in_sign_on_clear_decisions(seed in any::<u64>(), snr in 0.0f64..15.0) {
        // each log-sum-exp exceeds its max by at most ln(128) for 128 hypotheses
        // per bit set, so a larger exact LLR fixes the max-log sign
        let bound = 128f64.ln();
        let k = case(seed, 0, 0, snr, 0.0);
        let exact = ia_llr(&DetectorInput::new(&k.y, &k.ch, &k.cd, &k.ci, DetectionMode::Exact)).unwrap();
        let approx = ia_llr(&DetectorInput::new(&k.y, &k.ch, &k.cd, &k.ci, DetectionMode::MaxLog)).unwrap();
        for (e, a) in exact.values.iter().zip(&approx.values) {
            if e.abs() > bound {
                prop_assert_eq!(e.signum(), a.signum());
            }
        }
    }

    #[test]
    fn outputs_are_clamped(seed in any::<u64>(), snr in 20.0f64..40.0) {
        let k = case(seed, 1, 1, snr, 10.0);
        let input = DetectorInput::new(&k.y, &k.ch, &k.cd, &k.ci, DetectionMode::MaxLog);
        for v in ia_llr(&input).unwrap().values.into_iter().chain(iw_llr(&input).unwrap().values) {
            prop_assert!(v.abs() <= iasim_core::LLR_CLAMP);
        }
    }
}
