//! Acceptance suite. Every test prints one `criterion N ... PASS|FAIL` line
//! and then asserts on the same condition.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use iasim::config::RunConfig;
use iasim::exit_run::{decoder_curve_for, detector_curve_for};
use iasim::per::{run_per, run_point, snr_at_per, snr_resolution, PerPoint};
use iasim::selftest::{detector_oracle_gap, jtable_oracle_gap};
use iasim_core::channel::{powers_from_db, sample_channel, transmit, ChannelRealization, SignalConfig, NOISE_VARIANCE};
use iasim_core::detect::{ia_llr, iw_llr, prior_aware_llr, whitening_matrix, DetectionMode, DetectorInput};
use iasim_core::exit::{build_jtable, gen_apriori, measure_mi, trajectory, JTABLE_NODES, JTABLE_POINTS};
use iasim_core::oracle;
use iasim_core::receiver::Link;
use iasim_core::{
    Complex64, ComplexMatrix, Constellation, LlrBlock, Modulation, ReceiverKind, RngStream, Role, Scenario, Side, Signal,
    TurboCode, LLR_CLAMP,
};

const SEED: u64 = 20240611;

// criterion 1
const ORACLE_INSTANCES: usize = 1000;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(60);
// criterion 2
const WHITENING_DRAWS: usize = 100_000;
const WHITENING_TOL: f64 = 0.02;
// criterion 3
const REDUCTION_TOL: f64 = 1e-9;
const GENIE_TOL: f64 = 1e-6;
const REDUCTION_INSTANCES: usize = 300;
const GENIE_SNR_DB: (f64, f64) = (-5.0, 1.0);
// criterion 4
const TURBO_BLOCKS: usize = 1000;
const IDENTITY_TOL: f64 = 1e-9;
const WATERFALL_EBN0_DB: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
const WATERFALL_BLOCKS: usize = 400;
// criterion 5
const APRIORI_BITS: usize = 100_000;
const APRIORI_TOL: f64 = 0.01;
const JTABLE_TOL: f64 = 1e-3;
const JINV_TOL: f64 = 1e-2;
// criteria 6 and 7
const EXIT_SNR_DB: f64 = 6.0;
const EXIT_GRID: usize = 21;
const EXIT_SAMPLES: usize = 200_000;
const EXIT_INNER: usize = 4;
const STALL_ITERATIONS: usize = 50;
// criteria 8 and 9
const PER_TARGET: f64 = 0.1;
const PER_PACKETS: usize = 2000;
const PER_FLOOR: f64 = 0.01;
// criterion 10
const SANDWICH_QAM4_SNR: [f64; 3] = [3.0, 4.0, 5.0];
const SANDWICH_QAM4_PACKETS: usize = 300;
const SANDWICH_QAM64_SNR: [f64; 3] = [10.0, 12.0, 14.0];
const SANDWICH_QAM64_PACKETS: usize = 120;
// criterion 11
const SENSITIVITY_PACKETS: usize = 1000;
const IW_SENSITIVITY_SNR_DB: f64 = 10.0;
const IADET_SENSITIVITY_SNR_DB: f64 = 5.5;

// Written to the stdout handle rather than through `println!` so the line
// also shows up for passing tests, which the test harness captures.
fn report(n: u32, name: &str, passed: bool, detail: &str) {
    let line = format!(
        "criterion {n:>2} {name}: {} ({detail})\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_channel<R: Rng + ?Sized>(rng: &mut R, snr_db: f64, sir_db: f64) -> ChannelRealization {
    let (pd, pi) = powers_from_db(snr_db, sir_db);
    ChannelRealization::new(sample_channel(rng, 2, 2).unwrap(), sample_channel(rng, 2, 2).unwrap(), pd, pi).unwrap()
}

fn random_labels<R: Rng + ?Sized>(rng: &mut R, c: &Constellation) -> Vec<usize> {
    (0..2).map(|_| rng.random_range(0..c.order())).collect()
}

fn bipolar_bits(c: &Constellation, labels: &[usize]) -> Vec<i8> {
    labels
        .iter()
        .flat_map(|&l| (0..c.bits_per_symbol()).map(move |n| c.bit(l, n)))
        .collect()
}

#[test]
fn criterion_01_detectors_match_enumeration() {
    let start = Instant::now();
    let gap = detector_oracle_gap(ORACLE_INSTANCES, SEED).unwrap();
    let elapsed = start.elapsed();
    let passed = gap <= ORACLE_TOL && elapsed < ORACLE_TIME_LIMIT;
    report(
        1,
        "exact-mode detector LLRs equal brute-force enumeration",
        passed,
        &format!("{ORACLE_INSTANCES} instances, max deviation {gap:.2e}, {:.1} s", elapsed.as_secs_f64()),
    );
    assert!(passed);
}

#[test]
fn criterion_02_whitened_noise_is_white() {
    let c = Constellation::new(Modulation::Qam4);
    let mut rng = RngStream::new(SEED, 2).generator();
    let mut worst = 0.0f64;
    for sir_db in [-10.0, 0.0, 10.0] {
        let ch = random_channel(&mut rng, 10.0, sir_db);
        let w = whitening_matrix(&ch).unwrap();
        let zero = [Complex64::new(0.0, 0.0); 2];
        let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
        for _ in 0..WHITENING_DRAWS {
            let xi: Vec<_> = random_labels(&mut rng, &c).iter().map(|&l| c.point(l)).collect();
            let v = transmit(&zero, &xi, &ch, &mut rng, NOISE_VARIANCE).unwrap();
            let u = w.mul_vec(&v).unwrap();
            for (r, row) in acc.iter_mut().enumerate() {
                for (s, a) in row.iter_mut().enumerate() {
                    *a += u[r] * u[s].conj();
                }
            }
        }
        let cov = ComplexMatrix::from_fn(2, 2, |r, s| acc[r][s] / WHITENING_DRAWS as f64);
        let err = cov.sub(&ComplexMatrix::identity(2)).unwrap().frobenius_norm() / 2f64.sqrt();
        worst = worst.max(err);
    }
    let passed = worst <= WHITENING_TOL;
    report(
        2,
        "whitened interference-plus-noise covariance is identity",
        passed,
        &format!("{WHITENING_DRAWS} draws, worst relative Frobenius error {worst:.4}"),
    );
    assert!(passed);
}

#[test]
fn criterion_03_degenerate_reductions() {
    let mut rng = RngStream::new(SEED, 3).generator();
    let mods = [Modulation::Qam4, Modulation::Qam16];
    let (mut no_interference, mut zero_priors, mut genie) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..REDUCTION_INSTANCES {
        let cd = Constellation::new(mods[rng.random_range(0..2)]);
        let ci = Constellation::new(mods[rng.random_range(0..2)]);
        let snr = rng.random_range(0.0..10.0);
        let sir = rng.random_range(-5.0..5.0);
        let ch = random_channel(&mut rng, snr, sir);
        let ld = random_labels(&mut rng, &cd);
        let li = random_labels(&mut rng, &ci);
        let xd: Vec<_> = ld.iter().map(|&l| cd.point(l)).collect();
        let xi: Vec<_> = li.iter().map(|&l| ci.point(l)).collect();
        let y = transmit(&xd, &xi, &ch, &mut rng, NOISE_VARIANCE).unwrap();

        // no interference power: IA detection is plain ML, as is IW
        let quiet = ChannelRealization::new(ch.h_desired.clone(), ch.h_interference.clone(), ch.p_desired, 0.0).unwrap();
        let y_quiet = transmit(&xd, &xi, &quiet, &mut rng, NOISE_VARIANCE).unwrap();
        let input = DetectorInput::new(&y_quiet, &quiet, &cd, &ci, DetectionMode::Exact);
        no_interference = no_interference.max(max_diff(&ia_llr(&input).unwrap().values, &iw_llr(&input).unwrap().values));

        // zero priors: prior-aware detection is IA detection
        let input = DetectorInput::new(&y, &ch, &cd, &ci, DetectionMode::Exact);
        let zd = LlrBlock::zeros(2 * cd.bits_per_symbol(), Role::APriori, Side::Detector, Signal::Desired);
        let zi = LlrBlock::zeros(2 * ci.bits_per_symbol(), Role::APriori, Side::Detector, Signal::Interference);
        let pa = prior_aware_llr(&input.with_priors(Some(&zd), Some(&zi)), Signal::Desired).unwrap();
        zero_priors = zero_priors.max(max_diff(&pa.values, &ia_llr(&input).unwrap().values));

        // saturated priors at the true interference bits: interference-cancelled ML.
        // A wrong interference hypothesis keeps weight e^-30 relative to the
        // truth and at high SNR its distance advantage can offset that, so
        // this comparison runs at low SNR.
        let genie_snr = rng.random_range(GENIE_SNR_DB.0..GENIE_SNR_DB.1);
        let ch = random_channel(&mut rng, genie_snr, sir);
        let y = transmit(&xd, &xi, &ch, &mut rng, NOISE_VARIANCE).unwrap();
        let input = DetectorInput::new(&y, &ch, &cd, &ci, DetectionMode::Exact);
        let gi = LlrBlock::new(
            bipolar_bits(&ci, &li).iter().map(|&b| b as f64 * LLR_CLAMP).collect(),
            Role::APriori,
            Side::Detector,
            Signal::Interference,
        );
        let pa = prior_aware_llr(&input.with_priors(None, Some(&gi)), Signal::Desired).unwrap();
        let s = ch.p_interference.sqrt();
        let hx = ch.h_interference.mul_vec(&xi).unwrap();
        let y_ic: Vec<_> = y.iter().zip(&hx).map(|(a, b)| a - b * s).collect();
        let ic = ChannelRealization::new(ch.h_desired.clone(), ch.h_interference.clone(), ch.p_desired, 0.0).unwrap();
        let reference = oracle::brute_force_desired_llr(&y_ic, &ic, &cd, &ci, &[], &[], false);
        genie = genie.max(max_diff(&pa.values, &reference));
    }
    let passed = no_interference <= REDUCTION_TOL && zero_priors <= REDUCTION_TOL && genie <= GENIE_TOL;
    report(
        3,
        "degenerate cases reduce to the simpler detectors",
        passed,
        &format!(
            "{REDUCTION_INSTANCES} instances; P_I=0 IA vs IW {no_interference:.2e}, zero priors {zero_priors:.2e}, genie priors vs cancelled ML {genie:.2e}"
        ),
    );
    assert!(passed);
}

fn block_error_rate(code: &TurboCode, ebn0_db: f64, blocks: usize) -> (usize, usize) {
    // noise draws depend only on the block index so points are paired
    let es_n0 = 10f64.powf(ebn0_db / 10.0) * code.rate();
    let sigma2 = 1.0 / (2.0 * es_n0);
    let mut errors = 0;
    for b in 0..blocks {
        let mut rng = RngStream::new(SEED, 4000 + b as u64).generator();
        let info: Vec<u8> = (0..code.info_len()).map(|_| rng.random_range(0..2u8)).collect();
        let llrs: Vec<f64> = code
            .encode(&info)
            .unwrap()
            .iter()
            .map(|&c| {
                let x = 2.0 * c as f64 - 1.0;
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * (x + sigma2.sqrt() * z) / sigma2
            })
            .collect();
        let dec = code
            .decode(&LlrBlock::new(llrs, Role::APriori, Side::Decoder, Signal::Desired), 8)
            .unwrap();
        errors += usize::from(dec.info_bits != info);
    }
    (errors, blocks)
}

#[test]
fn criterion_04_turbo_code() {
    let mut rng = RngStream::new(SEED, 4).generator();
    let mut roundtrip_failures = 0;
    let mut identity_gap = 0.0f64;
    for rate in [0.33, 0.5, 0.75, 0.83] {
        let code = TurboCode::new(400, rate).unwrap();
        for _ in 0..TURBO_BLOCKS {
            let info: Vec<u8> = (0..400).map(|_| rng.random_range(0..2u8)).collect();
            let coded = code.encode(&info).unwrap();
            let clean: Vec<f64> = coded.iter().map(|&c| if c == 1 { 10.0 } else { -10.0 }).collect();
            let dec = code
                .decode(&LlrBlock::new(clean, Role::APriori, Side::Decoder, Signal::Desired), 4)
                .unwrap();
            roundtrip_failures += usize::from(dec.info_bits != info);
        }
        for _ in 0..20 {
            let noisy: Vec<f64> = (0..code.coded_len())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    1.5 + 2.0 * z
                })
                .collect();
            let dec = code
                .decode(&LlrBlock::new(noisy.clone(), Role::APriori, Side::Decoder, Signal::Desired), 4)
                .unwrap();
            for ((e, a), l) in dec.extrinsic.values.iter().zip(&dec.a_posteriori.values).zip(&noisy) {
                if a.abs() < LLR_CLAMP {
                    identity_gap = identity_gap.max((e - (a - l)).abs());
                }
            }
        }
    }
    let code = TurboCode::new(400, 0.5).unwrap();
    let bler: Vec<(usize, usize)> = WATERFALL_EBN0_DB
        .iter()
        .map(|&e| block_error_rate(&code, e, WATERFALL_BLOCKS))
        .collect();
    let rates: Vec<f64> = bler.iter().map(|&(e, n)| e as f64 / n as f64).collect();
    let monotone = bler.windows(2).all(|w| {
        let (p0, p1) = (w[0].0 as f64 / w[0].1 as f64, w[1].0 as f64 / w[1].1 as f64);
        p1 <= p0 + iasim::per::wilson_half_width(w[0].0, w[0].1) + iasim::per::wilson_half_width(w[1].0, w[1].1)
    });
    let waterfall = rates[0] > 0.5 && *rates.last().unwrap() < 0.05;
    let passed = roundtrip_failures == 0 && identity_gap <= IDENTITY_TOL && monotone && waterfall;
    report(
        4,
        "turbo round trip, extrinsic identity and AWGN waterfall",
        passed,
        &format!(
            "{roundtrip_failures} noiseless failures in {} blocks, identity gap {identity_gap:.2e}, rate-1/2 BLER {rates:?} at Eb/N0 {WATERFALL_EBN0_DB:?} dB",
            4 * TURBO_BLOCKS
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_05_exit_self_consistency() {
    let table = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    let mut rng = RngStream::new(SEED, 5).generator();
    let bits: Vec<i8> = (0..APRIORI_BITS).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    let mut apriori_gap = 0.0f64;
    for i in 1..10 {
        let ia = i as f64 / 10.0;
        let l = gen_apriori(&bits, ia, &table, &mut rng, Side::Detector, Signal::Desired).unwrap();
        apriori_gap = apriori_gap.max((measure_mi(&l, &bits).unwrap() - ia).abs());
    }
    let j_gap = jtable_oracle_gap().unwrap();
    let mut inv_gap = 0.0f64;
    for sigma in [0.5, 1.0, 2.0, 4.0] {
        inv_gap = inv_gap.max((table.j_inv(table.j(sigma)).unwrap() - sigma).abs());
    }
    let passed = apriori_gap <= APRIORI_TOL && j_gap <= JTABLE_TOL && inv_gap <= JINV_TOL;
    report(
        5,
        "a-priori generation, J table and inverse are consistent",
        passed,
        &format!("I_a round trip {apriori_gap:.4}, J vs density {j_gap:.2e}, J^-1 round trip {inv_gap:.2e}"),
    );
    assert!(passed);
}

fn exit_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.scenario.seed = SEED;
    cfg.exit.snr_db = EXIT_SNR_DB;
    cfg.exit.grid_points = EXIT_GRID;
    cfg.exit.samples = EXIT_SAMPLES;
    cfg.exit.inner_iterations = EXIT_INNER;
    cfg
}

#[test]
fn criterion_06_exit_tunnels_at_rate_half() {
    let cfg = exit_config();
    let table = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    let dec = decoder_curve_for(&cfg, 0.5, &table).unwrap();
    let iw = detector_curve_for(&cfg, ReceiverKind::Iw, &table).unwrap();
    let iapd = detector_curve_for(&cfg, ReceiverKind::Iapd, &table).unwrap();
    let iw_tr = trajectory(&iw, &dec, STALL_ITERATIONS).unwrap();
    let iapd_tr = trajectory(&iapd, &dec, 2).unwrap();
    let passed = !iw_tr.converged && iapd_tr.converged;
    report(
        6,
        "rate 1/2 at 6 dB: IW tunnel closed, IAPD converges within 2 iterations",
        passed,
        &format!(
            "IW stalls at MI {:.3} after {} iterations; IAPD reaches {:.4} in {} iterations",
            iw_tr.final_mi, iw_tr.iterations, iapd_tr.final_mi, iapd_tr.iterations
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_07_iapd_needs_three_iterations_at_rate_three_quarters() {
    let cfg = exit_config();
    let table = build_jtable(JTABLE_POINTS, JTABLE_NODES).unwrap();
    let dec = decoder_curve_for(&cfg, 0.75, &table).unwrap();
    let iapd = detector_curve_for(&cfg, ReceiverKind::Iapd, &table).unwrap();
    let two = trajectory(&iapd, &dec, 2).unwrap();
    let three = trajectory(&iapd, &dec, 3).unwrap();
    let passed = !two.converged && three.converged;
    report(
        7,
        "rate 3/4 at 6 dB: IAPD not converged after 2 iterations, converged after 3",
        passed,
        &format!(
            "MI after 2 iterations {:.4} (converged {}), after 3 iterations {:.4} (converged {})",
            two.final_mi, two.converged, three.final_mi, three.converged
        ),
    );
    assert!(passed);
}

fn per_curve(receiver: ReceiverKind, sir_db: f64, grid: Vec<f64>) -> Vec<PerPoint> {
    let mut cfg = RunConfig::default();
    cfg.scenario = Scenario {
        snr_db: grid,
        sir_db,
        packets: PER_PACKETS,
        seed: SEED,
        ..Scenario::for_receiver(receiver)
    };
    cfg.per_floor = PER_FLOOR;
    run_per(&cfg).unwrap()
}

fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

#[test]
fn criterion_08_per_ordering() {
    let iasd = per_curve(ReceiverKind::Iasd, 0.0, grid(0.0, 0.5, 10.0));
    let iadet = per_curve(ReceiverKind::IaDet, 0.0, grid(0.0, 0.5, 10.0));
    let iw = per_curve(ReceiverKind::Iw, 0.0, grid(0.0, 2.0, 30.0));
    let s_iasd = snr_at_per(&iasd, PER_TARGET);
    let s_iadet = snr_at_per(&iadet, PER_TARGET);
    let r_iasd = snr_resolution(&iasd, PER_TARGET);
    let r_iadet = snr_resolution(&iadet, PER_TARGET);
    // IW never reaching the target on the grid is accepted only when the
    // last point is significantly above it; the grid end then bounds its
    // required SNR from below.
    let iw_last = iw.last().unwrap();
    let iw_bound = match snr_at_per(&iw, PER_TARGET) {
        Some(s) => Some(s),
        None if iw_last.interval().0 > PER_TARGET => Some(iw_last.snr_db),
        None => None,
    };
    let passed = match (s_iasd, s_iadet, r_iasd, r_iadet, iw_bound) {
        (Some(a), Some(b), Some(ra), Some(rb), Some(c)) => {
            let res = ra.max(rb);
            b - a > 2.0 * res && c - b > 2.0 * res
        }
        _ => false,
    };
    report(
        8,
        "SNR at PER 0.1 ordered IASD < IA-Det < IW beyond twice the CI resolution",
        passed,
        &format!(
            "IASD {s_iasd:?} ± {r_iasd:?} dB, IA-Det {s_iadet:?} ± {r_iadet:?} dB, IW >= {iw_bound:?} dB (PER {:.3} at {} dB)",
            iw_last.per, iw_last.snr_db
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_09_gain_grows_with_interference() {
    let gain = |sir: f64| -> Option<f64> {
        let iasd = per_curve(ReceiverKind::Iasd, sir, grid(0.0, 0.5, 10.0));
        let iadet = per_curve(ReceiverKind::IaDet, sir, grid(0.0, 0.5, 10.0));
        Some(snr_at_per(&iadet, PER_TARGET)? - snr_at_per(&iasd, PER_TARGET)?)
    };
    let low = gain(-3.0);
    let high = gain(3.0);
    let passed = matches!((low, high), (Some(l), Some(h)) if l > h);
    report(
        9,
        "IASD gain over IA-Det larger at SIR -3 dB than at +3 dB",
        passed,
        &format!("gain {low:?} dB at SIR -3, {high:?} dB at SIR +3"),
    );
    assert!(passed);
}

fn fixed_point(receiver: ReceiverKind, interference: SignalConfig, snr_db: f64, packets: usize) -> PerPoint {
    let mut cfg = RunConfig::default();
    cfg.scenario = Scenario {
        interference,
        snr_db: vec![snr_db],
        packets,
        seed: SEED,
        ..Scenario::for_receiver(receiver)
    };
    cfg.stop_errors = usize::MAX;
    let link = Link::new(&cfg.scenario).unwrap();
    PerPoint::from_results(snr_db, &run_point(&link, &cfg, snr_db).unwrap())
}

/// `a` is not worse than `b` within the sum of the 95% half-widths.
fn not_worse(a: &PerPoint, b: &PerPoint) -> bool {
    a.per <= b.per + a.ci95 + b.ci95
}

fn consistent(a: &PerPoint, b: &PerPoint) -> bool {
    (a.per - b.per).abs() <= a.ci95 + b.ci95
}

#[test]
fn criterion_10_iiad_between_iasd_and_iadet() {
    let cases = [
        (
            SignalConfig {
                modulation: Modulation::Qam4,
                rate: 0.5,
            },
            &SANDWICH_QAM4_SNR[..],
            SANDWICH_QAM4_PACKETS,
        ),
        (
            SignalConfig {
                modulation: Modulation::Qam64,
                rate: 0.83,
            },
            &SANDWICH_QAM64_SNR[..],
            SANDWICH_QAM64_PACKETS,
        ),
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for (interference, snrs, packets) in cases {
        for &snr in snrs {
            let iasd = fixed_point(ReceiverKind::Iasd, interference, snr, packets);
            let iiad = fixed_point(ReceiverKind::Iiad, interference, snr, packets);
            let iadet = fixed_point(ReceiverKind::IaDet, interference, snr, packets);
            passed &= not_worse(&iasd, &iiad) && not_worse(&iiad, &iadet);
            detail.push(format!(
                "{} r{} {snr} dB: {:.3}/{:.3}/{:.3}",
                interference.modulation, interference.rate, iasd.per, iiad.per, iadet.per
            ));
        }
    }
    report(
        10,
        "PER of IASD <= IIAD <= IA-Det within 95% CI",
        passed,
        &format!("IASD/IIAD/IA-Det PER: {}", detail.join("; ")),
    );
    assert!(passed);
}

#[test]
fn criterion_11_sensitivity_to_interference_format() {
    let sig = |modulation, rate| SignalConfig { modulation, rate };
    let base = sig(Modulation::Qam4, 0.5);

    let iw_base = fixed_point(ReceiverKind::Iw, base, IW_SENSITIVITY_SNR_DB, SENSITIVITY_PACKETS);
    let mut iw_invariant = true;
    let mut detail = vec![format!("IW {:.3}", iw_base.per)];
    for other in [sig(Modulation::Qam4, 0.83), sig(Modulation::Qam16, 0.5), sig(Modulation::Qam64, 0.75)] {
        let p = fixed_point(ReceiverKind::Iw, other, IW_SENSITIVITY_SNR_DB, SENSITIVITY_PACKETS);
        iw_invariant &= consistent(&iw_base, &p);
        detail.push(format!("{} r{} {:.3}", other.modulation, other.rate, p.per));
    }

    let ia_base = fixed_point(ReceiverKind::IaDet, base, IADET_SENSITIVITY_SNR_DB, SENSITIVITY_PACKETS);
    let ia_rate = fixed_point(ReceiverKind::IaDet, sig(Modulation::Qam4, 0.83), IADET_SENSITIVITY_SNR_DB, SENSITIVITY_PACKETS);
    let ia_mod = fixed_point(ReceiverKind::IaDet, sig(Modulation::Qam16, 0.5), IADET_SENSITIVITY_SNR_DB, SENSITIVITY_PACKETS);
    let ia_ok = consistent(&ia_base, &ia_rate) && !consistent(&ia_base, &ia_mod);
    detail.push(format!(
        "IA-Det {:.3}, rate 0.83 {:.3}, 16QAM {:.3}",
        ia_base.per, ia_rate.per, ia_mod.per
    ));

    let passed = iw_invariant && ia_ok;
    report(
        11,
        "IW ignores the interference format; IA-Det ignores its rate but not its modulation",
        passed,
        &detail.join(", "),
    );
    assert!(passed);
}
