//! Quick oracle checks run by `iasim selftest`.

use rand::Rng;

use iasim_core::channel::{sample_channel, transmit, ChannelRealization, NOISE_VARIANCE};
use iasim_core::detect::{ia_llr, iw_llr, prior_aware_llr, DetectionMode, DetectorInput};
use iasim_core::exit::{build_jtable, JTABLE_NODES, JTABLE_POINTS};
use iasim_core::oracle;
use iasim_core::{Constellation, LlrBlock, Modulation, Role, RngStream, Side, Signal, TurboCode};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest deviation of the exact-mode detectors from brute-force
/// enumeration over `instances` random 2×2 cases.
pub fn detector_oracle_gap(instances: usize, seed: u64) -> iasim_core::Result<f64> {
    let mods = [Modulation::Qam4, Modulation::Qam16];
    let mut worst = 0.0f64;
    for n in 0..instances {
        let mut rng = RngStream::new(seed, n as u64).generator();
        let cd = Constellation::new(mods[rng.random_range(0..2)]);
        let ci = Constellation::new(mods[rng.random_range(0..2)]);
        let snr = rng.random_range(-5.0..20.0);
        let sir = rng.random_range(-10.0..10.0);
        let (pd, pi) = iasim_core::channel::powers_from_db(snr, sir);
        let ch = ChannelRealization::new(sample_channel(&mut rng, 2, 2)?, sample_channel(&mut rng, 2, 2)?, pd, pi)?;
        let xd: Vec<_> = (0..2).map(|_| cd.points()[rng.random_range(0..cd.order())]).collect();
        let xi: Vec<_> = (0..2).map(|_| ci.points()[rng.random_range(0..ci.order())]).collect();
        let y = transmit(&xd, &xi, &ch, &mut rng, NOISE_VARIANCE)?;
        let nd = 2 * cd.bits_per_symbol();
        let ni = 2 * ci.bits_per_symbol();
        let prd: Vec<f64> = (0..nd).map(|_| rng.random_range(-8.0..8.0)).collect();
        let pri: Vec<f64> = (0..ni).map(|_| rng.random_range(-8.0..8.0)).collect();
        let bd = LlrBlock::new(prd.clone(), Role::APriori, Side::Detector, Signal::Desired);
        let bi = LlrBlock::new(pri.clone(), Role::APriori, Side::Detector, Signal::Interference);
        let input = DetectorInput::new(&y, &ch, &cd, &ci, DetectionMode::Exact);
        let with_priors = input.with_priors(Some(&bd), Some(&bi));

        let iw = iw_llr(&input)?;
        worst = worst.max(max_diff(&iw.values, &oracle::brute_force_iw_llr(&y, &ch, &cd, false)));
        let ia = ia_llr(&input)?;
        worst = worst.max(max_diff(&ia.values, &oracle::brute_force_desired_llr(&y, &ch, &cd, &ci, &[], &[], false)));
        let pa = prior_aware_llr(&with_priors, Signal::Desired)?;
        worst = worst.max(max_diff(&pa.values, &oracle::brute_force_desired_llr(&y, &ch, &cd, &ci, &prd, &pri, false)));
        let pai = prior_aware_llr(&with_priors, Signal::Interference)?;
        worst = worst.max(max_diff(
            &pai.values,
            &oracle::brute_force_interference_llr(&y, &ch, &cd, &ci, &prd, &pri, false),
        ));
    }
    Ok(worst)
}

/// Largest |J_table − J_oracle| on a held-out σ set between grid points.
pub fn jtable_oracle_gap() -> iasim_core::Result<f64> {
    let table = build_jtable(JTABLE_POINTS, JTABLE_NODES)?;
    let mut worst = 0.0f64;
    for i in 0..200 {
        let sigma = 0.0123 + 9.97 * i as f64 / 200.0;
        worst = worst.max((table.j(sigma) - oracle::j_by_density(sigma)).abs());
    }
    Ok(worst)
}

pub fn run() -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |name, res: iasim_core::Result<(bool, String)>| {
        let (passed, detail) = res.unwrap_or_else(|e| (false, e.to_string()));
        checks.push(Check { name, passed, detail });
    };
    push(
        "detector LLRs match brute-force enumeration",
        detector_oracle_gap(100, 1).map(|g| (g < 1e-9, format!("max deviation {g:e}"))),
    );
    push(
        "J table matches density integration",
        jtable_oracle_gap().map(|g| (g < 1e-3, format!("max deviation {g:e}"))),
    );
    push(
        "turbo noiseless round trip",
        (|| {
            let mut rng = RngStream::new(7, 0).generator();
            for rate in [0.33, 0.5, 0.75, 0.83] {
                let code = TurboCode::new(400, rate)?;
                let info: Vec<u8> = (0..400).map(|_| rng.random_range(0..2u8)).collect();
                let llr: Vec<f64> = code.encode(&info)?.iter().map(|&c| if c == 1 { 10.0 } else { -10.0 }).collect();
                let dec = code.decode(&LlrBlock::new(llr, Role::APriori, Side::Decoder, Signal::Desired), 4)?;
                if dec.info_bits != info {
                    return Ok((false, format!("rate {rate} failed")));
                }
            }
            Ok((true, "all rates".to_string()))
        })(),
    );
    checks
}
