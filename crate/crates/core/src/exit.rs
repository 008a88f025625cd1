//! EXIT-chart tooling: the J function, synthetic a-priori LLRs, mutual
//! information measurement, detector and decoder transfer curves, and the
//! staircase trajectory between two curves.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{sample_channel, transmit, ChannelRealization, NOISE_VARIANCE};
use crate::channel::powers_from_db;
use crate::detect::{whitening_matrix, DetectionMode, JointDetector, Targets};
use crate::llr::{clamp_llr, LlrBlock, Role, Side, Signal};
use crate::modem::{Constellation, Modulation};
use crate::numerics::RngStream;
use crate::receiver::ReceiverKind;
use crate::turbo::TurboCode;
use crate::{Error, Result};

/// Upper end of the tabulated σ range.
pub const SIGMA_MAX: f64 = 10.0;

/// Gauss–Hermite nodes and weights normalised for a standard normal:
/// `E[f(Z)] ≈ Σ w_i f(x_i)`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch on the probabilists' Hermite recurrence.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Gauss-Hermite needs at least one node".into()));
        }
        let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `log2(1 + e^{-v})` without overflow.
fn log2_one_plus_exp_neg(v: f64) -> f64 {
    if v > 0.0 {
        (-v).exp().ln_1p() / std::f64::consts::LN_2
    } else {
        (-v + v.exp().ln_1p()) / std::f64::consts::LN_2
    }
}

/// `J(σ)` evaluated directly by quadrature.
pub fn j_direct(sigma: f64, quad: &GaussHermite) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let mean = sigma * sigma / 2.0;
    1.0 - quad.expect(|z| log2_one_plus_exp_neg(mean + sigma * z))
}

/// Tabulated `J` on a uniform σ grid over `[0, SIGMA_MAX]`.
#[derive(Clone, Debug)]
pub struct JTable {
    sigma: Vec<f64>,
    mi: Vec<f64>,
}

/// Default table resolution and quadrature order.
pub const JTABLE_POINTS: usize = 2001;
pub const JTABLE_NODES: usize = 160;

/// Builds the J table with `resolution` grid points using a
/// `nodes`-point Gauss–Hermite rule.
pub fn build_jtable(resolution: usize, nodes: usize) -> Result<JTable> {
    if resolution < 2 {
        return Err(Error::InvalidParameter("J table needs at least 2 points".into()));
    }
    let quad = GaussHermite::new(nodes)?;
    let sigma: Vec<f64> = (0..resolution)
        .map(|i| SIGMA_MAX * i as f64 / (resolution - 1) as f64)
        .collect();
    let mut mi: Vec<f64> = sigma.iter().map(|&s| j_direct(s, &quad).clamp(0.0, 1.0)).collect();
    for i in 1..mi.len() {
        if mi[i] < mi[i - 1] {
            mi[i] = mi[i - 1];
        }
    }
    Ok(JTable { sigma, mi })
}

impl JTable {
    pub fn sigma_grid(&self) -> &[f64] {
        &self.sigma
    }

    pub fn values(&self) -> &[f64] {
        &self.mi
    }

    pub fn j(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        if sigma >= SIGMA_MAX {
            return *self.mi.last().unwrap();
        }
        let step = SIGMA_MAX / (self.sigma.len() - 1) as f64;
        let i = ((sigma / step) as usize).min(self.sigma.len() - 2);
        let f = (sigma - self.sigma[i]) / step;
        self.mi[i] + f * (self.mi[i + 1] - self.mi[i])
    }

    /// Inverse by linear interpolation; `1.0` maps to `+∞`, values above the
    /// table top map to `SIGMA_MAX`.
    pub fn j_inv(&self, mi: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&mi) {
            return Err(Error::InvalidParameter(format!("mutual information {mi} outside [0, 1]")));
        }
        if mi >= 1.0 {
            return Ok(f64::INFINITY);
        }
        if mi <= 0.0 {
            return Ok(0.0);
        }
        if mi >= *self.mi.last().unwrap() {
            return Ok(SIGMA_MAX);
        }
        let i = self.mi.partition_point(|&v| v <= mi).max(1);
        let (lo, hi) = (self.mi[i - 1], self.mi[i]);
        let f = if hi > lo { (mi - lo) / (hi - lo) } else { 0.0 };
        Ok(self.sigma[i - 1] + f * (self.sigma[i] - self.sigma[i - 1]))
    }
}

/// Consistent-Gaussian a-priori LLRs `L = σ²/2·x + σ·z` with `σ = J⁻¹(I_a)`.
pub fn gen_apriori<R: Rng + ?Sized>(
    bits: &[i8],
    ia: f64,
    table: &JTable,
    rng: &mut R,
    side: Side,
    signal: Signal,
) -> Result<LlrBlock> {
    let sigma = table.j_inv(ia)?;
    let values = if sigma.is_infinite() {
        bits.iter().map(|&b| b as f64 * crate::LLR_CLAMP).collect()
    } else {
        bits.iter()
            .map(|&b| {
                let z: f64 = StandardNormal.sample(rng);
                clamp_llr(sigma * sigma / 2.0 * b as f64 + sigma * z)
            })
            .collect()
    };
    Ok(LlrBlock::new(values, Role::APriori, side, signal))
}

/// Time-average estimate `1 − E[log2(1 + e^{−x·L})]`, clamped to `[0, 1]`
/// (overconfident LLRs can push the raw average below zero).
pub fn mutual_information(llrs: &[f64], bits: &[i8]) -> Result<f64> {
    if llrs.len() != bits.len() {
        return Err(Error::LengthMismatch {
            what: "bits for mutual information",
            expected: llrs.len(),
            actual: bits.len(),
        });
    }
    if llrs.is_empty() {
        return Err(Error::Empty("mutual information samples"));
    }
    let sum: f64 = llrs
        .iter()
        .zip(bits)
        .map(|(&l, &b)| log2_one_plus_exp_neg(b as f64 * l))
        .sum();
    Ok((1.0 - sum / llrs.len() as f64).clamp(0.0, 1.0))
}

pub fn measure_mi(llrs: &LlrBlock, bits: &[i8]) -> Result<f64> {
    mutual_information(&llrs.values, bits)
}

/// Sampled transfer function `I_e = T(I_a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl TransferCurve {
    /// Piecewise-linear evaluation, clamped to the end points.
    pub fn eval(&self, ia: f64) -> f64 {
        let p = &self.points;
        if p.is_empty() {
            return 0.0;
        }
        if ia <= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            if ia <= w[1].0 {
                let f = if w[1].0 > w[0].0 { (ia - w[0].0) / (w[1].0 - w[0].0) } else { 1.0 };
                return w[0].1 + f * (w[1].1 - w[0].1);
            }
        }
        p[p.len() - 1].1
    }
}

/// Uniform a-priori grid `0, 1/(n−1), …, 1`.
pub fn mi_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Setup for a detector transfer curve.
#[derive(Clone, Debug)]
pub struct DetectorCurveConfig {
    pub receiver: ReceiverKind,
    pub desired: Modulation,
    pub interference: Modulation,
    pub rx_antennas: usize,
    pub streams: usize,
    pub snr_db: f64,
    pub sir_db: f64,
    pub mode: DetectionMode,
}

fn bipolar<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// Detector transfer curve of the desired signal. The a-priori MI on the
/// grid is applied to the desired bits and, for IAPD, equally to the
/// interference bits. IW and IA-Det ignore priors, so their curve is a
/// single measurement replicated across the grid.
pub fn detector_curve(cfg: &DetectorCurveConfig, grid: &[f64], samples: usize, table: &JTable, seed: u64) -> Result<TransferCurve> {
    if grid.is_empty() {
        return Err(Error::Empty("a-priori grid"));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let use_priors = match cfg.receiver {
        ReceiverKind::Iw | ReceiverKind::IaDet => false,
        ReceiverKind::Iapd => true,
        other => {
            return Err(Error::InvalidParameter(format!(
                "no single-detector transfer curve for {other}; use IW, IADET or IAPD"
            )))
        }
    };
    let cd = Constellation::new(cfg.desired);
    let ci = Constellation::new(cfg.interference);
    let (p_d, p_i) = powers_from_db(cfg.snr_db, cfg.sir_db);
    let d_bits = cd.bits_per_symbol() * cfg.streams;
    let i_bits = ci.bits_per_symbol() * cfg.streams;
    let vectors = samples.div_ceil(d_bits);

    let point = |idx: usize, ia: f64| -> Result<f64> {
        let mut rng = RngStream::new(seed, idx as u64).generator();
        let mut llrs = Vec::with_capacity(vectors * d_bits);
        let mut truth = Vec::with_capacity(vectors * d_bits);
        for _ in 0..vectors {
            let hd = sample_channel(&mut rng, cfg.rx_antennas, cfg.streams)?;
            let hi = sample_channel(&mut rng, cfg.rx_antennas, cfg.streams)?;
            let ch = ChannelRealization::new(hd, hi, p_d, p_i)?;
            let bd = bipolar(&mut rng, d_bits);
            let bi = bipolar(&mut rng, i_bits);
            let n_d = cd.bits_per_symbol();
            let n_i = ci.bits_per_symbol();
            let xd: Vec<_> = bd.chunks(n_d).map(|b| cd.point(cd.label_of_bits(b))).collect();
            let xi: Vec<_> = bi.chunks(n_i).map(|b| ci.point(ci.label_of_bits(b))).collect();
            let y = transmit(&xd, &xi, &ch, &mut rng, NOISE_VARIANCE)?;
            let out = match cfg.receiver {
                ReceiverKind::Iw => {
                    let w = whitening_matrix(&ch)?;
                    let det = JointDetector::point_to_point(&w.matmul(&ch.h_desired)?, p_d, &cd);
                    det.sweep(&w.mul_vec(&y)?, &[], &[], cfg.mode, Targets::DESIRED)?
                }
                _ => {
                    let det = JointDetector::interference_aware(&ch, &cd, &ci);
                    let (pd, pi) = if use_priors {
                        (
                            gen_apriori(&bd, ia, table, &mut rng, Side::Detector, Signal::Desired)?.values,
                            gen_apriori(&bi, ia, table, &mut rng, Side::Detector, Signal::Interference)?.values,
                        )
                    } else {
                        (Vec::new(), Vec::new())
                    };
                    det.sweep(&y, &pd, &pi, cfg.mode, Targets::DESIRED)?
                }
            };
            llrs.extend(out.desired.unwrap_or_default());
            truth.extend_from_slice(&bd);
        }
        mutual_information(&llrs, &truth)
    };

    let points = if use_priors {
        grid.par_iter()
            .enumerate()
            .map(|(i, &ia)| point(i, ia).map(|ie| (ia, ie)))
            .collect::<Result<Vec<_>>>()?
    } else {
        let ie = point(0, 0.0)?;
        grid.iter().map(|&ia| (ia, ie)).collect()
    };
    Ok(TransferCurve {
        label: format!("{} {}/{} SNR {} dB", cfg.receiver, cfg.desired, cfg.interference, cfg.snr_db),
        points,
    })
}

/// Decoder transfer curve: a-priori MI on the coded bits in, extrinsic MI
/// on the coded bits out.
pub fn decoder_curve(
    code: &TurboCode,
    grid: &[f64],
    samples: usize,
    inner_iterations: usize,
    table: &JTable,
    seed: u64,
) -> Result<TransferCurve> {
    if grid.is_empty() {
        return Err(Error::Empty("a-priori grid"));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let blocks = samples.div_ceil(code.coded_len());
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &ia)| {
            let mut rng = RngStream::new(seed, idx as u64).generator();
            let mut llrs = Vec::with_capacity(blocks * code.coded_len());
            let mut truth = Vec::with_capacity(blocks * code.coded_len());
            for _ in 0..blocks {
                let info: Vec<u8> = (0..code.info_len()).map(|_| rng.random_range(0..2u8)).collect();
                let coded: Vec<i8> = code.encode(&info)?.iter().map(|&c| 2 * c as i8 - 1).collect();
                let apr = gen_apriori(&coded, ia, table, &mut rng, Side::Decoder, Signal::Desired)?;
                let dec = code.decode(&apr, inner_iterations)?;
                llrs.extend(dec.extrinsic.values);
                truth.extend(coded);
            }
            Ok((ia, mutual_information(&llrs, &truth)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransferCurve {
        label: format!("turbo R={} {} iterations", code.rate(), inner_iterations),
        points,
    })
}

/// MI at which the decoder output counts as converged.
pub const CONVERGENCE_MI: f64 = 0.999;

/// Staircase between a detector and a decoder curve. Points are in
/// (detector a-priori, detector extrinsic) coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub points: Vec<(f64, f64)>,
    /// Detector–decoder iterations carried out.
    pub iterations: usize,
    pub converged: bool,
    /// Final decoder extrinsic MI.
    pub final_mi: f64,
}

/// Alternates detector and decoder starting from zero a-priori MI. Stops
/// when the decoder output reaches [`CONVERGENCE_MI`], when an iteration
/// makes no progress, or after `max_iterations`.
pub fn trajectory(detector: &TransferCurve, decoder: &TransferCurve, max_iterations: usize) -> Result<Trajectory> {
    if detector.points.is_empty() || decoder.points.is_empty() {
        return Err(Error::Empty("transfer curve"));
    }
    let mut points = vec![(0.0, 0.0)];
    let (mut x, mut last_y) = (0.0f64, 0.0f64);
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iterations {
        let y = detector.eval(x);
        if iterations > 0 && y <= last_y {
            break;
        }
        let next_x = decoder.eval(y);
        iterations += 1;
        points.push((x, y));
        points.push((next_x, y));
        last_y = y;
        let progressed = next_x > x;
        x = next_x;
        if x >= CONVERGENCE_MI {
            converged = true;
            break;
        }
        if !progressed {
            break;
        }
    }
    Ok(Trajectory {
        points,
        iterations,
        converged,
        final_mi: x,
    })
}
