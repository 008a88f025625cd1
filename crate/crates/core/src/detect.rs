//! Soft-output detectors for the two-user interference channel.
//!
//! Every detector here is an exhaustive sweep over joint hypotheses
//! `(x_D, x_I)` with metric
//!
//! ```text
//! D(x) = −‖y − √P_D H_D x_D − √P_I H_I x_I‖² + ½ b_Dᵀ L_D + ½ b_Iᵀ L_I
//! ```
//!
//! (noise variance 1). Extrinsic LLRs drop each target bit's own prior term
//! before marginalizing, exactly (log-sum-exp) or with the max-log rule.
//! Interference whitening reuses the same sweep with the interference
//! removed from the model after whitening.

use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::llr::{clamp_llr, LlrBlock, Role, Side, Signal};
use crate::modem::{hypothesis_labels, Constellation};
use crate::numerics::ComplexMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectionMode {
    Exact,
    MaxLog,
}

impl FromStr for DetectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exact" | "logmap" => Ok(DetectionMode::Exact),
            "maxlog" => Ok(DetectionMode::MaxLog),
            other => Err(Error::InvalidParameter(format!("unknown detection mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetectionMode::Exact => "exact",
            DetectionMode::MaxLog => "maxlog",
        })
    }
}

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Running maximum or log-sum-exp.
#[derive(Clone, Copy, Debug)]
struct Accum {
    max: f64,
    sum: f64,
}

impl Accum {
    const EMPTY: Accum = Accum { max: NEG_INF, sum: 0.0 };

    #[inline]
    fn push_max(&mut self, v: f64) {
        if v > self.max {
            self.max = v;
        }
    }

    #[inline]
    fn push_lse(&mut self, v: f64) {
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    #[inline]
    fn value(&self, mode: DetectionMode) -> f64 {
        match mode {
            DetectionMode::MaxLog => self.max,
            DetectionMode::Exact => self.max + self.sum.ln(),
        }
    }
}

/// Hypothesis tables for one signal: `√P H x` for every symbol vector and
/// the bipolar bit labels of that vector.
#[derive(Clone, Debug)]
struct SignalTable {
    count: usize,
    bits: usize,
    /// `re[r][h]`, `im[r][h]`: component `r` of the noiseless contribution.
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    /// Row-major `count × bits` bipolar labels.
    labels: Vec<i8>,
}

impl SignalTable {
    fn new(h: &ComplexMatrix, power: f64, c: &Constellation) -> Self {
        let streams = h.cols();
        let nr = h.rows();
        let count = c.order().pow(streams as u32);
        let n = c.bits_per_symbol();
        let amp = power.sqrt();
        let mut re = vec![vec![0.0; count]; nr];
        let mut im = vec![vec![0.0; count]; nr];
        let mut labels = Vec::with_capacity(count * n * streams);
        for hyp in 0..count {
            let syms = hypothesis_labels(hyp, c.order(), streams);
            let x: Vec<Complex64> = syms.iter().map(|&l| c.point(l)).collect();
            let s = h.mul_vec(&x).expect("dimensions agree");
            for r in 0..nr {
                re[r][hyp] = s[r].re * amp;
                im[r][hyp] = s[r].im * amp;
            }
            for &l in &syms {
                labels.extend((0..n).map(|b| c.bit(l, b)));
            }
        }
        Self {
            count,
            bits: n * streams,
            re,
            im,
            labels,
        }
    }

    /// Single all-zero hypothesis carrying no bits.
    fn empty(nr: usize) -> Self {
        Self {
            count: 1,
            bits: 0,
            re: vec![vec![0.0]; nr],
            im: vec![vec![0.0]; nr],
            labels: Vec::new(),
        }
    }

    fn prior_terms(&self, priors: &[f64]) -> Vec<f64> {
        if priors.is_empty() || self.bits == 0 {
            return vec![0.0; self.count];
        }
        self.labels
            .chunks(self.bits)
            .map(|lab| 0.5 * lab.iter().zip(priors).map(|(&b, &l)| b as f64 * l).sum::<f64>())
            .collect()
    }

    /// Extrinsic LLRs from per-hypothesis marginals (own prior removed).
    fn bit_llrs(&self, marginal: &[Accum], priors: &[f64], mode: DetectionMode) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bits);
        let vals: Vec<f64> = marginal.iter().map(|a| a.value(mode)).collect();
        for k in 0..self.bits {
            let half = 0.5 * priors.get(k).copied().unwrap_or(0.0);
            let mut plus = Accum::EMPTY;
            let mut minus = Accum::EMPTY;
            for (h, &v) in vals.iter().enumerate() {
                let b = self.labels[h * self.bits + k];
                let acc = if b > 0 { &mut plus } else { &mut minus };
                let v = v - b as f64 * half;
                match mode {
                    DetectionMode::MaxLog => acc.push_max(v),
                    DetectionMode::Exact => acc.push_lse(v),
                }
            }
            out.push(clamp_llr(plus.value(mode) - minus.value(mode)));
        }
        out
    }
}

/// Which signals' extrinsic LLRs a sweep should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Targets {
    pub desired: bool,
    pub interference: bool,
}

impl Targets {
    pub const DESIRED: Targets = Targets {
        desired: true,
        interference: false,
    };
    pub const INTERFERENCE: Targets = Targets {
        desired: false,
        interference: true,
    };
    pub const BOTH: Targets = Targets {
        desired: true,
        interference: true,
    };

    pub fn only(signal: Signal) -> Self {
        match signal {
            Signal::Desired => Self::DESIRED,
            Signal::Interference => Self::INTERFERENCE,
        }
    }
}

/// Result of one hypothesis sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepOutput {
    pub desired: Option<Vec<f64>>,
    pub interference: Option<Vec<f64>>,
    /// Number of joint hypotheses visited.
    pub hypotheses: u64,
}

/// Precomputed joint detector for one channel realization. Build once per
/// fading block, then call [`JointDetector::sweep`] per received vector.
#[derive(Clone, Debug)]
pub struct JointDetector {
    nr: usize,
    desired: SignalTable,
    interference: SignalTable,
}

impl JointDetector {
    /// Joint detector over desired and interference hypotheses.
    pub fn interference_aware(ch: &ChannelRealization, desired: &Constellation, interference: &Constellation) -> Self {
        Self {
            nr: ch.rx_antennas(),
            desired: SignalTable::new(&ch.h_desired, ch.p_desired, desired),
            interference: SignalTable::new(&ch.h_interference, ch.p_interference, interference),
        }
    }

    /// Point-to-point detector for the desired signal only, e.g. on a
    /// whitened channel.
    pub fn point_to_point(h: &ComplexMatrix, power: f64, desired: &Constellation) -> Self {
        Self {
            nr: h.rows(),
            desired: SignalTable::new(h, power, desired),
            interference: SignalTable::empty(h.rows()),
        }
    }

    pub fn desired_bits(&self) -> usize {
        self.desired.bits
    }

    pub fn interference_bits(&self) -> usize {
        self.interference.bits
    }

    pub fn hypotheses(&self) -> usize {
        self.desired.count * self.interference.count
    }

    /// One sweep over all joint hypotheses. Empty prior slices mean zero
    /// priors.
    pub fn sweep(&self, y: &[Complex64], prior_d: &[f64], prior_i: &[f64], mode: DetectionMode, targets: Targets) -> Result<SweepOutput> {
        if y.len() != self.nr {
            return Err(Error::LengthMismatch {
                what: "received vector",
                expected: self.nr,
                actual: y.len(),
            });
        }
        for (what, p, bits) in [
            ("desired priors", prior_d, self.desired.bits),
            ("interference priors", prior_i, self.interference.bits),
        ] {
            if !p.is_empty() && p.len() != bits {
                return Err(Error::LengthMismatch {
                    what,
                    expected: bits,
                    actual: p.len(),
                });
            }
        }
        let prior_d: Vec<f64> = prior_d.iter().map(|&v| clamp_llr(v)).collect();
        let prior_i: Vec<f64> = prior_i.iter().map(|&v| clamp_llr(v)).collect();
        let pd = self.desired.prior_terms(&prior_d);
        let pi = self.interference.prior_terms(&prior_i);

        let (nd, ni) = (self.desired.count, self.interference.count);
        let mut rows = vec![Accum::EMPTY; nd];
        let mut cols = vec![Accum::EMPTY; if targets.interference { ni } else { 0 }];
        let mut buf = vec![0.0; ni];
        for (hd, row) in rows.iter_mut().enumerate() {
            buf.copy_from_slice(&pi);
            for r in 0..self.nr {
                let ar = y[r].re - self.desired.re[r][hd];
                let ai = y[r].im - self.desired.im[r][hd];
                let (ire, iim) = (&self.interference.re[r], &self.interference.im[r]);
                for ((b, &xr), &xi) in buf.iter_mut().zip(ire).zip(iim) {
                    let dr = ar - xr;
                    let di = ai - xi;
                    *b -= dr * dr + di * di;
                }
            }
            let base = pd[hd];
            match mode {
                DetectionMode::MaxLog => {
                    let m = buf.iter().cloned().fold(NEG_INF, f64::max);
                    row.push_max(m + base);
                    for (c, &b) in cols.iter_mut().zip(&buf) {
                        c.push_max(b + base);
                    }
                }
                DetectionMode::Exact => {
                    let m = buf.iter().cloned().fold(NEG_INF, f64::max);
                    let s: f64 = buf.iter().map(|&b| (b - m).exp()).sum();
                    *row = Accum { max: m + base, sum: s };
                    for (c, &b) in cols.iter_mut().zip(&buf) {
                        c.push_lse(b + base);
                    }
                }
            }
        }
        Ok(SweepOutput {
            desired: targets.desired.then(|| self.desired.bit_llrs(&rows, &prior_d, mode)),
            interference: targets.interference.then(|| self.interference.bit_llrs(&cols, &prior_i, mode)),
            hypotheses: (nd * ni) as u64,
        })
    }
}

/// Everything a detector needs for one received vector.
#[derive(Clone, Copy, Debug)]
pub struct DetectorInput<'a> {
    pub y: &'a [Complex64],
    pub channel: &'a ChannelRealization,
    pub desired: &'a Constellation,
    pub interference: &'a Constellation,
    pub priors_desired: Option<&'a LlrBlock>,
    pub priors_interference: Option<&'a LlrBlock>,
    pub mode: DetectionMode,
}

impl<'a> DetectorInput<'a> {
    pub fn new(y: &'a [Complex64], channel: &'a ChannelRealization, desired: &'a Constellation, interference: &'a Constellation, mode: DetectionMode) -> Self {
        Self {
            y,
            channel,
            desired,
            interference,
            priors_desired: None,
            priors_interference: None,
            mode,
        }
    }

    pub fn with_priors(mut self, desired: Option<&'a LlrBlock>, interference: Option<&'a LlrBlock>) -> Self {
        self.priors_desired = desired;
        self.priors_interference = interference;
        self
    }

    fn prior_values(&self, signal: Signal) -> Result<&'a [f64]> {
        let block = match signal {
            Signal::Desired => self.priors_desired,
            Signal::Interference => self.priors_interference,
        };
        match block {
            None => Ok(&[]),
            Some(b) => {
                b.expect_tags(Role::APriori, Side::Detector, signal)?;
                Ok(&b.values)
            }
        }
    }
}

fn extrinsic(values: Vec<f64>, signal: Signal) -> LlrBlock {
    LlrBlock::new(values, Role::Extrinsic, Side::Detector, signal)
}

/// Whitening of the interference-plus-noise term: returns `R_v^{-1/2} y`
/// and `R_v^{-1/2} H_D` with `R_v = P_I H_I H_I† + I`.
pub fn whiten(y: &[Complex64], ch: &ChannelRealization) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let w = whitening_matrix(ch)?;
    Ok((w.mul_vec(y)?, w.matmul(&ch.h_desired)?))
}

/// `R_v^{-1/2}` for a channel realization.
pub fn whitening_matrix(ch: &ChannelRealization) -> Result<ComplexMatrix> {
    let w = ch.interference_covariance().hermitian_inv_sqrt()?;
    Ok(w)
}

/// Interference-whitening detector: ML on the whitened point-to-point
/// model. Priors in `input` are ignored.
pub fn iw_llr(input: &DetectorInput) -> Result<LlrBlock> {
    let (yw, hw) = whiten(input.y, input.channel)?;
    let det = JointDetector::point_to_point(&hw, input.channel.p_desired, input.desired);
    let out = det.sweep(&yw, &[], &[], input.mode, Targets::DESIRED)?;
    Ok(extrinsic(out.desired.expect("requested"), Signal::Desired))
}

/// Interference-aware detection of the desired bits without priors.
pub fn ia_llr(input: &DetectorInput) -> Result<LlrBlock> {
    let det = JointDetector::interference_aware(input.channel, input.desired, input.interference);
    let out = det.sweep(input.y, &[], &[], input.mode, Targets::DESIRED)?;
    Ok(extrinsic(out.desired.expect("requested"), Signal::Desired))
}

/// Interference-aware detection with a-priori LLRs on both signals,
/// producing extrinsic LLRs for the target signal's bits.
pub fn prior_aware_llr(input: &DetectorInput, target: Signal) -> Result<LlrBlock> {
    let det = JointDetector::interference_aware(input.channel, input.desired, input.interference);
    let out = det.sweep(
        input.y,
        input.prior_values(Signal::Desired)?,
        input.prior_values(Signal::Interference)?,
        input.mode,
        Targets::only(target),
    )?;
    let values = match target {
        Signal::Desired => out.desired,
        Signal::Interference => out.interference,
    };
    Ok(extrinsic(values.expect("requested"), target))
}

/// Desired and interference extrinsic LLRs from one shared sweep.
pub fn joint_llr(input: &DetectorInput) -> Result<(LlrBlock, LlrBlock)> {
    let det = JointDetector::interference_aware(input.channel, input.desired, input.interference);
    let out = det.sweep(
        input.y,
        input.prior_values(Signal::Desired)?,
        input.prior_values(Signal::Interference)?,
        input.mode,
        Targets::BOTH,
    )?;
    Ok((
        extrinsic(out.desired.expect("requested"), Signal::Desired),
        extrinsic(out.interference.expect("requested"), Signal::Interference),
    ))
}
