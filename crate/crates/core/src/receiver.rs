//! Packet-level transmit chain and the receiver schedules built from the
//! detectors and the turbo decoder.
//!
//! A packet carries one desired codeword per spatial stream. The desired
//! codeword length fixes the frame length in symbol vectors; the
//! interfering transmitter fills the same frame with its own continuous
//! stream of codewords (the last one may be cut off at the frame end, its
//! missing bits reach the decoder as zero LLRs). Symbol vector `t` is sent
//! on subcarrier `t mod subcarriers`, and every subcarrier has its own
//! independent block-fading pair `(H_D, H_I)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{sample_channel, transmit, ChannelRealization, Scenario, NOISE_VARIANCE};
use crate::detect::{whitening_matrix, DetectionMode, JointDetector, Targets};
use crate::llr::{LlrBlock, Role, Side, Signal};
use crate::modem::{ChannelInterleaver, Constellation};
use crate::numerics::RngStream;
use crate::turbo::{TurboCode, TurboDecoding};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReceiverKind {
    /// Interference whitening, no feedback.
    Iw,
    /// Interference-aware detection, no feedback.
    IaDet,
    /// Iterative interference-aware detection: desired signal only.
    Iiad,
    /// Interference-aware successive decoding.
    Iasd,
    /// Interference-aware parallel decoding.
    Iapd,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 5] = [
        ReceiverKind::Iw,
        ReceiverKind::IaDet,
        ReceiverKind::Iiad,
        ReceiverKind::Iasd,
        ReceiverKind::Iapd,
    ];

    /// `(inner, outer)` iteration defaults.
    pub fn default_iterations(self) -> (usize, usize) {
        match self {
            ReceiverKind::Iw | ReceiverKind::IaDet => (8, 1),
            _ => (4, 2),
        }
    }

    pub fn decodes_interference(self) -> bool {
        matches!(self, ReceiverKind::Iasd | ReceiverKind::Iapd)
    }

    pub fn is_iterative(self) -> bool {
        !matches!(self, ReceiverKind::Iw | ReceiverKind::IaDet)
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReceiverKind::Iw => "IW",
            ReceiverKind::IaDet => "IADET",
            ReceiverKind::Iiad => "IIAD",
            ReceiverKind::Iasd => "IASD",
            ReceiverKind::Iapd => "IAPD",
        })
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "IW" => Ok(ReceiverKind::Iw),
            "IADET" | "IADETECTION" | "IA" => Ok(ReceiverKind::IaDet),
            "IIAD" => Ok(ReceiverKind::Iiad),
            "IASD" => Ok(ReceiverKind::Iasd),
            "IAPD" => Ok(ReceiverKind::Iapd),
            other => Err(Error::InvalidParameter(format!("unknown receiver '{other}'"))),
        }
    }
}

/// Outcome of one packet trial.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketResult {
    pub desired_ok: bool,
    /// `None` when the receiver does not decode the interference.
    pub interference_ok: Option<bool>,
    pub desired_codewords: Vec<bool>,
    pub interference_codewords: Vec<bool>,
    pub detector_passes: usize,
    pub decoder_runs: usize,
    /// Mean |LLR| of the final desired a-posteriori output.
    pub mean_abs_llr: f64,
}

impl PacketResult {
    pub fn packet_error(&self) -> bool {
        !self.desired_ok
    }
}

// Purpose tags for per-packet random streams.
const TAG_DESIRED_BITS: u8 = 1;
const TAG_INTERFERENCE_BITS: u8 = 2;
const TAG_CHANNEL: u8 = 3;
const TAG_NOISE: u8 = 4;
const TAG_DESIRED_FILL: u8 = 5;
const TAG_INTERFERENCE_FILL: u8 = 6;
const INTERLEAVER_SEED_SALT: u64 = 0x1a5d_1a5d;

/// One codeword's place inside a stream's frame.
#[derive(Clone, Debug)]
struct CodewordSlot {
    offset: usize,
    /// Coded bits that fit in the frame.
    observed: usize,
    interleaver: ChannelInterleaver,
}

/// Static BICM layout of one transmitter.
#[derive(Clone, Debug)]
struct SignalChain {
    signal: Signal,
    constellation: Constellation,
    code: TurboCode,
    frame_bits: usize,
    /// Slots per spatial stream.
    streams: Vec<Vec<CodewordSlot>>,
}

impl SignalChain {
    fn new(signal: Signal, scenario: &Scenario, frame_len: usize) -> Result<Self> {
        let cfg = match signal {
            Signal::Desired => scenario.desired,
            Signal::Interference => scenario.interference,
        };
        let constellation = Constellation::new(cfg.modulation);
        let code = TurboCode::new(scenario.info_bits, cfg.rate)?;
        let n_c = code.coded_len();
        let frame_bits = frame_len * constellation.bits_per_symbol();
        // the desired frame is sized for one codeword plus filler; the
        // interferer sends codewords back to back
        let per_stream = match signal {
            Signal::Desired => 1,
            Signal::Interference => frame_bits.div_ceil(n_c),
        };
        let sig_tag = match signal {
            Signal::Desired => 0u64,
            Signal::Interference => 1u64,
        };
        let streams = (0..scenario.streams)
            .map(|m| {
                (0..per_stream)
                    .map(|j| CodewordSlot {
                        offset: j * n_c,
                        observed: n_c.min(frame_bits - j * n_c),
                        interleaver: ChannelInterleaver::random(
                            code.systematic_len(),
                            n_c - code.systematic_len(),
                            scenario.seed ^ INTERLEAVER_SEED_SALT,
                            (sig_tag << 32) | ((m as u64) << 16) | j as u64,
                        ),
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            signal,
            constellation,
            code,
            frame_bits,
            streams,
        })
    }

    fn codewords(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }

    /// Info bits per codeword (stream-major) and bipolar frame bits per stream.
    fn generate(&self, seed: u64, packet: u64, bit_tag: u8, fill_tag: u8) -> Result<(Vec<Vec<u8>>, Vec<Vec<i8>>)> {
        let mut info_all = Vec::with_capacity(self.codewords());
        let mut frames = Vec::with_capacity(self.streams.len());
        for (m, slots) in self.streams.iter().enumerate() {
            let mut frame = vec![0i8; self.frame_bits];
            for (j, slot) in slots.iter().enumerate() {
                let mut rng = RngStream::for_trial(seed, packet, bit_tag, ((m as u32) << 16) | j as u32).generator();
                let info: Vec<u8> = (0..self.code.info_len()).map(|_| rng.random_range(0..2u8)).collect();
                let coded = slot.interleaver.interleave(&self.code.encode(&info)?)?;
                for (dst, &c) in frame[slot.offset..slot.offset + slot.observed].iter_mut().zip(&coded) {
                    *dst = 2 * c as i8 - 1;
                }
                info_all.push(info);
            }
            let used = slots.last().map_or(0, |s| s.offset + s.observed);
            if used < self.frame_bits {
                let mut rng = RngStream::for_trial(seed, packet, fill_tag, m as u32).generator();
                for b in &mut frame[used..] {
                    *b = if rng.random::<bool>() { 1 } else { -1 };
                }
            }
            frames.push(frame);
        }
        Ok((info_all, frames))
    }

    /// Symbol vector `t` from per-stream frame bits.
    fn symbols(&self, frames: &[Vec<i8>], t: usize) -> Vec<Complex64> {
        let n = self.constellation.bits_per_symbol();
        frames
            .iter()
            .map(|f| self.constellation.point(self.constellation.label_of_bits(&f[t * n..(t + 1) * n])))
            .collect()
    }

    /// Detector extrinsic frame LLRs -> decoder a-priori blocks per codeword.
    fn to_decoder(&self, frame_llrs: &[LlrBlock]) -> Result<Vec<LlrBlock>> {
        let mut out = Vec::with_capacity(self.codewords());
        for (slots, frame) in self.streams.iter().zip(frame_llrs) {
            frame.expect_tags(Role::Extrinsic, Side::Detector, self.signal)?;
            for slot in slots {
                let mut llr = vec![0.0; self.code.coded_len()];
                llr[..slot.observed].copy_from_slice(&frame.values[slot.offset..slot.offset + slot.observed]);
                let values = slot.interleaver.deinterleave(&llr)?;
                out.push(LlrBlock::new(values, Role::APriori, Side::Decoder, self.signal));
            }
        }
        Ok(out)
    }

    /// Decoder extrinsic blocks per codeword -> detector a-priori frame LLRs.
    fn to_detector(&self, decoded: &[TurboDecoding]) -> Result<Vec<LlrBlock>> {
        let mut it = decoded.iter();
        let mut out = Vec::with_capacity(self.streams.len());
        for slots in &self.streams {
            let mut frame = vec![0.0; self.frame_bits];
            for slot in slots {
                let dec = it.next().ok_or(Error::LengthMismatch {
                    what: "decoded codewords",
                    expected: self.codewords(),
                    actual: decoded.len(),
                })?;
                dec.extrinsic.expect_tags(Role::Extrinsic, Side::Decoder, self.signal)?;
                let llr = slot.interleaver.interleave(&dec.extrinsic.values)?;
                frame[slot.offset..slot.offset + slot.observed].copy_from_slice(&llr[..slot.observed]);
            }
            out.push(LlrBlock::new(frame, Role::APriori, Side::Detector, self.signal));
        }
        Ok(out)
    }

    fn decode(&self, frame_llrs: &[LlrBlock], iterations: usize) -> Result<Vec<TurboDecoding>> {
        self.to_decoder(frame_llrs)?
            .iter()
            .map(|blk| self.code.decode(blk, iterations))
            .collect()
    }

    /// Per-vector prior slice gathered across streams.
    fn gather(&self, frames: Option<&[LlrBlock]>, t: usize, out: &mut Vec<f64>) {
        out.clear();
        if let Some(frames) = frames {
            let n = self.constellation.bits_per_symbol();
            for f in frames {
                out.extend_from_slice(&f.values[t * n..(t + 1) * n]);
            }
        }
    }

    fn scatter(&self, llrs: &[f64], t: usize, frames: &mut [Vec<f64>]) {
        let n = self.constellation.bits_per_symbol();
        for (m, f) in frames.iter_mut().enumerate() {
            f[t * n..(t + 1) * n].copy_from_slice(&llrs[m * n..(m + 1) * n]);
        }
    }
}

/// Static link description shared by all packet trials of a scenario.
#[derive(Clone, Debug)]
pub struct Link {
    scenario: Scenario,
    desired: SignalChain,
    interference: SignalChain,
    frame_len: usize,
}

/// What the receiver observes for one packet, plus the transmitted truth
/// used only to score the result.
#[derive(Clone, Debug)]
pub struct Reception {
    pub received: Vec<Vec<Complex64>>,
    pub channels: Vec<ChannelRealization>,
    pub desired_info: Vec<Vec<u8>>,
    pub interference_info: Vec<Vec<u8>>,
}

impl Link {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let code = TurboCode::new(scenario.info_bits, scenario.desired.rate)?;
        let frame_len = code.coded_len().div_ceil(scenario.desired.modulation.bits_per_symbol());
        Ok(Self {
            scenario: scenario.clone(),
            desired: SignalChain::new(Signal::Desired, scenario, frame_len)?,
            interference: SignalChain::new(Signal::Interference, scenario, frame_len)?,
            frame_len,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Symbol vectors per packet.
    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    /// Interference codewords overlapping one packet.
    pub fn interference_codewords(&self) -> usize {
        self.interference.codewords()
    }

    /// Generates transmitted data, channels and received vectors for one
    /// packet. Bits, fading and noise depend only on `(seed, packet)`, so
    /// the same packet index gives common random numbers across SNR points
    /// and receivers.
    pub fn receive(&self, packet: u64, snr_db: f64) -> Result<Reception> {
        let s = &self.scenario;
        let (desired_info, d_frames) = self.desired.generate(s.seed, packet, TAG_DESIRED_BITS, TAG_DESIRED_FILL)?;
        let (interference_info, i_frames) =
            self.interference
                .generate(s.seed, packet, TAG_INTERFERENCE_BITS, TAG_INTERFERENCE_FILL)?;
        let (p_d, p_i) = s.powers(snr_db);
        let channels = (0..s.subcarriers)
            .map(|k| {
                let mut rng = RngStream::for_trial(s.seed, packet, TAG_CHANNEL, k as u32).generator();
                let hd = sample_channel(&mut rng, s.rx_antennas, s.streams)?;
                let hi = sample_channel(&mut rng, s.rx_antennas, s.streams)?;
                ChannelRealization::new(hd, hi, p_d, p_i)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut noise_rng = RngStream::for_trial(s.seed, packet, TAG_NOISE, 0).generator();
        let variance = if s.noiseless { 0.0 } else { NOISE_VARIANCE };
        let received = (0..self.frame_len)
            .map(|t| {
                let xd = self.desired.symbols(&d_frames, t);
                let xi = self.interference.symbols(&i_frames, t);
                transmit(&xd, &xi, &channels[t % s.subcarriers], &mut noise_rng, variance)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Reception {
            received,
            channels,
            desired_info,
            interference_info,
        })
    }

    /// Simulates one packet with the scenario's receiver.
    pub fn run_packet(&self, packet: u64, snr_db: f64) -> Result<PacketResult> {
        let rx = self.receive(packet, snr_db)?;
        self.run(self.scenario.receiver, &rx)
    }

    pub fn run(&self, kind: ReceiverKind, rx: &Reception) -> Result<PacketResult> {
        let outer = self.scenario.outer_iterations;
        match kind {
            ReceiverKind::Iw => self.run_iw(rx),
            ReceiverKind::IaDet => self.run_iadet(rx),
            ReceiverKind::Iiad => self.run_successive(rx, outer, false),
            ReceiverKind::Iasd => self.run_successive(rx, outer, true),
            ReceiverKind::Iapd => self.run_iapd(rx, outer),
        }
    }

    fn joint_detectors(&self, rx: &Reception) -> Vec<JointDetector> {
        rx.channels
            .iter()
            .map(|ch| JointDetector::interference_aware(ch, &self.desired.constellation, &self.interference.constellation))
            .collect()
    }

    /// Runs one detector sweep per symbol vector and assembles frame LLRs.
    fn detect_frame(
        &self,
        detectors: &[JointDetector],
        received: &[Vec<Complex64>],
        prior_d: Option<&[LlrBlock]>,
        prior_i: Option<&[LlrBlock]>,
        targets: Targets,
    ) -> Result<(Vec<LlrBlock>, Vec<LlrBlock>)> {
        let s = &self.scenario;
        let mut out_d = vec![vec![0.0; self.desired.frame_bits]; if targets.desired { s.streams } else { 0 }];
        let mut out_i = vec![vec![0.0; self.interference.frame_bits]; if targets.interference { s.streams } else { 0 }];
        let (mut pd, mut pi) = (Vec::new(), Vec::new());
        for (t, y) in received.iter().enumerate() {
            self.desired.gather(prior_d, t, &mut pd);
            self.interference.gather(prior_i, t, &mut pi);
            let det = &detectors[t % s.subcarriers];
            let out = det.sweep(y, &pd, &pi, s.mode, targets)?;
            if let Some(d) = out.desired {
                self.desired.scatter(&d, t, &mut out_d);
            }
            if let Some(i) = out.interference {
                self.interference.scatter(&i, t, &mut out_i);
            }
        }
        let wrap = |frames: Vec<Vec<f64>>, sig| {
            frames
                .into_iter()
                .map(|v| LlrBlock::new(v, Role::Extrinsic, Side::Detector, sig))
                .collect()
        };
        Ok((wrap(out_d, Signal::Desired), wrap(out_i, Signal::Interference)))
    }

    fn check(truth: &[Vec<u8>], decoded: &[TurboDecoding]) -> Vec<bool> {
        truth.iter().zip(decoded).map(|(t, d)| *t == d.info_bits).collect()
    }

    fn result(
        &self,
        rx: &Reception,
        desired: &[TurboDecoding],
        interference: Option<&[TurboDecoding]>,
        detector_passes: usize,
        decoder_runs: usize,
    ) -> PacketResult {
        let desired_codewords = Self::check(&rx.desired_info, desired);
        let interference_codewords = interference.map(|i| Self::check(&rx.interference_info, i)).unwrap_or_default();
        let llr_count: usize = desired.iter().map(|d| d.a_posteriori.len()).sum();
        let mean_abs_llr = desired.iter().map(|d| d.a_posteriori.mean_abs() * d.a_posteriori.len() as f64).sum::<f64>()
            / llr_count.max(1) as f64;
        PacketResult {
            desired_ok: desired_codewords.iter().all(|&ok| ok),
            interference_ok: interference.map(|_| interference_codewords.iter().all(|&ok| ok)),
            desired_codewords,
            interference_codewords,
            detector_passes,
            decoder_runs,
            mean_abs_llr,
        }
    }

    /// Whitening + point-to-point ML, then one decoding of the desired signal.
    pub fn run_iw(&self, rx: &Reception) -> Result<PacketResult> {
        let s = &self.scenario;
        let mut detectors = Vec::with_capacity(rx.channels.len());
        let mut whiteners = Vec::with_capacity(rx.channels.len());
        for ch in &rx.channels {
            let w = whitening_matrix(ch)?;
            let hw = w.matmul(&ch.h_desired)?;
            detectors.push(JointDetector::point_to_point(&hw, ch.p_desired, &self.desired.constellation));
            whiteners.push(w);
        }
        let whitened = rx
            .received
            .iter()
            .enumerate()
            .map(|(t, y)| whiteners[t % s.subcarriers].mul_vec(y))
            .collect::<Result<Vec<_>>>()?;
        let (ext, _) = self.detect_frame(&detectors, &whitened, None, None, Targets::DESIRED)?;
        let dec = self.desired.decode(&ext, s.inner_iterations)?;
        Ok(self.result(rx, &dec, None, 1, dec.len()))
    }

    /// Interference-aware detection, then one decoding of the desired signal.
    pub fn run_iadet(&self, rx: &Reception) -> Result<PacketResult> {
        let detectors = self.joint_detectors(rx);
        let (ext, _) = self.detect_frame(&detectors, &rx.received, None, None, Targets::DESIRED)?;
        let dec = self.desired.decode(&ext, self.scenario.inner_iterations)?;
        Ok(self.result(rx, &dec, None, 1, dec.len()))
    }

    /// Successive schedule: decode D, then `outer − 1` rounds of
    /// (decode I with D prior, re-decode D with both priors). Without
    /// interference decoding this is IIAD; the interference prior stays zero.
    pub fn run_successive(&self, rx: &Reception, outer: usize, decode_interference: bool) -> Result<PacketResult> {
        let inner = self.scenario.inner_iterations;
        let detectors = self.joint_detectors(rx);
        let (ext, _) = self.detect_frame(&detectors, &rx.received, None, None, Targets::DESIRED)?;
        let mut dec_d = self.desired.decode(&ext, inner)?;
        let mut prior_d = self.desired.to_detector(&dec_d)?;
        let mut prior_i: Option<Vec<LlrBlock>> = None;
        let mut dec_i: Option<Vec<TurboDecoding>> = None;
        let (mut passes, mut runs) = (1, dec_d.len());
        for _ in 1..outer {
            if decode_interference {
                let (_, ext_i) = self.detect_frame(&detectors, &rx.received, Some(&prior_d), prior_i.as_deref(), Targets::INTERFERENCE)?;
                let d = self.interference.decode(&ext_i, inner)?;
                prior_i = Some(self.interference.to_detector(&d)?);
                passes += 1;
                runs += d.len();
                dec_i = Some(d);
            }
            let (ext_d, _) = self.detect_frame(&detectors, &rx.received, Some(&prior_d), prior_i.as_deref(), Targets::DESIRED)?;
            dec_d = self.desired.decode(&ext_d, inner)?;
            prior_d = self.desired.to_detector(&dec_d)?;
            passes += 1;
            runs += dec_d.len();
        }
        Ok(self.result(rx, &dec_d, if decode_interference { dec_i.as_deref().or(Some(&[])) } else { None }, passes, runs))
    }

    pub fn run_iasd(&self, rx: &Reception) -> Result<PacketResult> {
        self.run_successive(rx, self.scenario.outer_iterations, true)
    }

    pub fn run_iiad(&self, rx: &Reception) -> Result<PacketResult> {
        self.run_successive(rx, self.scenario.outer_iterations, false)
    }

    /// Parallel schedule: every outer iteration runs one joint sweep for
    /// both signals and decodes both, feeding both extrinsics back.
    pub fn run_iapd(&self, rx: &Reception, outer: usize) -> Result<PacketResult> {
        let inner = self.scenario.inner_iterations;
        let detectors = self.joint_detectors(rx);
        let mut prior_d: Option<Vec<LlrBlock>> = None;
        let mut prior_i: Option<Vec<LlrBlock>> = None;
        let mut last = None;
        for _ in 0..outer {
            let (ext_d, ext_i) = self.detect_frame(&detectors, &rx.received, prior_d.as_deref(), prior_i.as_deref(), Targets::BOTH)?;
            let (dec_d, dec_i) = rayon::join(
                || self.desired.decode(&ext_d, inner),
                || self.interference.decode(&ext_i, inner),
            );
            let (dec_d, dec_i) = (dec_d?, dec_i?);
            prior_d = Some(self.desired.to_detector(&dec_d)?);
            prior_i = Some(self.interference.to_detector(&dec_i)?);
            last = Some((dec_d, dec_i));
        }
        let (dec_d, dec_i) = last.ok_or_else(|| Error::InvalidParameter("IAPD needs at least one outer iteration".into()))?;
        Ok(self.result(rx, &dec_d, Some(&dec_i), outer, outer * (dec_d.len() + dec_i.len())))
    }
}

/// Detection mode helper for callers that only hold a receiver kind.
pub fn default_mode() -> DetectionMode {
    DetectionMode::MaxLog
}
