//! Two-user MIMO Gaussian interference channel
//! `y = √P_D H_D x_D + √P_I H_I x_I + n` with `n ~ CN(0, I)`.

use num_complex::Complex64;
use rand::Rng;

use crate::detect::DetectionMode;
use crate::modem::Modulation;
use crate::numerics::{gaussian_complex, ComplexMatrix};
use crate::receiver::ReceiverKind;
use crate::{Error, Result};

/// Per-component noise variance; SNR is carried entirely by `P_D`.
pub const NOISE_VARIANCE: f64 = 1.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `(P_D, P_I)` for a per-stream SNR and SIR in dB.
pub fn powers_from_db(snr_db: f64, sir_db: f64) -> (f64, f64) {
    let p_d = db_to_linear(snr_db);
    (p_d, p_d * db_to_linear(-sir_db))
}

/// Channel matrices and powers seen by the receiver during one fading block.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h_desired: ComplexMatrix,
    pub h_interference: ComplexMatrix,
    pub p_desired: f64,
    pub p_interference: f64,
}

impl ChannelRealization {
    pub fn new(h_desired: ComplexMatrix, h_interference: ComplexMatrix, p_desired: f64, p_interference: f64) -> Result<Self> {
        if !(p_desired > 0.0) || !(p_interference >= 0.0) || !p_desired.is_finite() || !p_interference.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "powers must satisfy P_D > 0 and P_I >= 0, got {p_desired} and {p_interference}"
            )));
        }
        if h_desired.rows() != h_interference.rows() {
            return Err(Error::DimensionMismatch(format!(
                "desired channel has {} receive antennas, interference channel {}",
                h_desired.rows(),
                h_interference.rows()
            )));
        }
        Ok(Self {
            h_desired,
            h_interference,
            p_desired,
            p_interference,
        })
    }

    pub fn rx_antennas(&self) -> usize {
        self.h_desired.rows()
    }

    /// Interference-plus-noise covariance `P_I H_I H_I† + I`.
    pub fn interference_covariance(&self) -> ComplexMatrix {
        let h = &self.h_interference;
        let hh = h * &h.adjoint();
        hh.scale(self.p_interference)
            .add(&ComplexMatrix::identity(h.rows()).scale(NOISE_VARIANCE))
            .expect("square by construction")
    }
}

/// Rayleigh block: i.i.d. `CN(0, 1)` entries.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, rx: usize, streams: usize) -> Result<ComplexMatrix> {
    if rx == 0 || streams == 0 {
        return Err(Error::InvalidParameter("channel dimensions must be positive".into()));
    }
    ComplexMatrix::new(rx, streams, gaussian_complex(rng, rx * streams, 1.0)?)
}

/// Noise-free part of the received vector.
pub fn superpose(x_desired: &[Complex64], x_interference: &[Complex64], ch: &ChannelRealization) -> Result<Vec<Complex64>> {
    let yd = ch.h_desired.mul_vec(x_desired)?;
    let yi = ch.h_interference.mul_vec(x_interference)?;
    let (a, b) = (ch.p_desired.sqrt(), ch.p_interference.sqrt());
    Ok(yd.iter().zip(&yi).map(|(d, i)| d * a + i * b).collect())
}

/// Received vector for one channel use. `noise_variance = 0` disables the
/// noise (test hook); the usual value is [`NOISE_VARIANCE`].
pub fn transmit<R: Rng + ?Sized>(
    x_desired: &[Complex64],
    x_interference: &[Complex64],
    ch: &ChannelRealization,
    rng: &mut R,
    noise_variance: f64,
) -> Result<Vec<Complex64>> {
    let mut y = superpose(x_desired, x_interference, ch)?;
    if noise_variance > 0.0 {
        let n = gaussian_complex(rng, y.len(), noise_variance)?;
        y.iter_mut().zip(n).for_each(|(v, n)| *v += n);
    }
    Ok(y)
}

/// Modulation and code rate of one transmitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalConfig {
    pub modulation: Modulation,
    pub rate: f64,
}

/// Complete description of a link-level experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub streams: usize,
    pub desired: SignalConfig,
    pub interference: SignalConfig,
    pub snr_db: Vec<f64>,
    pub sir_db: f64,
    pub receiver: ReceiverKind,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub packets: usize,
    pub subcarriers: usize,
    /// Information bits per codeword.
    pub info_bits: usize,
    pub mode: DetectionMode,
    pub seed: u64,
    /// Drop the receiver noise entirely.
    pub noiseless: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            tx_antennas: 2,
            rx_antennas: 2,
            streams: 2,
            desired: SignalConfig {
                modulation: Modulation::Qam4,
                rate: 0.5,
            },
            interference: SignalConfig {
                modulation: Modulation::Qam4,
                rate: 0.5,
            },
            snr_db: vec![0.0],
            sir_db: 0.0,
            receiver: ReceiverKind::Iasd,
            inner_iterations: 4,
            outer_iterations: 2,
            packets: 2000,
            subcarriers: 10,
            info_bits: 400,
            mode: DetectionMode::MaxLog,
            seed: 1,
            noiseless: false,
        }
    }
}

impl Scenario {
    /// Default settings for a receiver: 8 inner decoder iterations for the
    /// non-iterative receivers, 4 inner and 2 outer for the iterative ones.
    pub fn for_receiver(receiver: ReceiverKind) -> Self {
        let (inner, outer) = receiver.default_iterations();
        Self {
            receiver,
            inner_iterations: inner,
            outer_iterations: outer,
            ..Self::default()
        }
    }

    /// Codewords per packet, one per spatial stream.
    pub fn codewords(&self) -> usize {
        self.streams
    }

    pub fn powers(&self, snr_db: f64) -> (f64, f64) {
        powers_from_db(snr_db, self.sir_db)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.streams == 0 || self.rx_antennas == 0 {
            return bad("streams and rx_antennas must be positive".into());
        }
        if self.tx_antennas != self.streams {
            return bad(format!(
                "tx_antennas ({}) must equal streams ({}) under identity precoding",
                self.tx_antennas, self.streams
            ));
        }
        if self.snr_db.is_empty() {
            return bad("snr grid is empty".into());
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) || !self.sir_db.is_finite() {
            return bad("snr/sir values must be finite".into());
        }
        if self.packets == 0 || self.subcarriers == 0 {
            return bad("packets and subcarriers must be positive".into());
        }
        if self.inner_iterations == 0 || self.outer_iterations == 0 {
            return bad("iteration counts must be positive".into());
        }
        for (name, cfg) in [("desired", self.desired), ("interference", self.interference)] {
            if !(cfg.rate > 0.0 && cfg.rate < 1.0) {
                return bad(format!("{name} rate must lie in (0, 1), got {}", cfg.rate));
            }
        }
        let hyps = (self.desired.modulation.order() * self.interference.modulation.order()).pow(self.streams as u32);
        if hyps > 1 << 20 {
            return bad(format!("{hyps} joint hypotheses per symbol vector is beyond exhaustive detection"));
        }
        Ok(())
    }
}
