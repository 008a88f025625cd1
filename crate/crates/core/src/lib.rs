//! Link-level simulation of two-user MIMO Gaussian interference channels.
//!
//! The crate covers the whole bit-interleaved coded modulation chain for a
//! desired and an interfering transmitter, the soft detectors that the
//! receivers are built from (interference whitening, interference-aware
//! joint detection with and without a-priori information), a rate-matched
//! (7,5) turbo code with a max-log-MAP decoder, the iterative receiver
//! schedules (IW, IA-Det, IIAD, IASD, IAPD) and EXIT-chart tooling.

pub mod channel;
pub mod detect;
pub mod exit;
pub mod llr;
pub mod modem;
pub mod numerics;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod receiver;
pub mod turbo;

pub use channel::{ChannelRealization, Scenario};
pub use llr::{LlrBlock, Role, Side, Signal, LLR_CLAMP};
pub use modem::{Constellation, Interleaver, Modulation};
pub use numerics::{ComplexMatrix, RngStream};
pub use num_complex::Complex64;
pub use receiver::{PacketResult, ReceiverKind};
pub use turbo::TurboCode;

/// Errors reported by the simulation building blocks.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("ill-conditioned matrix (smallest eigenvalue {0:e})")]
    IllConditioned(f64),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("LLR block tag mismatch: expected {expected}, got {actual}")]
    TagMismatch { expected: String, actual: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
