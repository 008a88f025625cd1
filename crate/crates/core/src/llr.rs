//! Tagged log-likelihood ratio blocks.
//!
//! LLRs use the natural log, `L = ln P(b = +1) / P(b = -1)`, where the
//! bipolar bit `b = 2c - 1` corresponds to the coded bit `c ∈ {0, 1}`.

use std::fmt;

use crate::{Error, Result};

/// Saturation applied to LLRs at every hand-off between blocks.
pub const LLR_CLAMP: f64 = 30.0;

#[inline]
pub fn clamp_llr(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    APriori,
    Extrinsic,
    APosteriori,
}

/// Which block of the detector/decoder loop an LLR belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Detector,
    Decoder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Desired,
    Interference,
}

impl Signal {
    pub fn other(self) -> Self {
        match self {
            Signal::Desired => Signal::Interference,
            Signal::Interference => Signal::Desired,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlrBlock {
    pub values: Vec<f64>,
    pub role: Role,
    pub side: Side,
    pub signal: Signal,
}

impl fmt::Display for LlrBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{:?}/{:?}[{}]", self.role, self.side, self.signal, self.values.len())
    }
}

impl LlrBlock {
    pub fn new(values: Vec<f64>, role: Role, side: Side, signal: Signal) -> Self {
        Self {
            values,
            role,
            side,
            signal,
        }
    }

    pub fn zeros(len: usize, role: Role, side: Side, signal: Signal) -> Self {
        Self::new(vec![0.0; len], role, side, signal)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails unless the block carries exactly the given tags.
    pub fn expect_tags(&self, role: Role, side: Side, signal: Signal) -> Result<()> {
        if self.role == role && self.side == side && self.signal == signal {
            Ok(())
        } else {
            Err(Error::TagMismatch {
                expected: format!("{role:?}/{side:?}/{signal:?}"),
                actual: format!("{:?}/{:?}/{:?}", self.role, self.side, self.signal),
            })
        }
    }

    pub fn clamped(mut self) -> Self {
        self.values.iter_mut().for_each(|v| *v = clamp_llr(*v));
        self
    }

    /// Re-tags the block, e.g. a decoder extrinsic becoming a detector a-priori.
    pub fn retag(mut self, role: Role, side: Side) -> Self {
        self.role = role;
        self.side = side;
        self
    }

    pub fn mean_abs(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    /// Hard decisions as binary bits (`L > 0` ⇒ 1).
    pub fn hard_bits(&self) -> Vec<u8> {
        self.values.iter().map(|&v| u8::from(v > 0.0)).collect()
    }
}
