//! Gray-mapped square QAM, bit/symbol mapping and BICM interleavers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::numerics::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qam4,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn order(self) -> usize {
        match self {
            Modulation::Qam4 => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        self.order().trailing_zeros() as usize
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}QAM", self.order())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "4QAM" | "QAM4" | "QPSK" | "4" => Ok(Modulation::Qam4),
            "16QAM" | "QAM16" | "16" => Ok(Modulation::Qam16),
            "64QAM" | "QAM64" | "64" => Ok(Modulation::Qam64),
            other => Err(Error::InvalidParameter(format!("unknown modulation '{other}'"))),
        }
    }
}

/// Unit-energy Gray-labelled square QAM.
///
/// Symbol `s` carries the label whose binary expansion is `s` (first bit is
/// the most significant). The first half of the label selects the in-phase
/// level and the second half the quadrature level, each through a
/// binary-reflected Gray code; bit `+1` points toward positive amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let n = modulation.bits_per_symbol();
        let half = n / 2;
        let side = 1usize << half;
        // Gray code -> amplitude level index, per axis.
        let mut level_of_gray = vec![0usize; side];
        for level in 0..side {
            level_of_gray[level ^ (level >> 1)] = level;
        }
        let amplitude = |g: usize| 2.0 * level_of_gray[g] as f64 - (side as f64 - 1.0);
        // Mean energy of the unnormalized grid is 2(M_axis² - 1)/3.
        let norm = (2.0 * ((side * side) as f64 - 1.0) / 3.0).sqrt();
        let points = (0..modulation.order())
            .map(|label| {
                let gi = label >> half;
                let gq = label & (side - 1);
                Complex64::new(amplitude(gi), amplitude(gq)) / norm
            })
            .collect();
        Self { modulation, points }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Bipolar value of bit `n` of symbol `label`.
    #[inline]
    pub fn bit(&self, label: usize, n: usize) -> i8 {
        if (label >> (self.bits_per_symbol() - 1 - n)) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn label_of_bits(&self, bits: &[i8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b > 0))
    }

    /// Label of the closest constellation point.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }
}

/// Symbol labels of the `streams`-long hypothesis with index `hyp`
/// (stream 0 is the most significant digit).
pub fn hypothesis_labels(hyp: usize, order: usize, streams: usize) -> Vec<usize> {
    let mut out = vec![0; streams];
    let mut rest = hyp;
    for m in (0..streams).rev() {
        out[m] = rest % order;
        rest /= order;
    }
    out
}

/// Maps bipolar bits to symbol vectors. Consecutive `N`-bit groups become
/// symbols, and consecutive groups of `streams` symbols become one vector.
pub fn map_bits(bits: &[i8], c: &Constellation, streams: usize) -> Result<Vec<Vec<Complex64>>> {
    let n = c.bits_per_symbol();
    if streams == 0 {
        return Err(Error::InvalidParameter("streams must be positive".into()));
    }
    if bits.len() % (n * streams) != 0 {
        return Err(Error::LengthMismatch {
            what: "bits for symbol mapping",
            expected: (bits.len() / (n * streams) + 1) * n * streams,
            actual: bits.len(),
        });
    }
    Ok(bits
        .chunks(n * streams)
        .map(|vec_bits| vec_bits.chunks(n).map(|sym| c.point(c.label_of_bits(sym))).collect())
        .collect())
}

/// Symbol vectors whose bit `n` of stream `m` equals `b`.
pub fn bit_sets(c: &Constellation, streams: usize, m: usize, n: usize, b: i8) -> Result<Vec<Vec<Complex64>>> {
    if m >= streams || n >= c.bits_per_symbol() {
        return Err(Error::IndexOutOfRange(format!(
            "(stream {m}, bit {n}) with {streams} streams of {} bits",
            c.bits_per_symbol()
        )));
    }
    if b != 1 && b != -1 {
        return Err(Error::InvalidParameter(format!("bit value must be ±1, got {b}")));
    }
    let total = c.order().pow(streams as u32);
    Ok((0..total)
        .map(|h| hypothesis_labels(h, c.order(), streams))
        .filter(|labels| c.bit(labels[m], n) == b)
        .map(|labels| labels.into_iter().map(|l| c.point(l)).collect())
        .collect())
}

/// A permutation used as a bit interleaver: `interleave(v)[i] = v[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self {
            perm: (0..len).collect(),
        }
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("interleaver is not a bijection".into()));
            }
        }
        Ok(Self { perm })
    }

    /// Seeded Fisher–Yates permutation.
    pub fn random(len: usize, stream: RngStream) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut stream.generator());
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        Ok(self.perm.iter().map(|&p| v[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let mut out = vec![T::default(); v.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = v[i];
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::LengthMismatch {
                what: "interleaver input",
                expected: self.perm.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Codeword-level channel interleaver: systematic and parity bits are
/// permuted by their own interleavers and then concatenated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelInterleaver {
    systematic: Interleaver,
    parity: Interleaver,
}

impl ChannelInterleaver {
    pub fn new(systematic: Interleaver, parity: Interleaver) -> Self {
        Self { systematic, parity }
    }

    pub fn random(systematic_len: usize, parity_len: usize, seed: u64, stream: u64) -> Self {
        Self {
            systematic: Interleaver::random(systematic_len, RngStream::new(seed, stream.wrapping_mul(2))),
            parity: Interleaver::random(parity_len, RngStream::new(seed, stream.wrapping_mul(2) + 1)),
        }
    }

    pub fn len(&self) -> usize {
        self.systematic.len() + self.parity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let (s, p) = v.split_at(self.systematic.len());
        let mut out = self.systematic.interleave(s)?;
        out.extend(self.parity.interleave(p)?);
        Ok(out)
    }

    pub fn deinterleave<T: Copy + Default>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(v.len())?;
        let (s, p) = v.split_at(self.systematic.len());
        let mut out = self.systematic.deinterleave(s)?;
        out.extend(self.parity.deinterleave(p)?);
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                what: "channel interleaver input",
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }
}
