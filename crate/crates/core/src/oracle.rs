//! Slow reference computations. Everything here is written straight from
//! the definitions, without sharing code paths with the fast detector or
//! the J table, so tests can compare the two.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::modem::Constellation;

/// Gray-mapped QAM point from bipolar label bits, built from the amplitude
/// ladder rather than a lookup table.
pub fn qam_point(bits: &[i8]) -> Complex64 {
    let half = bits.len() / 2;
    let m = 1usize << half;
    let norm = (2.0 * ((m * m) as f64 - 1.0) / 3.0).sqrt();
    let axis = |b: &[i8]| -> f64 {
        // inverse binary-reflected Gray code on {0,1} bits
        let mut idx = 0usize;
        let mut acc = 0u8;
        for &x in b {
            acc ^= ((x + 1) / 2) as u8;
            idx = (idx << 1) | acc as usize;
        }
        -(m as f64 - 1.0) + 2.0 * idx as f64
    };
    Complex64::new(axis(&bits[..half]), axis(&bits[half..])) / norm
}

fn enumerate_bits(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << n)
        .map(|v| (0..n).map(|k| if v >> (n - 1 - k) & 1 == 1 { 1 } else { -1 }).collect())
        .collect()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Exact (or max-log) extrinsic LLRs of the desired bits by enumerating
/// every joint bit pattern. Empty priors mean zero priors.
pub fn brute_force_desired_llr(
    y: &[Complex64],
    ch: &ChannelRealization,
    desired: &Constellation,
    interference: &Constellation,
    prior_d: &[f64],
    prior_i: &[f64],
    max_log: bool,
) -> Vec<f64> {
    let streams = ch.h_desired.cols();
    let nd = desired.bits_per_symbol() * streams;
    let ni = interference.bits_per_symbol() * streams;
    let pd = |k: usize| prior_d.get(k).copied().unwrap_or(0.0);
    let pi = |k: usize| prior_i.get(k).copied().unwrap_or(0.0);
    let d_patterns = enumerate_bits(nd);
    let i_patterns = enumerate_bits(ni);
    let signal = |h: &crate::ComplexMatrix, p: f64, bits: &[i8], bps: usize| -> Vec<Complex64> {
        let x: Vec<Complex64> = bits.chunks(bps).map(qam_point).collect();
        (0..h.rows())
            .map(|r| (0..h.cols()).map(|c| h[(r, c)] * x[c]).sum::<Complex64>() * p.sqrt())
            .collect()
    };
    let sd: Vec<Vec<Complex64>> = d_patterns
        .iter()
        .map(|b| signal(&ch.h_desired, ch.p_desired, b, desired.bits_per_symbol()))
        .collect();
    let si: Vec<Vec<Complex64>> = i_patterns
        .iter()
        .map(|b| signal(&ch.h_interference, ch.p_interference, b, interference.bits_per_symbol()))
        .collect();
    let prior_term = |bits: &[i8], p: &dyn Fn(usize) -> f64| -> f64 {
        bits.iter().enumerate().map(|(j, &b)| 0.5 * b as f64 * p(j)).sum()
    };
    // metric[d][i] with every prior included; the target bit's own prior is
    // removed per bit below
    let metric: Vec<Vec<f64>> = d_patterns
        .iter()
        .zip(&sd)
        .map(|(bd, sdv)| {
            let own = prior_term(bd, &pd);
            i_patterns
                .iter()
                .zip(&si)
                .map(|(bi, siv)| {
                    let dist: f64 = (0..y.len()).map(|r| (y[r] - sdv[r] - siv[r]).norm_sqr()).sum();
                    -dist + own + prior_term(bi, &pi)
                })
                .collect()
        })
        .collect();
    (0..nd)
        .map(|k| {
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for (bd, row) in d_patterns.iter().zip(&metric) {
                let correction = 0.5 * bd[k] as f64 * pd(k);
                let dst = if bd[k] > 0 { &mut plus } else { &mut minus };
                dst.extend(row.iter().map(|m| m - correction));
            }
            let l = if max_log {
                plus.iter().copied().fold(f64::NEG_INFINITY, f64::max) - minus.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            } else {
                log_sum_exp(&plus) - log_sum_exp(&minus)
            };
            crate::llr::clamp_llr(l)
        })
        .collect()
}

/// `J(σ)` from the conditional LLR density: integrates
/// `p(L | x = +1)·log2(1 + e^{−L})` over L with composite Simpson.
pub fn j_by_density(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let mean = sigma * sigma / 2.0;
    let (a, b) = (mean - 14.0 * sigma, mean + 14.0 * sigma);
    let n = 40_000;
    let h = (b - a) / n as f64;
    let f = |l: f64| {
        let pdf = (-(l - mean).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let penalty = if l > 0.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() } / std::f64::consts::LN_2;
        pdf * penalty
    };
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - s * h / 3.0
}

/// Exact (or max-log) LLRs of the desired bits when interference plus noise
/// is modelled as Gaussian with covariance `R_v = P_I H_I H_I† + I`, using
/// the quadratic form `(y − s)† R_v⁻¹ (y − s)` directly.
pub fn brute_force_iw_llr(y: &[Complex64], ch: &ChannelRealization, desired: &Constellation, max_log: bool) -> Vec<f64> {
    let nr = y.len();
    let hi = &ch.h_interference;
    let rv = nalgebra::DMatrix::from_fn(nr, nr, |r, c| {
        let mut v: Complex64 = (0..hi.cols()).map(|k| hi[(r, k)] * hi[(c, k)].conj()).sum::<Complex64>() * ch.p_interference;
        if r == c {
            v += 1.0;
        }
        v
    });
    let inv = rv.try_inverse().expect("covariance is positive definite");
    let streams = ch.h_desired.cols();
    let bps = desired.bits_per_symbol();
    let nd = bps * streams;
    let patterns = enumerate_bits(nd);
    let metrics: Vec<f64> = patterns
        .iter()
        .map(|bits| {
            let x: Vec<Complex64> = bits.chunks(bps).map(qam_point).collect();
            let e: Vec<Complex64> = (0..nr)
                .map(|r| y[r] - (0..streams).map(|c| ch.h_desired[(r, c)] * x[c]).sum::<Complex64>() * ch.p_desired.sqrt())
                .collect();
            let mut q = Complex64::new(0.0, 0.0);
            for r in 0..nr {
                for c in 0..nr {
                    q += e[r].conj() * inv[(r, c)] * e[c];
                }
            }
            -q.re
        })
        .collect();
    (0..nd)
        .map(|k| {
            let (plus, minus): (Vec<f64>, Vec<f64>) = {
                let mut p = Vec::new();
                let mut m = Vec::new();
                for (bits, &v) in patterns.iter().zip(&metrics) {
                    if bits[k] > 0 {
                        p.push(v)
                    } else {
                        m.push(v)
                    }
                }
                (p, m)
            };
            let l = if max_log {
                plus.iter().copied().fold(f64::NEG_INFINITY, f64::max) - minus.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            } else {
                log_sum_exp(&plus) - log_sum_exp(&minus)
            };
            crate::llr::clamp_llr(l)
        })
        .collect()
}

/// Interference-bit LLRs, obtained by swapping the roles of the two signals.
pub fn brute_force_interference_llr(
    y: &[Complex64],
    ch: &ChannelRealization,
    desired: &Constellation,
    interference: &Constellation,
    prior_d: &[f64],
    prior_i: &[f64],
    max_log: bool,
) -> Vec<f64> {
    let swapped = ChannelRealization {
        h_desired: ch.h_interference.clone(),
        h_interference: ch.h_desired.clone(),
        p_desired: ch.p_interference,
        p_interference: ch.p_desired,
    };
    brute_force_desired_llr(y, &swapped, interference, desired, prior_i, prior_d, max_log)
}
