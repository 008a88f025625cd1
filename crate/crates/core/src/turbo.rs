//! Rate-matched parallel concatenated (7,5) turbo code with a max-log-MAP
//! decoder that reports LLRs for every transmitted coded bit.
//!
//! Mother code layout (length `3K + 4`):
//!
//! | block | length  | content                                         |
//! |-------|---------|-------------------------------------------------|
//! | sys   | `K + 2` | info bits followed by the two tail inputs of RSC 1 |
//! | par1  | `K + 2` | RSC 1 parity, terminated to the zero state      |
//! | par2  | `K`     | RSC 2 parity over the interleaved info, open end |
//!
//! The transmitted word keeps every systematic bit and a periodic selection
//! of parity bits that alternates between the two parity streams. When the
//! target length exceeds the mother length, evenly spread parity bits are
//! repeated.

use crate::llr::{clamp_llr, LlrBlock, Role, Side};
use crate::modem::Interleaver;
use crate::numerics::RngStream;
use crate::{Error, Result};

/// Memory-2 trellis of the RSC with feedback 1+D+D² (7) and feedforward 1+D² (5).
/// State index is `2·a[k-1] + a[k-2]`.
#[derive(Clone, Copy, Debug)]
struct Trellis {
    next: [[usize; 2]; 4],
    parity: [[u8; 2]; 4],
}

const TRELLIS: Trellis = build_trellis();

const fn build_trellis() -> Trellis {
    let mut next = [[0usize; 2]; 4];
    let mut parity = [[0u8; 2]; 4];
    let mut s = 0;
    while s < 4 {
        let s1 = (s >> 1) & 1;
        let s2 = s & 1;
        let mut u = 0;
        while u < 2 {
            let a = u ^ s1 ^ s2;
            next[s][u] = (a << 1) | s1;
            parity[s][u] = (a ^ s2) as u8;
            u += 1;
        }
        s += 1;
    }
    Trellis { next, parity }
}

const NEG_INF: f64 = -1e300;

/// Encodes `info` with one RSC; with `terminate`, two tail inputs drive the
/// register back to zero and are appended. Returns (systematic, parity).
fn rsc_encode(info: &[u8], terminate: bool) -> (Vec<u8>, Vec<u8>) {
    let mut state = 0usize;
    let mut sys = Vec::with_capacity(info.len() + 2);
    let mut par = Vec::with_capacity(info.len() + 2);
    for &u in info {
        let u = (u & 1) as usize;
        sys.push(u as u8);
        par.push(TRELLIS.parity[state][u]);
        state = TRELLIS.next[state][u];
    }
    if terminate {
        for _ in 0..2 {
            // feedback bit a = u ^ s1 ^ s2 must be zero
            let u = ((state >> 1) ^ state) & 1;
            sys.push(u as u8);
            par.push(TRELLIS.parity[state][u]);
            state = TRELLIS.next[state][u];
        }
        debug_assert_eq!(state, 0);
    }
    (sys, par)
}

/// Per-step a-posteriori LLRs of the input and parity bits of one RSC.
struct BcjrOutput {
    input: Vec<f64>,
    parity: Vec<f64>,
}

/// Max-log BCJR over one constituent trellis.
fn max_log_bcjr(sys: &[f64], apriori: &[f64], parity: &[f64], terminated: bool) -> BcjrOutput {
    let t_len = sys.len();
    debug_assert!(apriori.len() == t_len && parity.len() == t_len);
    let gamma = |k: usize, s: usize, u: usize| -> f64 {
        let bu = if u == 1 { 0.5 } else { -0.5 };
        let bp = if TRELLIS.parity[s][u] == 1 { 0.5 } else { -0.5 };
        bu * (sys[k] + apriori[k]) + bp * parity[k]
    };

    let mut alpha = vec![[NEG_INF; 4]; t_len + 1];
    alpha[0][0] = 0.0;
    for k in 0..t_len {
        let mut next = [NEG_INF; 4];
        for s in 0..4 {
            let a = alpha[k][s];
            if a <= NEG_INF {
                continue;
            }
            for u in 0..2 {
                let ns = TRELLIS.next[s][u];
                next[ns] = next[ns].max(a + gamma(k, s, u));
            }
        }
        let m = next.iter().cloned().fold(NEG_INF, f64::max);
        next.iter_mut().for_each(|v| *v -= m);
        alpha[k + 1] = next;
    }

    let mut beta = vec![[NEG_INF; 4]; t_len + 1];
    beta[t_len] = if terminated { [0.0, NEG_INF, NEG_INF, NEG_INF] } else { [0.0; 4] };
    for k in (0..t_len).rev() {
        let mut cur = [NEG_INF; 4];
        for s in 0..4 {
            for u in 0..2 {
                let ns = TRELLIS.next[s][u];
                cur[s] = cur[s].max(beta[k + 1][ns] + gamma(k, s, u));
            }
        }
        let m = cur.iter().cloned().fold(NEG_INF, f64::max);
        cur.iter_mut().for_each(|v| *v -= m);
        beta[k] = cur;
    }

    let mut input = vec![0.0; t_len];
    let mut par_out = vec![0.0; t_len];
    for k in 0..t_len {
        let mut u_best = [NEG_INF; 2];
        let mut p_best = [NEG_INF; 2];
        for s in 0..4 {
            if alpha[k][s] <= NEG_INF {
                continue;
            }
            for u in 0..2 {
                let ns = TRELLIS.next[s][u];
                let m = alpha[k][s] + gamma(k, s, u) + beta[k + 1][ns];
                u_best[u] = u_best[u].max(m);
                let p = TRELLIS.parity[s][u] as usize;
                p_best[p] = p_best[p].max(m);
            }
        }
        input[k] = u_best[1] - u_best[0];
        par_out[k] = p_best[1] - p_best[0];
    }
    BcjrOutput { input, parity: par_out }
}

/// Evenly spread selection of `count` out of `n` positions.
fn spread_selection(n: usize, count: usize, phase: usize) -> Vec<bool> {
    debug_assert!(count <= n && phase < n.max(1));
    (0..n)
        .map(|i| ((i + 1) * count + phase) / n > (i * count + phase) / n)
        .collect()
}

/// Output of [`TurboCode::decode`].
#[derive(Clone, Debug)]
pub struct TurboDecoding {
    /// A-posteriori LLRs of every transmitted coded bit.
    pub a_posteriori: LlrBlock,
    /// `a_posteriori − a_priori` for every transmitted coded bit.
    pub extrinsic: LlrBlock,
    /// Hard decisions on the `K` information bits.
    pub info_bits: Vec<u8>,
}

/// (7,5) turbo code with `K` information bits and a target rate.
#[derive(Clone, Debug)]
pub struct TurboCode {
    info_len: usize,
    rate: f64,
    internal: Interleaver,
    /// Transmitted position -> mother code position.
    tx_map: Vec<usize>,
}

/// Seed of the internal interleaver; the interleaver is part of the code.
const INTERNAL_INTERLEAVER_SEED: u64 = 0x75_75;

impl TurboCode {
    pub fn new(info_len: usize, rate: f64) -> Result<Self> {
        if info_len < 2 {
            return Err(Error::InvalidParameter(format!("info length must be at least 2, got {info_len}")));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::InvalidParameter(format!("code rate must lie in (0, 1), got {rate}")));
        }
        let internal = Interleaver::random(info_len, RngStream::new(INTERNAL_INTERLEAVER_SEED, info_len as u64));
        let tx_len = (info_len as f64 / rate).round() as usize;
        let tx_map = Self::rate_matching(info_len, tx_len)?;
        Ok(Self {
            info_len,
            rate,
            internal,
            tx_map,
        })
    }

    fn rate_matching(k: usize, tx_len: usize) -> Result<Vec<usize>> {
        let n_sys = k + 2;
        let (p1_off, n_p1) = (k + 2, k + 2);
        let (p2_off, n_p2) = (2 * k + 4, k);
        if tx_len < n_sys {
            return Err(Error::InvalidParameter(format!(
                "target length {tx_len} is shorter than the {n_sys} systematic bits"
            )));
        }
        let mut map: Vec<usize> = (0..n_sys).collect();
        let keep = tx_len - n_sys;
        if keep <= n_p1 + n_p2 {
            let keep2 = (keep / 2).min(n_p2);
            let keep1 = keep - keep2;
            let sel1 = spread_selection(n_p1, keep1, 0);
            let sel2 = spread_selection(n_p2, keep2, n_p2 / 2);
            for t in 0..n_p1 {
                if sel1[t] {
                    map.push(p1_off + t);
                }
                if t < n_p2 && sel2[t] {
                    map.push(p2_off + t);
                }
            }
        } else {
            let mut interlaced = Vec::with_capacity(n_p1 + n_p2);
            for t in 0..n_p1 {
                interlaced.push(p1_off + t);
                if t < n_p2 {
                    interlaced.push(p2_off + t);
                }
            }
            map.extend(&interlaced);
            let mut extra = keep - interlaced.len();
            // Repeat parity cyclically in evenly spread rounds.
            while extra > 0 {
                let round = extra.min(interlaced.len());
                let sel = spread_selection(interlaced.len(), round, 0);
                map.extend(interlaced.iter().zip(&sel).filter(|(_, &s)| s).map(|(&p, _)| p));
                extra -= round;
            }
        }
        debug_assert_eq!(map.len(), tx_len);
        Ok(map)
    }

    pub fn info_len(&self) -> usize {
        self.info_len
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Number of transmitted coded bits, `round(K / R)`.
    pub fn coded_len(&self) -> usize {
        self.tx_map.len()
    }

    /// Leading transmitted bits that are systematic (info plus tail inputs).
    pub fn systematic_len(&self) -> usize {
        self.info_len + 2
    }

    pub fn mother_len(&self) -> usize {
        3 * self.info_len + 4
    }

    /// Mother code position of each transmitted bit.
    pub fn transmit_map(&self) -> &[usize] {
        &self.tx_map
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mother = self.encode_mother(info)?;
        Ok(self.tx_map.iter().map(|&p| mother[p]).collect())
    }

    /// Unpunctured rate-1/3 codeword in the mother layout.
    pub fn encode_mother(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len {
            return Err(Error::LengthMismatch {
                what: "turbo info bits",
                expected: self.info_len,
                actual: info.len(),
            });
        }
        let (sys, par1) = rsc_encode(info, true);
        let (_, par2) = rsc_encode(&self.internal.interleave(info)?, false);
        let mut out = sys;
        out.extend(par1);
        out.extend(par2);
        Ok(out)
    }

    /// Combines transmitted LLRs into mother positions; punctured positions
    /// stay at exactly zero and repeated positions are summed.
    pub fn depuncture(&self, llrs: &[f64]) -> Result<Vec<f64>> {
        if llrs.len() != self.coded_len() {
            return Err(Error::LengthMismatch {
                what: "turbo decoder input",
                expected: self.coded_len(),
                actual: llrs.len(),
            });
        }
        let mut mother = vec![0.0; self.mother_len()];
        for (&p, &l) in self.tx_map.iter().zip(llrs) {
            mother[p] += l;
        }
        Ok(mother)
    }

    /// Max-log-MAP turbo decoding with `iterations` full iterations.
    ///
    /// `input` must be a decoder-side a-priori block over the transmitted
    /// coded bits.
    pub fn decode(&self, input: &LlrBlock, iterations: usize) -> Result<TurboDecoding> {
        input.expect_tags(Role::APriori, Side::Decoder, input.signal)?;
        if iterations == 0 {
            return Err(Error::InvalidParameter("turbo decoding needs at least one iteration".into()));
        }
        let k = self.info_len;
        let mother = self.depuncture(&input.values)?;
        let sys = &mother[..k + 2];
        let par1 = &mother[k + 2..2 * k + 4];
        let par2 = &mother[2 * k + 4..];
        let sys_int = self.internal.interleave(&sys[..k])?;

        let mut apr1 = vec![0.0; k + 2];
        let mut ext1 = vec![0.0; k];
        let mut ext2_deint = vec![0.0; k];
        let mut out1 = None;
        let mut out2 = None;
        for _ in 0..iterations {
            apr1[..k].copy_from_slice(&ext2_deint);
            let o1 = max_log_bcjr(sys, &apr1, par1, true);
            for i in 0..k {
                ext1[i] = o1.input[i] - sys[i] - apr1[i];
            }
            let apr2 = self.internal.interleave(&ext1)?;
            let o2 = max_log_bcjr(&sys_int, &apr2, par2, false);
            let ext2: Vec<f64> = (0..k).map(|i| o2.input[i] - sys_int[i] - apr2[i]).collect();
            ext2_deint = self.internal.deinterleave(&ext2)?;
            out1 = Some(o1);
            out2 = Some(o2);
        }
        let (o1, o2) = (out1.expect("at least one iteration"), out2.expect("at least one iteration"));

        let mut app = Vec::with_capacity(self.mother_len());
        app.extend((0..k).map(|i| sys[i] + ext1[i] + ext2_deint[i]));
        app.extend(&o1.input[k..]);
        app.extend(&o1.parity);
        app.extend(&o2.parity);

        let info_bits = app[..k].iter().map(|&l| u8::from(l > 0.0)).collect();
        // Both outputs are clamped separately so a saturated input does not
        // wipe out the decoder's own contribution.
        let a_post: Vec<f64> = self.tx_map.iter().map(|&p| clamp_llr(app[p])).collect();
        let ext: Vec<f64> = self
            .tx_map
            .iter()
            .zip(&input.values)
            .map(|(&p, l)| clamp_llr(app[p] - l))
            .collect();
        Ok(TurboDecoding {
            a_posteriori: LlrBlock::new(a_post, Role::APosteriori, Side::Decoder, input.signal),
            extrinsic: LlrBlock::new(ext, Role::Extrinsic, Side::Decoder, input.signal),
            info_bits,
        })
    }
}
