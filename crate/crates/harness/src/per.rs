//! Monte-Carlo packet error rate driver.

use rayon::prelude::*;

use iasim_core::receiver::Link;
use iasim_core::PacketResult;

use crate::config::RunConfig;
use crate::HarnessError;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct PerPoint {
    pub snr_db: f64,
    pub packets: usize,
    pub errors: usize,
    pub per: f64,
    /// Wilson score half-width at 95%.
    pub ci95: f64,
    /// Packets whose interference codewords failed, when the receiver decodes them.
    pub interference_per: Option<f64>,
}

/// Wilson score interval `(low, high)` at 95%.
pub fn wilson_interval(errors: usize, packets: usize) -> (f64, f64) {
    if packets == 0 {
        return (0.0, 1.0);
    }
    let n = packets as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds touch 0 and 1 exactly at the extremes; rounding would leave ~1e-19
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == packets { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

pub fn wilson_half_width(errors: usize, packets: usize) -> f64 {
    let (lo, hi) = wilson_interval(errors, packets);
    (hi - lo) / 2.0
}

impl PerPoint {
    pub fn from_results(snr_db: f64, results: &[PacketResult]) -> Self {
        let packets = results.len();
        let errors = results.iter().filter(|r| r.packet_error()).count();
        let decoded: Vec<bool> = results.iter().filter_map(|r| r.interference_ok).collect();
        let interference_per = (!decoded.is_empty() && decoded.len() == packets)
            .then(|| decoded.iter().filter(|ok| !**ok).count() as f64 / packets as f64);
        Self {
            snr_db,
            packets,
            errors,
            per: if packets == 0 { 0.0 } else { errors as f64 / packets as f64 },
            ci95: wilson_half_width(errors, packets),
            interference_per,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.packets)
    }
}

/// Runs one SNR point. Packets are processed in fixed batches and merged by
/// packet index; the error stop rule is only checked between batches, so
/// the packet count does not depend on thread scheduling.
pub fn run_point(link: &Link, cfg: &RunConfig, snr_db: f64) -> Result<Vec<PacketResult>, HarnessError> {
    let budget = cfg.scenario.packets;
    let mut results = Vec::with_capacity(budget.min(cfg.batch * 16));
    let mut errors = 0;
    while results.len() < budget && errors < cfg.stop_errors {
        let start = results.len();
        let end = (start + cfg.batch).min(budget);
        let batch = (start..end)
            .into_par_iter()
            .map(|p| link.run_packet(p as u64, snr_db))
            .collect::<Result<Vec<_>, _>>()?;
        errors += batch.iter().filter(|r| r.packet_error()).count();
        results.extend(batch);
    }
    Ok(results)
}

/// Sweeps the scenario's SNR grid in ascending order.
pub fn run_per(cfg: &RunConfig) -> Result<Vec<PerPoint>, HarnessError> {
    cfg.validate()?;
    let link = Link::new(&cfg.scenario)?;
    let run = || -> Result<Vec<PerPoint>, HarnessError> {
        let mut points = Vec::with_capacity(cfg.scenario.snr_db.len());
        for &snr in &cfg.scenario.snr_db {
            let results = run_point(&link, cfg, snr)?;
            let point = PerPoint::from_results(snr, &results);
            let below_floor = cfg.per_floor > 0.0 && point.per < cfg.per_floor;
            points.push(point);
            if below_floor {
                break;
            }
        }
        Ok(points)
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Internal(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn log_crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let floor = 1e-6;
    let lt = target.ln();
    for w in points.windows(2) {
        let (x0, y0) = (w[0].0, w[0].1.max(floor).ln());
        let (x1, y1) = (w[1].0, w[1].1.max(floor).ln());
        if y0 > lt && y1 <= lt {
            return Some(x0 + (lt - y0) / (y1 - y0) * (x1 - x0));
        }
    }
    match points.first() {
        Some(&(x, y)) if y <= target => Some(x),
        _ => None,
    }
}

/// SNR where PER first falls to `target`, interpolating linearly in log PER.
/// Returns the first grid point when the whole curve is already below the
/// target and `None` when it never gets there.
pub fn snr_at_per(points: &[PerPoint], target: f64) -> Option<f64> {
    log_crossing(&points.iter().map(|p| (p.snr_db, p.per)).collect::<Vec<_>>(), target)
}

/// SNR uncertainty of [`snr_at_per`]: half the distance between the
/// crossings of the upper and lower 95% confidence bounds.
pub fn snr_resolution(points: &[PerPoint], target: f64) -> Option<f64> {
    let upper: Vec<_> = points.iter().map(|p| (p.snr_db, p.interval().1)).collect();
    let lower: Vec<_> = points.iter().map(|p| (p.snr_db, p.interval().0)).collect();
    Some((log_crossing(&upper, target)? - log_crossing(&lower, target)?).abs() / 2.0)
}
