//! EXIT-chart experiments driven by a [`RunConfig`].

use iasim_core::exit::{
    build_jtable, decoder_curve, detector_curve, mi_grid, trajectory, DetectorCurveConfig, JTable, Trajectory,
    TransferCurve,
};
use iasim_core::{ReceiverKind, TurboCode};

use crate::config::RunConfig;
use crate::HarnessError;

#[derive(Clone, Debug)]
pub struct ExitReport {
    pub detector_curves: Vec<TransferCurve>,
    pub decoder_curves: Vec<TransferCurve>,
}

// Seed offsets keep detector and decoder draws apart.
const DETECTOR_SEED_SALT: u64 = 0xde7e_c7;
const DECODER_SEED_SALT: u64 = 0xdec0_de;

pub fn jtable(cfg: &RunConfig) -> Result<JTable, HarnessError> {
    Ok(build_jtable(cfg.exit.jtable_points, cfg.exit.jtable_nodes)?)
}

pub fn detector_config(cfg: &RunConfig, receiver: ReceiverKind) -> DetectorCurveConfig {
    let s = &cfg.scenario;
    DetectorCurveConfig {
        receiver,
        desired: s.desired.modulation,
        interference: s.interference.modulation,
        rx_antennas: s.rx_antennas,
        streams: s.streams,
        snr_db: cfg.exit.snr_db,
        sir_db: s.sir_db,
        mode: s.mode,
    }
}

pub fn detector_curve_for(cfg: &RunConfig, receiver: ReceiverKind, table: &JTable) -> Result<TransferCurve, HarnessError> {
    let grid = mi_grid(cfg.exit.grid_points);
    Ok(detector_curve(
        &detector_config(cfg, receiver),
        &grid,
        cfg.exit.samples,
        table,
        cfg.scenario.seed ^ DETECTOR_SEED_SALT,
    )?)
}

pub fn decoder_curve_for(cfg: &RunConfig, rate: f64, table: &JTable) -> Result<TransferCurve, HarnessError> {
    let code = TurboCode::new(cfg.scenario.info_bits, rate)?;
    let grid = mi_grid(cfg.exit.grid_points);
    Ok(decoder_curve(
        &code,
        &grid,
        cfg.exit.samples,
        cfg.exit.inner_iterations,
        table,
        cfg.scenario.seed ^ DECODER_SEED_SALT,
    )?)
}

/// Detector curves for every configured receiver and decoder curves for
/// every configured rate.
pub fn run_exit(cfg: &RunConfig) -> Result<ExitReport, HarnessError> {
    cfg.validate()?;
    let table = jtable(cfg)?;
    let detector_curves = cfg
        .exit
        .receivers
        .iter()
        .map(|&k| detector_curve_for(cfg, k, &table))
        .collect::<Result<_, _>>()?;
    let decoder_curves = cfg
        .exit
        .rates
        .iter()
        .map(|&r| decoder_curve_for(cfg, r, &table))
        .collect::<Result<_, _>>()?;
    Ok(ExitReport {
        detector_curves,
        decoder_curves,
    })
}

/// Trajectory of the configured receiver against the configured rate.
pub fn run_trajectory(cfg: &RunConfig) -> Result<(TransferCurve, TransferCurve, Trajectory), HarnessError> {
    cfg.validate()?;
    let table = jtable(cfg)?;
    let det = detector_curve_for(cfg, cfg.exit.trajectory_receiver, &table)?;
    let dec = decoder_curve_for(cfg, cfg.exit.trajectory_rate, &table)?;
    let tr = trajectory(&det, &dec, cfg.exit.max_iterations)?;
    Ok((det, dec, tr))
}

