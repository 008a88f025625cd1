//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! ```text
//! receiver = IASD
//! snr_db = 0:0.5:6
//! desired.modulation = 4QAM
//! desired.rate = 0.5
//! stop.errors = 100
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use iasim_core::channel::SignalConfig;
use iasim_core::detect::DetectionMode;
use iasim_core::{Modulation, ReceiverKind, Scenario};

use crate::HarnessError;

/// EXIT-chart settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitSettings {
    pub snr_db: f64,
    pub grid_points: usize,
    pub samples: usize,
    pub rates: Vec<f64>,
    pub receivers: Vec<ReceiverKind>,
    /// Decoder iterations per decoder activation.
    pub inner_iterations: usize,
    pub max_iterations: usize,
    /// Receiver and rate for `exit-trajectory`.
    pub trajectory_receiver: ReceiverKind,
    pub trajectory_rate: f64,
    pub jtable_points: usize,
    pub jtable_nodes: usize,
}

impl Default for ExitSettings {
    fn default() -> Self {
        Self {
            snr_db: 6.0,
            grid_points: 11,
            samples: 200_000,
            rates: vec![0.33, 0.5, 0.75, 0.83],
            receivers: vec![ReceiverKind::Iw, ReceiverKind::IaDet, ReceiverKind::Iapd],
            inner_iterations: 4,
            max_iterations: 20,
            trajectory_receiver: ReceiverKind::Iapd,
            trajectory_rate: 0.5,
            jtable_points: iasim_core::exit::JTABLE_POINTS,
            jtable_nodes: iasim_core::exit::JTABLE_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    /// Stop an SNR point once this many packet errors are seen.
    pub stop_errors: usize,
    /// Packets per scheduling batch; the stop rule is checked between batches.
    pub batch: usize,
    /// Skip the remaining SNR points once PER drops below this (0 disables).
    pub per_floor: f64,
    pub threads: Option<usize>,
    pub exit: ExitSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            out_dir: PathBuf::from("results"),
            stop_errors: 100,
            batch: 100,
            per_floor: 0.0,
            threads: None,
            exit: ExitSettings::default(),
        }
    }
}

fn err(field: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse<T: FromStr>(field: &str, v: &str) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| err(field, format!("cannot parse '{v}': {e}")))
}

fn parse_bool(field: &str, v: &str) -> Result<bool, HarnessError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(err(field, format!("expected a boolean, got '{v}'"))),
    }
}

/// Comma list, or `start:step:stop` inclusive range.
pub fn parse_grid(field: &str, v: &str) -> Result<Vec<f64>, HarnessError> {
    let v = v.trim();
    if v.contains(':') {
        let parts: Vec<f64> = v.split(':').map(|p| parse::<f64>(field, p)).collect::<Result<_, _>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(err(field, "range must be start:step:stop"));
        };
        if !(step > 0.0) || stop < start {
            return Err(err(field, "range needs a positive step and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(|p| parse::<f64>(field, p)).collect()
}

fn parse_list<T: FromStr>(field: &str, v: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: std::fmt::Display,
{
    v.split(',').filter(|s| !s.trim().is_empty()).map(|p| parse::<T>(field, p)).collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(&format!("line {}", n + 1), format!("expected key=value, got '{line}'")))?;
            let key = k.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(err(&key, "given more than once"));
            }
        }
        Self::from_entries(&entries)
    }

    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self, HarnessError> {
        let mut cfg = RunConfig::default();
        let receiver = match entries.get("receiver") {
            Some(v) => parse::<ReceiverKind>("receiver", v)?,
            None => cfg.scenario.receiver,
        };
        cfg.scenario = Scenario::for_receiver(receiver);
        for (key, v) in entries {
            let s = &mut cfg.scenario;
            let f = key.as_str();
            match f {
                "receiver" => {}
                "snr_db" => s.snr_db = parse_grid(f, v)?,
                "sir_db" => s.sir_db = parse(f, v)?,
                "antennas.tx" => s.tx_antennas = parse(f, v)?,
                "antennas.rx" => s.rx_antennas = parse(f, v)?,
                "streams" => s.streams = parse(f, v)?,
                "desired.modulation" => s.desired.modulation = parse::<Modulation>(f, v)?,
                "desired.rate" => s.desired.rate = parse(f, v)?,
                "interference.modulation" => s.interference.modulation = parse::<Modulation>(f, v)?,
                "interference.rate" => s.interference.rate = parse(f, v)?,
                "iterations.inner" => s.inner_iterations = parse(f, v)?,
                "iterations.outer" => s.outer_iterations = parse(f, v)?,
                "packets" => s.packets = parse(f, v)?,
                "subcarriers" => s.subcarriers = parse(f, v)?,
                "info_bits" => s.info_bits = parse(f, v)?,
                "mode" => s.mode = parse::<DetectionMode>(f, v)?,
                "seed" => s.seed = parse(f, v)?,
                "noiseless" => s.noiseless = parse_bool(f, v)?,
                "out" => cfg.out_dir = PathBuf::from(v),
                "stop.errors" => cfg.stop_errors = parse(f, v)?,
                "stop.batch" => cfg.batch = parse(f, v)?,
                "stop.per_floor" => cfg.per_floor = parse(f, v)?,
                "threads" => cfg.threads = Some(parse(f, v)?),
                "exit.snr_db" => cfg.exit.snr_db = parse(f, v)?,
                "exit.grid_points" => cfg.exit.grid_points = parse(f, v)?,
                "exit.samples" => cfg.exit.samples = parse(f, v)?,
                "exit.rates" => cfg.exit.rates = parse_list(f, v)?,
                "exit.receivers" => cfg.exit.receivers = parse_list(f, v)?,
                "exit.inner_iterations" => cfg.exit.inner_iterations = parse(f, v)?,
                "exit.max_iterations" => cfg.exit.max_iterations = parse(f, v)?,
                "exit.trajectory_receiver" => cfg.exit.trajectory_receiver = parse(f, v)?,
                "exit.trajectory_rate" => cfg.exit.trajectory_rate = parse(f, v)?,
                "jtable.points" => cfg.exit.jtable_points = parse(f, v)?,
                "jtable.nodes" => cfg.exit.jtable_nodes = parse(f, v)?,
                _ => return Err(err(f, "unknown key")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let s = &self.scenario;
        if s.packets == 0 {
            return Err(err("packets", "packet budget must be at least 1"));
        }
        if s.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(err("snr_db", "SNR grid must be strictly ascending"));
        }
        if self.batch == 0 {
            return Err(err("stop.batch", "batch size must be positive"));
        }
        if self.stop_errors == 0 {
            return Err(err("stop.errors", "error target must be positive"));
        }
        if !(0.0..1.0).contains(&self.per_floor) {
            return Err(err("stop.per_floor", "must lie in [0, 1)"));
        }
        if self.threads == Some(0) {
            return Err(err("threads", "must be positive"));
        }
        let e = &self.exit;
        if e.grid_points < 2 {
            return Err(err("exit.grid_points", "need at least 2 points"));
        }
        if e.samples == 0 {
            return Err(err("exit.samples", "must be positive"));
        }
        if e.jtable_points < 64 {
            return Err(err("jtable.points", "need at least 64 points"));
        }
        if let Some(r) = e.rates.iter().chain([&e.trajectory_rate]).find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(err("exit.rates", format!("rate {r} outside (0, 1)")));
        }
        if let Some(k) = e.receivers.iter().chain([&e.trajectory_receiver]).find(|k| {
            !matches!(k, ReceiverKind::Iw | ReceiverKind::IaDet | ReceiverKind::Iapd)
        }) {
            return Err(err("exit.receivers", format!("{k} has no detector transfer curve")));
        }
        s.validate().map_err(|e| err("scenario", e.to_string()))
    }

    /// `key=value` dump that [`RunConfig::parse`] accepts.
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let e = &self.exit;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("receiver", s.receiver.to_string());
        kv("snr_db", join(&s.snr_db));
        kv("sir_db", s.sir_db.to_string());
        kv("antennas.tx", s.tx_antennas.to_string());
        kv("antennas.rx", s.rx_antennas.to_string());
        kv("streams", s.streams.to_string());
        kv("desired.modulation", s.desired.modulation.to_string());
        kv("desired.rate", s.desired.rate.to_string());
        kv("interference.modulation", s.interference.modulation.to_string());
        kv("interference.rate", s.interference.rate.to_string());
        kv("iterations.inner", s.inner_iterations.to_string());
        kv("iterations.outer", s.outer_iterations.to_string());
        kv("packets", s.packets.to_string());
        kv("subcarriers", s.subcarriers.to_string());
        kv("info_bits", s.info_bits.to_string());
        kv("mode", s.mode.to_string());
        kv("seed", s.seed.to_string());
        kv("noiseless", s.noiseless.to_string());
        kv("out", self.out_dir.display().to_string());
        kv("stop.errors", self.stop_errors.to_string());
        kv("stop.batch", self.batch.to_string());
        kv("stop.per_floor", self.per_floor.to_string());
        if let Some(t) = self.threads {
            kv("threads", t.to_string());
        }
        kv("exit.snr_db", e.snr_db.to_string());
        kv("exit.grid_points", e.grid_points.to_string());
        kv("exit.samples", e.samples.to_string());
        kv("exit.rates", join(&e.rates));
        kv(
            "exit.receivers",
            e.receivers.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        kv("exit.inner_iterations", e.inner_iterations.to_string());
        kv("exit.max_iterations", e.max_iterations.to_string());
        kv("exit.trajectory_receiver", e.trajectory_receiver.to_string());
        kv("exit.trajectory_rate", e.trajectory_rate.to_string());
        kv("jtable.points", e.jtable_points.to_string());
        kv("jtable.nodes", e.jtable_nodes.to_string());
        out
    }

    /// Convenience for building scenarios in code.
    pub fn with_signals(mut self, desired: SignalConfig, interference: SignalConfig) -> Self {
        self.scenario.desired = desired;
        self.scenario.interference = interference;
        self
    }
}
