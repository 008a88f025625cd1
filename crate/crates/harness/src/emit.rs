//! CSV, SVG and metadata output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use iasim_core::exit::{Trajectory, TransferCurve};

use crate::config::RunConfig;
use crate::per::PerPoint;
use crate::HarnessError;

pub const PER_COLUMNS: [&str; 6] = ["snr_db", "packets", "errors", "per", "ci95", "interference_per"];

pub const VERSION: &str = concat!("iasim ", env!("CARGO_PKG_VERSION"));

fn io(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| io(path, e))
}

/// PER table; floats use shortest round-trip formatting, a missing
/// interference PER is an empty field.
pub fn write_per_csv(path: &Path, points: &[PerPoint]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(PER_COLUMNS).map_err(|e| io(path, e))?;
    for p in points {
        w.write_record([
            p.snr_db.to_string(),
            p.packets.to_string(),
            p.errors.to_string(),
            p.per.to_string(),
            p.ci95.to_string(),
            p.interference_per.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn read_per_csv(path: &Path) -> Result<Vec<PerPoint>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| io(path, e))?.iter().map(String::from).collect();
    if header != PER_COLUMNS {
        return Err(io(path, format!("unexpected columns {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| io(path, e));
    let int = |s: &str| s.parse::<usize>().map_err(|e| io(path, e));
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| io(path, e))?;
            Ok(PerPoint {
                snr_db: num(&rec[0])?,
                packets: int(&rec[1])?,
                errors: int(&rec[2])?,
                per: num(&rec[3])?,
                ci95: num(&rec[4])?,
                interference_per: if rec[5].is_empty() { None } else { Some(num(&rec[5])?) },
            })
        })
        .collect()
}

/// Long-format curve table: `curve,i_a,i_e`.
pub fn write_curves_csv(path: &Path, curves: &[TransferCurve]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(["curve", "i_a", "i_e"]).map_err(|e| io(path, e))?;
    for c in curves {
        for &(a, e) in &c.points {
            w.write_record([c.label.clone(), a.to_string(), e.to_string()])
                .map_err(|e| io(path, e))?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn write_trajectory_csv(path: &Path, tr: &Trajectory) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "i_a", "i_e"]).map_err(|e| io(path, e))?;
    for (i, &(a, e)) in tr.points.iter().enumerate() {
        w.write_record([i.to_string(), a.to_string(), e.to_string()])
            .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// One polyline series for [`svg_chart`].
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Self-contained SVG line chart. With `log_y` the y axis spans whole
/// decades and non-positive values are dropped.
pub fn svg_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 440.0, 70.0, 170.0, 40.0, 50.0);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|p| !log_y || p.1 > 0.0)
        .collect();
    let fold = |f: fn(f64, f64) -> f64, init: f64, g: &dyn Fn(&(f64, f64)) -> f64| pts.iter().map(g).fold(init, f);
    let (mut x0, mut x1) = (fold(f64::min, f64::INFINITY, &|p| p.0), fold(f64::max, f64::NEG_INFINITY, &|p| p.0));
    let (mut y0, mut y1) = (fold(f64::min, f64::INFINITY, &|p| ty(p.1)), fold(f64::max, f64::NEG_INFINITY, &|p| ty(p.1)));
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else {
        y0 = y0.min(0.0);
        y1 = y1.max(y0 + 1e-9);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (ty(y) - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (ml + w - mr) / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(x), h - mb + 16.0, fmt_tick(x));
    }
    let y_ticks: Vec<f64> = if log_y {
        (y0 as i32..=y1 as i32).map(|d| 10f64.powi(d)).collect()
    } else {
        (0..=5).map(|i| y0 + (y1 - y0) * i as f64 / 5.0).collect()
    };
    for y in y_ticks {
        let (right, yy, lx) = (w - mr, py(y), ml - 6.0);
        let label = if log_y { format!("{y:e}") } else { fmt_tick(y) };
        let _ = writeln!(
            s,
            r##"<line x1="{ml}" x2="{right}" y1="{yy:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{lx}" y="{:.1}" text-anchor="end">{label}</text>"##,
            yy + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (ml + w - mr) / 2.0, h - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (mt + h - mb) / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| !log_y || p.1 > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = mt + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" x2="{1}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{3}">{4}</text>"#,
            w - mr + 8.0,
            w - mr + 28.0,
            w - mr + 32.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{r:.0}")
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io(path, e))
}

/// Modelling choices recorded in every metadata sidecar.
pub const DECISIONS: [(&str, &str); 9] = [
    ("codewords", "one desired codeword per spatial stream, 2 per packet"),
    ("fading", "independent block fading per subcarrier and packet; symbol vector t on subcarrier t mod subcarriers"),
    ("frame", "frame length set by the desired codeword; interference sends back-to-back codewords, the cut-off tail is decoded with zero LLRs"),
    ("rate_matching", "systematic bits always kept; parity punctured evenly and alternately; repetition when round(K/R) exceeds the mother length"),
    ("feedback", "decoder extrinsic, interleaved, is the detector a-priori input"),
    ("iasd_schedule", "D, then outer-1 rounds of (I with D prior, D with both priors)"),
    ("early_stop", "PER = errors/packets; stop rule checked at fixed batch boundaries"),
    ("ci95", "Wilson score interval half-width"),
    ("exit_axes", "curve files give (i_a, i_e) per block; axis orientation left to the plot"),
];

pub fn metadata(cfg: &RunConfig, command: &str, extra: &[(String, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "version={VERSION}");
    let _ = writeln!(s, "command={command}");
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(s, "generated_unix={ts}");
    for line in cfg.to_text().lines() {
        let _ = writeln!(s, "config.{line}");
    }
    let _ = writeln!(s, "stop.rule=stop an SNR point after {} packet errors", cfg.stop_errors);
    for (k, v) in DECISIONS {
        let _ = writeln!(s, "decision.{k}={v}");
    }
    for (k, v) in extra {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

/// Writes `per.csv`, `per.svg` and `per.meta` under `dir`.
pub fn emit_per(dir: &Path, cfg: &RunConfig, points: &[PerPoint]) -> Result<Vec<PathBuf>, HarnessError> {
    let csv = dir.join("per.csv");
    write_per_csv(&csv, points)?;
    let svg = dir.join("per.svg");
    let s = &cfg.scenario;
    let title = format!(
        "{} {}/{} R={} SIR {} dB",
        s.receiver, s.desired.modulation, s.interference.modulation, s.desired.rate, s.sir_db
    );
    let series = [Series {
        label: s.receiver.to_string(),
        points: points.iter().map(|p| (p.snr_db, p.per)).collect(),
    }];
    write_text(&svg, &svg_chart(&title, "SNR (dB)", "PER", &series, true))?;
    let meta = dir.join("per.meta");
    write_text(&meta, &metadata(cfg, "per", &[]))?;
    Ok(vec![csv, svg, meta])
}

pub fn curve_series(curves: &[TransferCurve]) -> Vec<Series> {
    curves
        .iter()
        .map(|c| Series {
            label: c.label.clone(),
            points: c.points.clone(),
        })
        .collect()
}
