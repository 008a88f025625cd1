use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iasim::config::RunConfig;
use iasim::emit::{self, Series};
use iasim::exit_run::{jtable, run_exit, run_trajectory};
use iasim::{per, selftest, HarnessError};
use iasim_core::detect::DetectionMode;

#[derive(Parser)]
#[command(name = "iasim", version, about = "Two-user MIMO interference channel link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Packet error rate sweep over the configured SNR grid.
    Per(Common),
    /// Detector and decoder EXIT transfer curves.
    ExitCurve(Common),
    /// EXIT trajectory of one receiver against one code rate.
    ExitTrajectory(Common),
    /// Tabulated J function.
    Jtable(Common),
    /// Compare the fast paths against brute-force references.
    Selftest,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    packets: Option<usize>,
    /// Worker threads (hint).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = ["exact", "maxlog"])]
    mode: Option<String>,
}

fn load(c: &Common) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.scenario.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(p) = c.packets {
        cfg.scenario.packets = p;
    }
    if let Some(t) = c.threads {
        cfg.threads = Some(t);
    }
    if let Some(m) = &c.mode {
        cfg.scenario.mode = m.parse::<DetectionMode>().map_err(|e| HarnessError::Config {
            field: "--mode".into(),
            message: e.to_string(),
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Per(c) => {
            let cfg = load(&c)?;
            let points = per::run_per(&cfg)?;
            for p in &points {
                println!(
                    "snr {:>6.2} dB  packets {:>6}  errors {:>5}  per {:.4} ± {:.4}",
                    p.snr_db, p.packets, p.errors, p.per, p.ci95
                );
            }
            report(&emit::emit_per(&cfg.out_dir, &cfg, &points)?);
        }
        Command::ExitCurve(c) => {
            let cfg = load(&c)?;
            let rep = run_exit(&cfg)?;
            let dir = &cfg.out_dir;
            let det = dir.join("exit_detector.csv");
            let dec = dir.join("exit_decoder.csv");
            emit::write_curves_csv(&det, &rep.detector_curves)?;
            emit::write_curves_csv(&dec, &rep.decoder_curves)?;
            let mut series = emit::curve_series(&rep.detector_curves);
            // decoder curves drawn with swapped axes so tunnels are visible
            series.extend(rep.decoder_curves.iter().map(|c| Series {
                label: c.label.clone(),
                points: c.points.iter().map(|&(a, e)| (e, a)).collect(),
            }));
            let svg = dir.join("exit.svg");
            emit::write_text(&svg, &emit::svg_chart("EXIT chart", "I_a detector / I_e decoder", "I_e detector / I_a decoder", &series, false))?;
            let meta = dir.join("exit.meta");
            emit::write_text(&meta, &emit::metadata(&cfg, "exit-curve", &[]))?;
            report(&[det, dec, svg, meta]);
        }
        Command::ExitTrajectory(c) => {
            let cfg = load(&c)?;
            let (det, dec, tr) = run_trajectory(&cfg)?;
            let dir = &cfg.out_dir;
            let curves = dir.join("trajectory_curves.csv");
            emit::write_curves_csv(&curves, &[det.clone(), dec.clone()])?;
            let steps = dir.join("trajectory.csv");
            emit::write_trajectory_csv(&steps, &tr)?;
            let series = vec![
                Series {
                    label: det.label.clone(),
                    points: det.points.clone(),
                },
                Series {
                    label: dec.label.clone(),
                    points: dec.points.iter().map(|&(a, e)| (e, a)).collect(),
                },
                Series {
                    label: "trajectory".into(),
                    points: tr.points.clone(),
                },
            ];
            let svg = dir.join("trajectory.svg");
            emit::write_text(&svg, &emit::svg_chart("EXIT trajectory", "I_a detector", "I_e detector", &series, false))?;
            let extra = vec![
                ("trajectory.converged".to_string(), tr.converged.to_string()),
                ("trajectory.iterations".to_string(), tr.iterations.to_string()),
                ("trajectory.final_mi".to_string(), tr.final_mi.to_string()),
            ];
            let meta = dir.join("trajectory.meta");
            emit::write_text(&meta, &emit::metadata(&cfg, "exit-trajectory", &extra))?;
            println!(
                "converged={} iterations={} final_mi={:.4}",
                tr.converged, tr.iterations, tr.final_mi
            );
            report(&[curves, steps, svg, meta]);
        }
        Command::Jtable(c) => {
            let cfg = load(&c)?;
            let t = jtable(&cfg)?;
            let path = cfg.out_dir.join("jtable.csv");
            let mut text = String::from("sigma,j\n");
            for (s, j) in t.sigma_grid().iter().zip(t.values()) {
                text.push_str(&format!("{s},{j}\n"));
            }
            emit::write_text(&path, &text)?;
            report(&[path]);
        }
        Command::Selftest => {
            let checks = selftest::run();
            let mut ok = true;
            for c in &checks {
                println!("[{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Err(HarnessError::Internal("selftest failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
