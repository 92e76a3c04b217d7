use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swarmloc::metrics::{mse_for, run_ablation, TrajectoryLog};
use swarmloc::scenario::{load_scenario, Scenario};
use swarmloc::sensors::calibrate_drift;
use swarmloc::sim::simulate;

const EXIT_MISSION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "swarmloc",
    version,
    about = "Multi-UAV swarm simulation with landmark localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its trajectory log as CSV.
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the tag ablation grid and print the MSE table.
    Ablate {
        scenario: PathBuf,
        /// Seeds 0..N per cell; defaults to `ablation.seeds`.
        #[arg(long)]
        seeds: Option<u64>,
        /// Where to write the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Calibrate each trajectory's odometry drift to its `target_mse`
        /// before running.
        #[arg(long)]
        calibrate: bool,
    },
    /// Recompute per-UAV MSE from a CSV log.
    Metrics { log: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, seed, out } => cmd_run(&scenario, seed, out.as_ref()),
        Command::Ablate {
            scenario,
            seeds,
            out,
            calibrate,
        } => cmd_ablate(&scenario, seeds, out.as_ref(), calibrate),
        Command::Metrics { log } => cmd_metrics(&log),
    }
}

fn load(path: &PathBuf) -> Result<Scenario, ExitCode> {
    load_scenario(path).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

/// `mse uav0=… uav1=…`, in order of first appearance.
fn mse_summary(log: &TrajectoryLog) -> String {
    let mut ids: Vec<usize> = Vec::new();
    for r in log.records() {
        if !ids.contains(&r.uav) {
            ids.push(r.uav);
        }
    }
    let parts: Vec<String> = ids
        .iter()
        .map(|&u| match mse_for(log, u) {
            Ok(m) => format!("uav{u}={m:.9e}"),
            Err(_) => format!("uav{u}=n/a"),
        })
        .collect();
    format!("mse {}", parts.join(" "))
}

fn cmd_run(path: &PathBuf, seed: Option<u64>, out: Option<&PathBuf>) -> ExitCode {
    let mut scenario = match load(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let outcome = match simulate(&scenario) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let written = match out {
        Some(p) => File::create(p).map_err(|e| e.to_string()).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.log.write_csv(&mut w).map_err(|e| e.to_string())?;
            w.flush().map_err(|e| e.to_string())
        }),
        None => outcome.log.write_csv(io::stdout().lock()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("cannot write log: {e}");
        return ExitCode::from(EXIT_MISSION);
    }
    let summary = format!(
        "duration {:.2} s, {} ticks, {}",
        outcome.duration,
        outcome.ticks,
        mse_summary(&outcome.log)
    );
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    match outcome.failure {
        Some(reason) => {
            eprintln!("mission failed: {reason}");
            ExitCode::from(EXIT_MISSION)
        }
        None if !outcome.completed => {
            eprintln!("mission failed: not completed");
            ExitCode::from(EXIT_MISSION)
        }
        None => ExitCode::SUCCESS,
    }
}

fn cmd_ablate(path: &PathBuf, seeds: Option<u64>, out: Option<&PathBuf>, calibrate: bool) -> ExitCode {
    let mut scenario = match load(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let n = seeds.unwrap_or(scenario.ablation.seeds as u64);
    let seeds: Vec<u64> = (0..n).collect();
    if calibrate {
        for k in 0..scenario.ablation.trajectories.len() {
            let entry = scenario.ablation.trajectories[k].clone();
            let Some(target) = entry.target_mse else {
                continue;
            };
            match calibrate_drift(&scenario, &entry, target, &seeds, 30) {
                Ok(c) => {
                    println!(
                        "calibrated ablation.trajectories[{k}]: odometry_scale {:.6} gives no-tag MSE {:.4} (target {target})",
                        c.odometry.scale, c.mse
                    );
                    scenario.ablation.trajectories[k].odometry_scale = c.odometry.scale;
                }
                Err(e) => {
                    eprintln!("ablation.trajectories[{k}]: {e}");
                    return ExitCode::from(EXIT_MISSION);
                }
            }
        }
    }
    let report = match run_ablation(&scenario, &seeds) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("ablation failed: {e}");
            return ExitCode::from(EXIT_MISSION);
        }
    };
    print!("{}", report.to_table());
    if let Some(p) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(p, json + "\n") {
            eprintln!("cannot write {}: {e}", p.display());
            return ExitCode::from(EXIT_MISSION);
        }
    }
    ExitCode::SUCCESS
}

fn cmd_metrics(path: &PathBuf) -> ExitCode {
    let log = match File::open(path)
        .map_err(|e| e.to_string())
        .and_then(|f| TrajectoryLog::read_csv(io::BufReader::new(f)).map_err(|e| e.to_string()))
    {
        Ok(l) => l,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if log.is_empty() {
        eprintln!("empty-log: {}", path.display());
        return ExitCode::from(EXIT_MISSION);
    }
    println!("{}", mse_summary(&log));
    ExitCode::SUCCESS
}
