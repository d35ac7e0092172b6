//! `evcam` — scenario harness for the event-driven smart camera
//! simulator.
//!
//! Subcommands: `run` (full scenario with energy, trigger and metric
//! reports), `sweep` (one event-driven simulation per wake threshold),
//! `calibrate` (fit the processing model against a periodic-polling
//! power target), `gen` (render a synthetic scenario to PGM frames and
//! a labels CSV). Set `EVCAM_LOG=debug|info|warn` for log output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error,
//! 4 completed with overrun/overflow warnings.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use evcam_core::config::{ProcessingSpec, ScenarioConfig};
use evcam_core::error::Error;
use evcam_core::scenario::{
    generate_to_dir, run_scenario, sweep_csv, threshold_sweep, write_report_selected,
    ReportSelection, RunReport,
};

#[derive(Parser)]
#[command(
    name = "evcam",
    version,
    about = "Event-driven smart camera node simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrameworkArg {
    Event,
    Polling,
    Active,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end and write its reports.
    Run {
        /// Scenario config file.
        config: PathBuf,
        /// Which framework's energy reports to emit.
        #[arg(long, value_enum, default_value_t = FrameworkArg::Both)]
        framework: FrameworkArg,
    },
    /// Simulate the event-driven framework once per wake threshold.
    Sweep {
        config: PathBuf,
        /// Comma-separated threshold list, e.g. 40,80,120.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<u32>,
    },
    /// Fit the processing model to a periodic-polling power target.
    Calibrate {
        config: PathBuf,
        /// Target average power in microwatts.
        #[arg(long)]
        target_uw: f64,
    },
    /// Render a synthetic scenario to PGM frames plus labels.csv.
    Gen { config: PathBuf },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Scene(_) | Error::Calibration(_) => 2,
        Error::Io { .. } | Error::Format { .. } => 3,
        _ => 1,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Error> {
    let mut cfg = ScenarioConfig::from_file(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn print_run_summary(report: &RunReport) {
    println!(
        "{}: {} frames, {:.1}% waking (mean count {:.0})",
        report.scenario,
        report.n_frames,
        report.wake_fraction * 100.0,
        report.mean_wake_count
    );
    if report.calibrated {
        println!(
            "calibrated processing model: t = {:.2} us + {:.4} us/event",
            report.processing.c0_us, report.processing.c1_us_per_event
        );
    }
    println!(
        "average power: periodic-polling {:.2} uW, event-driven {:.2} uW ({:.1}% saving), fully-active {:.1} uW",
        report.comparison.periodic.total_avg_uw,
        report.comparison.event.total_avg_uw,
        report.comparison.reduction_pct,
        report.fully_active.total_avg_uw
    );
    println!(
        "triggers: event {} (P={:.3} R={:.3}), baseline {} (P={:.3} R={:.3}), {} labels",
        report.event_triggers.len(),
        report.metrics_event.precision,
        report.metrics_event.recall,
        report.baseline_triggers.len(),
        report.metrics_baseline.precision,
        report.metrics_baseline.recall,
        report.labels.len()
    );
}

fn execute(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config, framework } => {
            let cfg = load_config(&config, cli.seed)?;
            let report = run_scenario(&cfg)?;
            let selection = match framework {
                FrameworkArg::Both => ReportSelection::All,
                FrameworkArg::Event => ReportSelection::EventOnly,
                FrameworkArg::Polling => ReportSelection::PollingOnly,
                FrameworkArg::Active => ReportSelection::ActiveOnly,
            };
            write_report_selected(&report, &cli.out, selection)?;
            print_run_summary(&report);
            println!("reports written to {}", cli.out.display());
            if report.warnings.any() {
                log::warn!(
                    "warnings: {} overruns, {} overflowing frames, {} coalesced wakes",
                    report.warnings.overruns,
                    report.warnings.overflow_frames,
                    report.warnings.coalesced
                );
                return Ok(true);
            }
            Ok(false)
        }
        Command::Sweep { config, thresholds } => {
            let cfg = load_config(&config, cli.seed)?;
            let rows = threshold_sweep(&cfg, &thresholds)?;
            std::fs::create_dir_all(&cli.out)
                .map_err(|e| Error::io(cli.out.display().to_string(), e))?;
            let path = cli.out.join("sweep.csv");
            std::fs::write(&path, sweep_csv(&rows))
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            for row in &rows {
                println!(
                    "threshold {:5}: wake {:5.1}%  event-driven {:.2} uW  recall {:.3}",
                    row.threshold,
                    row.wake_fraction * 100.0,
                    row.event_driven_uw,
                    row.recall
                );
            }
            println!("sweep written to {}", path.display());
            Ok(false)
        }
        Command::Calibrate { config, target_uw } => {
            let mut cfg = load_config(&config, cli.seed)?;
            let base = match &cfg.processing {
                ProcessingSpec::Fixed(m) => *m,
                ProcessingSpec::Calibrate { base, .. } => *base,
            };
            cfg.processing = ProcessingSpec::Calibrate { target_uw, base };
            let report = run_scenario(&cfg)?;
            println!(
                "calibrated to {:.2} uW periodic-polling: t = {:.2} us + {:.4} us/event",
                report.comparison.periodic.total_avg_uw,
                report.processing.c0_us,
                report.processing.c1_us_per_event
            );
            println!(
                "predicted event-driven power: {:.2} uW ({:.1}% saving)",
                report.comparison.event.total_avg_uw, report.comparison.reduction_pct
            );
            std::fs::create_dir_all(&cli.out)
                .map_err(|e| Error::io(cli.out.display().to_string(), e))?;
            let path = cli.out.join("calibration.csv");
            std::fs::write(
                &path,
                format!(
                    "target_uW,achieved_pp_uW,event_driven_uW,c0_us,c1_us_per_event\n{:.4},{:.4},{:.4},{:.4},{:.6}\n",
                    target_uw,
                    report.comparison.periodic.total_avg_uw,
                    report.comparison.event.total_avg_uw,
                    report.processing.c0_us,
                    report.processing.c1_us_per_event
                ),
            )
            .map_err(|e| Error::io(path.display().to_string(), e))?;
            println!("calibration written to {}", path.display());
            Ok(false)
        }
        Command::Gen { config } => {
            let cfg = load_config(&config, cli.seed)?;
            generate_to_dir(&cfg, &cli.out)?;
            println!(
                "{} frames and labels.csv written to {}",
                cfg.n_frames,
                cli.out.display()
            );
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `evcam ... | head`) like other
    // Unix tools instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::new().filter("EVCAM_LOG")).init();
    let cli = Cli::parse();
    if cli.format != "csv" {
        eprintln!("error: unsupported format '{}' (only csv)", cli.format);
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(4),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
