//! End-to-end scenario runs: sensing, frameworks, pipelines, reports.
//!
//! A run drives the sensor and camera interface over the frame sequence
//! once, then evaluates the computational frameworks on that identical
//! sensed trace (framework fairness), runs the event and baseline
//! trigger pipelines, matches triggers against ground truth, and emits
//! CSV reports. Runs are deterministic in (config, seed): every output
//! byte is reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{FrameSource, ProcessingSpec, ScenarioConfig};
use crate::energy::{
    calibrate_processing, compare_frameworks, simulate_framework, EnergyReport, Framework,
    FrameworkComparison, ProcessingModel,
};
use crate::error::{Error, Result};
use crate::interface::{cu_decide_mode, interface_frame_step, FrameRecord, InterfaceConfig};
use crate::metrics::{
    labels_to_csv, match_triggers, read_labels_csv, triggers_to_csv, GroundTruthLabel, MetricCounts,
};
use crate::pgm;
use crate::pipeline::trigger::{TriggerEvent, TriggerRule};
use crate::pipeline::{EventPipeline, PipelineParams};
use crate::power::{pm_trace_requests, WakeRequest};
use crate::scene::{derive_labels, generate_scene};
use crate::sensor::{encode_readout, AddressEvent, ContrastSensor, GrayFrame, SensorMode};
use crate::{baseline, energy};

/// Threshold-independent sensing result for one frame: the asserted-pixel
/// count and the full decoded event list.
#[derive(Debug, Clone, PartialEq)]
pub struct SensedFrame {
    pub count: u32,
    pub events: Vec<AddressEvent>,
}

/// Runs the sensor and camera interface over the frames through the
/// native readout protocol (encode, decode, 4-pixel packing, storage).
/// The first frame primes the sensor's pixel memory and yields no events.
pub fn sense_scenario(
    gray: &[GrayFrame],
    theta_c: f64,
    iface: &InterfaceConfig,
) -> Result<(Vec<FrameRecord>, Vec<SensedFrame>)> {
    let mut sensor = ContrastSensor::new(theta_c);
    let mut records = Vec::with_capacity(gray.len());
    let mut sensed = Vec::with_capacity(gray.len());
    let mut prev_mode = SensorMode::Idle;
    for (index, frame) in gray.iter().enumerate() {
        let diff = sensor.advance(frame);
        let count = diff.count();
        let mode = cu_decide_mode(count, iface);
        let stream = (mode == SensorMode::Active).then(|| encode_readout(&diff));
        let record = interface_frame_step(index as u64, count, stream.as_ref(), prev_mode, iface)?;
        prev_mode = record.mode;
        sensed.push(SensedFrame {
            count,
            events: diff.events(),
        });
        records.push(record);
    }
    Ok((records, sensed))
}

/// Rebuilds frame records from cached sensing results under a different
/// threshold. Equivalent to re-running the readout protocol: storage
/// keeps the first 1024 decoded events (packing is semantics-free).
pub fn records_from_sensed(sensed: &[SensedFrame], iface: &InterfaceConfig) -> Vec<FrameRecord> {
    sensed
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let mode = cu_decide_mode(s.count, iface);
            let active = mode == SensorMode::Active;
            let kept = s.events.len().min(crate::interface::STORAGE_CAPACITY);
            FrameRecord {
                frame_index: index as u64,
                mode,
                count: s.count,
                events: if active {
                    s.events[..kept].to_vec()
                } else {
                    Vec::new()
                },
                wake: active,
                overflow: active && s.count as usize > crate::interface::STORAGE_CAPACITY,
                activity: if active {
                    vec![crate::interface::ActivityWindow {
                        kind: crate::interface::ActivityKind::RingOscillator,
                        duration: iface.t_readout,
                    }]
                } else {
                    Vec::new()
                },
            }
        })
        .collect()
}

/// Per-frame trace row for the `trace.csv` report.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub frame_index: u64,
    pub count: u32,
    pub mode: SensorMode,
    pub wake: bool,
    pub stored: u32,
    pub overflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Warnings {
    /// Activations that ran past their frame period (both frameworks).
    pub overruns: u32,
    /// Frames whose event count exceeded the storage capacity.
    pub overflow_frames: u32,
    /// Wake requests coalesced into an ongoing activation.
    pub coalesced: u32,
}

impl Warnings {
    pub fn any(&self) -> bool {
        self.overruns > 0 || self.overflow_frames > 0 || self.coalesced > 0
    }
}

/// Everything one scenario run produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub n_frames: u64,
    pub wake_fraction: f64,
    pub mean_wake_count: f64,
    pub processing: ProcessingModel,
    pub calibrated: bool,
    pub fully_active: EnergyReport,
    pub comparison: FrameworkComparison,
    pub event_triggers: Vec<TriggerEvent>,
    pub baseline_triggers: Vec<TriggerEvent>,
    pub labels: Vec<GroundTruthLabel>,
    pub metrics_event: MetricCounts,
    pub metrics_baseline: MetricCounts,
    pub trace: Vec<TraceRow>,
    pub warnings: Warnings,
}

/// Loads or generates the frame sequence and ground-truth labels.
pub fn materialize_frames(cfg: &ScenarioConfig) -> Result<(Vec<GrayFrame>, Vec<GroundTruthLabel>)> {
    match &cfg.source {
        FrameSource::Profile(_) | FrameSource::Inline => {
            let frames = generate_scene(&cfg.scene_spec, cfg.n_frames, cfg.seed)?;
            let labels = derive_labels(&cfg.scene_spec, &cfg.rules, cfg.n_frames);
            Ok((frames, labels))
        }
        FrameSource::Directory(dir) => {
            let mut frames = pgm::read_frame_dir(dir)?;
            if frames.len() as u64 > cfg.n_frames {
                frames.truncate(cfg.n_frames as usize);
            }
            let labels = match &cfg.labels_path {
                Some(path) => read_labels_csv(path)?,
                None => Vec::new(),
            };
            Ok((frames, labels))
        }
    }
}

/// Runs the event pipeline over the captured per-frame events. The
/// processor only sees events on frames that woke it; on other frames
/// the pipeline steps with an empty event list (tracks coast and age).
pub fn run_event_pipeline(
    frames: &[FrameRecord],
    params: &PipelineParams,
    rules: &[TriggerRule],
) -> Vec<TriggerEvent> {
    let mut pipeline = EventPipeline::new(params.clone(), rules.to_vec());
    let mut triggers = Vec::new();
    for frame in frames {
        let events: &[AddressEvent] = if frame.wake { &frame.events } else { &[] };
        triggers.extend(pipeline.step(frame.frame_index, events));
    }
    triggers
}

/// Runs the frame-based baseline detector through the shared tracker and
/// trigger engine. The reference frame is either the previous frame
/// (motion detection) or the first frame (static-background
/// subtraction), per the baseline parameters.
pub fn run_baseline_pipeline(
    gray: &[GrayFrame],
    params: &PipelineParams,
    baseline_params: &baseline::BaselineParams,
    rules: &[TriggerRule],
) -> Vec<TriggerEvent> {
    let mut pipeline = EventPipeline::new(params.clone(), rules.to_vec());
    let mut triggers = Vec::new();
    for (index, frame) in gray.iter().enumerate() {
        let reference = match baseline_params.reference {
            baseline::ReferenceFrame::Previous if index > 0 => &gray[index - 1],
            baseline::ReferenceFrame::Previous => frame,
            baseline::ReferenceFrame::First => &gray[0],
        };
        let blobs = baseline::baseline_detect(frame, reference, baseline_params);
        triggers.extend(pipeline.step_with_blobs(index as u64, &blobs));
    }
    triggers
}

/// Resolves the processing model, running calibration when requested.
pub fn resolve_processing(
    cfg: &ScenarioConfig,
    frames: &[FrameRecord],
) -> Result<(ProcessingModel, bool)> {
    match &cfg.processing {
        ProcessingSpec::Fixed(model) => Ok((*model, false)),
        ProcessingSpec::Calibrate { target_uw, base } => {
            let model = calibrate_processing(
                *target_uw,
                frames,
                &cfg.power,
                &cfg.timing,
                cfg.frame_period(),
                base,
            )?;
            Ok((model, true))
        }
    }
}

/// Full scenario run.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    let (gray, labels) = materialize_frames(cfg)?;
    let iface = cfg.interface();
    let period = cfg.frame_period();
    let (frames, _sensed) = sense_scenario(&gray, cfg.theta_c, &iface)?;

    let (processing, calibrated) = resolve_processing(cfg, &frames)?;

    let fully_active = simulate_framework(
        &frames,
        Framework::FullyActive,
        &cfg.power,
        &cfg.timing,
        &processing,
        period,
    )?;
    let comparison = compare_frameworks(&frames, &cfg.power, &cfg.timing, &processing, period)?;

    let event_triggers = run_event_pipeline(&frames, &cfg.pipeline, &cfg.rules);
    let baseline_triggers = run_baseline_pipeline(&gray, &cfg.pipeline, &cfg.baseline, &cfg.rules);
    let metrics_event = match_triggers(&event_triggers, &labels);
    let metrics_baseline = match_triggers(&baseline_triggers, &labels);

    let wake_count = frames.iter().filter(|f| f.wake).count();
    let wake_fraction = wake_count as f64 / frames.len().max(1) as f64;
    let mean_wake_count = if wake_count > 0 {
        frames
            .iter()
            .filter(|f| f.wake)
            .map(|f| f.count as f64)
            .sum::<f64>()
            / wake_count as f64
    } else {
        0.0
    };

    // Warnings from both framework traces.
    let mut warnings = Warnings {
        overflow_frames: frames.iter().filter(|f| f.overflow).count() as u32,
        ..Warnings::default()
    };
    for framework in [Framework::PeriodicPolling, Framework::EventDriven] {
        let requests: Vec<WakeRequest> = energy::wake_requests(&frames, framework);
        let trace = pm_trace_requests(
            &requests,
            frames.len() as u64,
            &cfg.timing,
            &processing,
            period,
        );
        warnings.overruns += trace.overrun_count();
        warnings.coalesced += trace.coalesced;
    }

    let trace = frames
        .iter()
        .map(|f| TraceRow {
            frame_index: f.frame_index,
            count: f.count,
            mode: f.mode,
            wake: f.wake,
            stored: f.stored(),
            overflow: f.overflow,
        })
        .collect();

    Ok(RunReport {
        scenario: cfg.name.clone(),
        n_frames: frames.len() as u64,
        wake_fraction,
        mean_wake_count,
        processing,
        calibrated,
        fully_active,
        comparison,
        event_triggers,
        baseline_triggers,
        labels,
        metrics_event,
        metrics_baseline,
        trace,
        warnings,
    })
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: u32,
    pub wake_fraction: f64,
    pub event_driven_uw: f64,
    pub recall: f64,
}

/// One full event-driven simulation per threshold on the identical frame
/// sequence. The processing model is resolved once (calibrating against
/// the configured threshold when requested) and reused across the sweep.
pub fn threshold_sweep(cfg: &ScenarioConfig, thresholds: &[u32]) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() {
        return Err(Error::Config(crate::error::ConfigError::Invalid(
            "threshold sweep needs at least one threshold".into(),
        )));
    }
    let (gray, labels) = materialize_frames(cfg)?;
    let iface = cfg.interface();
    let period = cfg.frame_period();
    let (frames, sensed) = sense_scenario(&gray, cfg.theta_c, &iface)?;
    let (processing, _) = resolve_processing(cfg, &frames)?;

    let mut rows = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let iface_t = InterfaceConfig {
            wake_threshold: threshold,
            ..iface.clone()
        };
        let records = records_from_sensed(&sensed, &iface_t);
        let report = simulate_framework(
            &records,
            Framework::EventDriven,
            &cfg.power,
            &cfg.timing,
            &processing,
            period,
        )?;
        let triggers = run_event_pipeline(&records, &cfg.pipeline, &cfg.rules);
        let metrics = match_triggers(&triggers, &labels);
        let wake_fraction =
            records.iter().filter(|f| f.wake).count() as f64 / records.len().max(1) as f64;
        rows.push(SweepRow {
            threshold,
            wake_fraction,
            event_driven_uw: report.total_avg_uw,
            recall: metrics.recall,
        });
    }
    Ok(rows)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn metrics_csv(report: &RunReport) -> String {
    let mut out = String::from("scenario,domain,TD,FP,FN,precision,recall\n");
    for (domain, m) in [
        ("event", &report.metrics_event),
        ("baseline", &report.metrics_baseline),
    ] {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.4},{:.4}",
            report.scenario,
            domain,
            m.true_detections,
            m.false_positives,
            m.false_negatives,
            m.precision,
            m.recall
        );
    }
    out
}

fn comparison_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "scenario,periodic_polling_uW,event_driven_uW,reduction_pct,fully_active_uW,wake_fraction,c0_us,c1_us\n",
    );
    let _ = writeln!(
        out,
        "{},{:.4},{:.4},{:.4},{:.4},{:.6},{:.4},{:.6}",
        report.scenario,
        report.comparison.periodic.total_avg_uw,
        report.comparison.event.total_avg_uw,
        report.comparison.reduction_pct,
        report.fully_active.total_avg_uw,
        report.wake_fraction,
        report.processing.c0_us,
        report.processing.c1_us_per_event,
    );
    out
}

fn trace_csv(report: &RunReport) -> String {
    let mut out = String::from("frame,count,mode,wake,stored,overflow\n");
    for row in &report.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.frame_index,
            row.count,
            match row.mode {
                SensorMode::Idle => "idle",
                SensorMode::Active => "active",
            },
            row.wake as u8,
            row.stored,
            row.overflow as u8
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("threshold,wake_fraction,event_driven_uW,recall\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.4},{:.4}",
            row.threshold, row.wake_fraction, row.event_driven_uw, row.recall
        );
    }
    out
}

/// Which frameworks' energy reports to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportSelection {
    #[default]
    All,
    EventOnly,
    PollingOnly,
    ActiveOnly,
}

/// Writes a run's reports into `out_dir` as CSV.
pub fn write_report_selected(
    report: &RunReport,
    out_dir: &Path,
    selection: ReportSelection,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    if matches!(selection, ReportSelection::All | ReportSelection::EventOnly) {
        write_file(
            out_dir,
            "energy_event_driven.csv",
            &report.comparison.event.to_csv(),
        )?;
    }
    if matches!(
        selection,
        ReportSelection::All | ReportSelection::PollingOnly
    ) {
        write_file(
            out_dir,
            "energy_periodic_polling.csv",
            &report.comparison.periodic.to_csv(),
        )?;
    }
    if matches!(
        selection,
        ReportSelection::All | ReportSelection::ActiveOnly
    ) {
        write_file(
            out_dir,
            "energy_fully_active.csv",
            &report.fully_active.to_csv(),
        )?;
    }
    if selection == ReportSelection::All {
        write_file(out_dir, "comparison.csv", &comparison_csv(report))?;
    }
    write_file(
        out_dir,
        "triggers_event.csv",
        &triggers_to_csv(&report.event_triggers),
    )?;
    write_file(
        out_dir,
        "triggers_baseline.csv",
        &triggers_to_csv(&report.baseline_triggers),
    )?;
    write_file(out_dir, "labels.csv", &labels_to_csv(&report.labels))?;
    write_file(out_dir, "metrics.csv", &metrics_csv(report))?;
    write_file(out_dir, "trace.csv", &trace_csv(report))?;
    Ok(())
}

/// Writes every report of a run into `out_dir` as CSV.
pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    write_report_selected(report, out_dir, ReportSelection::All)
}

/// Renders a synthetic scenario's frames and labels to disk
/// (`frames/NNNNNN.pgm` plus `labels.csv`).
pub fn generate_to_dir(cfg: &ScenarioConfig, out_dir: &Path) -> Result<()> {
    if matches!(cfg.source, FrameSource::Directory(_)) {
        return Err(Error::Config(crate::error::ConfigError::Invalid(
            "gen needs a synthetic source (profile or inline objects)".into(),
        )));
    }
    let (frames, labels) = materialize_frames(cfg)?;
    let frames_dir = out_dir.join("frames");
    fs::create_dir_all(&frames_dir).map_err(|e| Error::io(frames_dir.display().to_string(), e))?;
    for (index, frame) in frames.iter().enumerate() {
        pgm::write_pgm(&frames_dir.join(format!("{index:06}.pgm")), frame)?;
    }
    write_file(out_dir, "labels.csv", &labels_to_csv(&labels))
}
