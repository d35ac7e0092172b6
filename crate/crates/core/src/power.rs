//! External power-manager state machine for the processing platform.
//!
//! On a wake-up event the manager powers the platform on (supply ramp and
//! FLL lock), lets it boot from the retained L2 image, and keeps it in Run
//! until the end-of-computation signal, then gates it back to deep sleep.
//! Every activation therefore pays a fixed start-up cost before the
//! payload-dependent transfer and processing phases.

use crate::energy::ProcessingModel;
use crate::interface::{spi_transfer_model, FrameRecord};
use crate::time::{Interval, Nanos};

/// Start-up delays of the processing platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingParams {
    /// Sensor readout time (ring-oscillator window).
    pub t_ro: Nanos,
    /// Power-on and FLL lock time.
    pub t_on: Nanos,
    /// Boot-up process time at 30 MHz.
    pub t_boot: Nanos,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            t_ro: Nanos::from_us(300),
            t_on: Nanos::from_us(590),
            t_boot: Nanos::from_us(61),
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.t_ro == Nanos::ZERO || self.t_on == Nanos::ZERO || self.t_boot == Nanos::ZERO {
            return Err("timing parameters must be strictly positive".into());
        }
        Ok(())
    }

    /// Fixed start-up cost paid by every activation.
    pub fn startup(&self) -> Nanos {
        self.t_on + self.t_boot
    }
}

/// Power-manager state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmState {
    IdleSleep,
    PoweringOn,
    Booting,
    Running,
}

impl PmState {
    pub fn label(self) -> &'static str {
        match self {
            PmState::IdleSleep => "idle_sleep",
            PmState::PoweringOn => "powering_on",
            PmState::Booting => "booting",
            PmState::Running => "running",
        }
    }
}

/// One processor activation with its phase durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivationRecord {
    pub frame_index: u64,
    /// Events transferred and processed (the stored count).
    pub n_events: u32,
    pub t_start: Nanos,
    pub t_on: Nanos,
    pub t_boot: Nanos,
    pub t_transfer: Nanos,
    pub t_process: Nanos,
    /// Set when the activation runs past the end of its frame period.
    pub overrun: bool,
}

impl ActivationRecord {
    pub fn total_active(&self) -> Nanos {
        self.t_on + self.t_boot + self.t_transfer + self.t_process
    }

    pub fn end(&self) -> Nanos {
        self.t_start + self.total_active()
    }

    /// Start of the SPI transfer window within this activation.
    pub fn transfer_start(&self) -> Nanos {
        self.t_start + self.t_on + self.t_boot
    }
}

/// A request for processor service, derived from a frame record by the
/// computational framework in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WakeRequest {
    pub frame_index: u64,
    /// Stored events available for transfer.
    pub n_events: u32,
    /// Whether the frame was read out in Active mode (the wake-up then
    /// follows the readout window instead of the frame start).
    pub after_readout: bool,
}

impl WakeRequest {
    pub fn from_frame(frame: &FrameRecord) -> Self {
        WakeRequest {
            frame_index: frame.frame_index,
            n_events: frame.stored(),
            after_readout: frame.mode == crate::sensor::SensorMode::Active,
        }
    }

    /// A polling request: raised every frame regardless of the wake line,
    /// transferring whatever the frame stored (possibly only the header).
    pub fn from_frame_forced(frame: &FrameRecord) -> Self {
        WakeRequest {
            frame_index: frame.frame_index,
            n_events: frame.stored(),
            after_readout: frame.mode == crate::sensor::SensorMode::Active,
        }
    }

    fn time(&self, timing: &TimingParams, frame_period: Nanos) -> Nanos {
        let base = frame_period * self.frame_index;
        if self.after_readout {
            base + timing.t_ro
        } else {
            base
        }
    }
}

fn build_activation(
    request: &WakeRequest,
    timing: &TimingParams,
    proc_model: &ProcessingModel,
    frame_period: Nanos,
) -> ActivationRecord {
    let t_start = request.time(timing, frame_period);
    let t_transfer = spi_transfer_model(request.n_events);
    let t_process = proc_model.t_process(request.n_events);
    let mut record = ActivationRecord {
        frame_index: request.frame_index,
        n_events: request.n_events,
        t_start,
        t_on: timing.t_on,
        t_boot: timing.t_boot,
        t_transfer,
        t_process,
        overrun: false,
    };
    record.overrun = record.end() > frame_period * (request.frame_index + 1);
    record
}

/// Handles one wake-up event. The frame must actually have raised the
/// wake line.
pub fn pm_handle_wakeup(
    frame: &FrameRecord,
    timing: &TimingParams,
    proc_model: &ProcessingModel,
    frame_period: Nanos,
) -> ActivationRecord {
    assert!(frame.wake, "pm_handle_wakeup requires a waking frame");
    build_activation(
        &WakeRequest::from_frame(frame),
        timing,
        proc_model,
        frame_period,
    )
}

/// Full power-manager trace over a simulated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PmTrace {
    pub horizon: Nanos,
    pub states: Vec<(PmState, Interval)>,
    pub activations: Vec<ActivationRecord>,
    /// Wake requests swallowed because the manager was not in IdleSleep.
    pub coalesced: u32,
}

impl PmTrace {
    pub fn overrun_count(&self) -> u32 {
        self.activations.iter().filter(|a| a.overrun).count() as u32
    }
}

/// Runs the manager over an arbitrary wake-request sequence.
///
/// Requests must be ordered by frame. A request arriving while the
/// manager is not in IdleSleep is coalesced into the ongoing activation
/// (level-sensitive wake line); its data is recovered on the next wake.
/// The trace partitions `[0, n_frames * frame_period)` exactly, with
/// phases past the horizon clipped.
pub fn pm_trace_requests(
    requests: &[WakeRequest],
    n_frames: u64,
    timing: &TimingParams,
    proc_model: &ProcessingModel,
    frame_period: Nanos,
) -> PmTrace {
    let horizon = frame_period * n_frames;
    let mut states: Vec<(PmState, Interval)> = Vec::new();
    let mut activations = Vec::new();
    let mut coalesced = 0u32;
    let mut cursor = Nanos::ZERO;

    let push = |states: &mut Vec<(PmState, Interval)>, state: PmState, iv: Interval| {
        let iv = iv.clip(horizon);
        if !iv.is_empty() {
            states.push((state, iv));
        }
    };

    for request in requests {
        let t_req = request.time(timing, frame_period);
        if t_req >= horizon {
            break;
        }
        if t_req < cursor {
            coalesced += 1;
            continue;
        }
        if t_req > cursor {
            push(
                &mut states,
                PmState::IdleSleep,
                Interval::new(cursor, t_req),
            );
        }
        let act = build_activation(request, timing, proc_model, frame_period);
        let on_end = act.t_start + act.t_on;
        let boot_end = on_end + act.t_boot;
        let run_end = boot_end + act.t_transfer + act.t_process;
        push(
            &mut states,
            PmState::PoweringOn,
            Interval::new(act.t_start, on_end),
        );
        push(
            &mut states,
            PmState::Booting,
            Interval::new(on_end, boot_end),
        );
        push(
            &mut states,
            PmState::Running,
            Interval::new(boot_end, run_end),
        );
        cursor = run_end.min(horizon);
        activations.push(act);
    }
    if cursor < horizon {
        push(
            &mut states,
            PmState::IdleSleep,
            Interval::new(cursor, horizon),
        );
    }
    PmTrace {
        horizon,
        states,
        activations,
        coalesced,
    }
}

/// Runs the manager over interface frame records, waking where the
/// interface raised the wake line (the event-driven policy).
pub fn pm_trace(
    frames: &[FrameRecord],
    timing: &TimingParams,
    proc_model: &ProcessingModel,
    frame_period: Nanos,
) -> PmTrace {
    let requests: Vec<WakeRequest> = frames
        .iter()
        .filter(|f| f.wake)
        .map(WakeRequest::from_frame)
        .collect();
    pm_trace_requests(
        &requests,
        frames.len() as u64,
        timing,
        proc_model,
        frame_period,
    )
}

/// Checks that a state sequence follows the legal cycle
/// IdleSleep -> PoweringOn -> Booting -> Running -> IdleSleep with no
/// skipped state, and that the intervals tile `[0, horizon)` exactly.
pub fn check_fsm_legality(trace: &PmTrace) -> Result<(), String> {
    let mut cursor = Nanos::ZERO;
    let mut prev: Option<PmState> = None;
    for (state, iv) in &trace.states {
        if iv.start != cursor {
            return Err(format!(
                "interval starts at {} but previous ended at {}",
                iv.start, cursor
            ));
        }
        if iv.end <= iv.start {
            return Err(format!("empty or inverted interval at {}", iv.start));
        }
        let legal = match (prev, state) {
            (None, PmState::IdleSleep) | (None, PmState::PoweringOn) => true,
            (Some(PmState::IdleSleep), PmState::PoweringOn) => true,
            (Some(PmState::PoweringOn), PmState::Booting) => true,
            (Some(PmState::Booting), PmState::Running) => true,
            (Some(PmState::Running), PmState::IdleSleep) => true,
            (Some(PmState::Running), PmState::PoweringOn) => true, // back-to-back wakes
            (Some(PmState::IdleSleep), PmState::IdleSleep) => false,
            _ => false,
        };
        if !legal {
            return Err(format!("illegal transition {prev:?} -> {state:?}"));
        }
        // A truncated tail may end mid-activation; otherwise Running must
        // eventually return to IdleSleep, which the transition rules above
        // plus full coverage already force.
        prev = Some(*state);
        cursor = iv.end;
    }
    if cursor != trace.horizon {
        return Err(format!(
            "trace ends at {} but horizon is {}",
            cursor, trace.horizon
        ));
    }
    Ok(())
}
