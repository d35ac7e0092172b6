//! Error types shared across the simulator.

use thiserror::Error;

/// Violations of the sensor's native readout protocol.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("data token received after the 64th end-of-row pulse")]
    DataAfterLastRow,
    #[error("more than 64 end-of-row pulses in one frame ({0})")]
    TooManyRows(usize),
    #[error("stream ended after {0} end-of-row pulses (expected 64)")]
    TruncatedStream(usize),
}

/// Power-timeline integrity failures detected during integration.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimelineError {
    #[error("{component}: timeline gap or overlap at {at_ns}ns")]
    NotAPartition { component: &'static str, at_ns: u64 },
    #[error(
        "{component}: timeline does not cover the horizon (ends at {end_ns}ns of {horizon_ns}ns)"
    )]
    ShortCoverage {
        component: &'static str,
        end_ns: u64,
        horizon_ns: u64,
    },
    #[error("framework/trace mismatch: {0}")]
    FrameworkMismatch(String),
}

/// Failures of the processing-model fit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("target {target_uw:.3}uW is below the zero-processing floor {floor_uw:.3}uW")]
    InfeasibleTarget { target_uw: f64, floor_uw: f64 },
    #[error("could not reach target {target_uw:.3}uW (best fit {best_uw:.3}uW)")]
    Unattainable { target_uw: f64, best_uw: f64 },
}

/// Scenario-configuration problems (bad syntax, bad values, missing files).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{section}] {key}: {message}")]
    Value {
        section: String,
        key: String,
        message: String,
    },
    #[error("missing required key [{section}] {key}")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Invalid(String),
}

/// Synthetic-scene specification problems.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SceneError {
    #[error("object '{name}' leaves the 128x64 plane at frame {frame}")]
    OutOfBounds { name: String, frame: u64 },
    #[error("object '{name}': {message}")]
    BadObject { name: String, message: String },
}

/// Top-level error for the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("readout protocol violation: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("timeline integrity: {0}")]
    Timeline(#[from] TimelineError),
    #[error("calibration: {0}")]
    Calibration(#[from] CalibrationError),
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
