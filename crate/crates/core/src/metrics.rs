//! Trigger evaluation against ground truth: greedy windowed matching and
//! precision/recall.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::trigger::TriggerEvent;

/// Default matching window: 15 frames (1.5 s at 10 fps) on each side.
pub const DEFAULT_WINDOW: u64 = 15;

/// One annotated event of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthLabel {
    pub frame_index: u64,
    pub rule_id: String,
    /// Half-width of the matching window in frames.
    pub window: u64,
}

impl GroundTruthLabel {
    pub fn new(frame_index: u64, rule_id: impl Into<String>) -> Self {
        GroundTruthLabel {
            frame_index,
            rule_id: rule_id.into(),
            window: DEFAULT_WINDOW,
        }
    }
}

/// Detection counts and the derived quality metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCounts {
    pub true_detections: u32,
    pub false_positives: u32,
    pub false_negatives: u32,
    pub precision: f64,
    pub recall: f64,
}

impl MetricCounts {
    fn from_counts(td: u32, fp: u32, missed: u32) -> Self {
        let precision = if td + fp > 0 {
            td as f64 / (td + fp) as f64
        } else {
            1.0
        };
        let recall = if td + missed > 0 {
            td as f64 / (td + missed) as f64
        } else {
            1.0
        };
        MetricCounts {
            true_detections: td,
            false_positives: fp,
            false_negatives: missed,
            precision,
            recall,
        }
    }
}

/// Greedy one-to-one matching of labels to triggers of the same rule.
///
/// Labels are handled in frame order; each takes the nearest unmatched
/// trigger within its window (ties to the earlier trigger). Matched
/// pairs count as true detections, leftover triggers as false positives,
/// leftover labels as false negatives.
pub fn match_triggers(triggers: &[TriggerEvent], labels: &[GroundTruthLabel]) -> MetricCounts {
    let mut labels_sorted: Vec<&GroundTruthLabel> = labels.iter().collect();
    labels_sorted.sort_by_key(|l| (l.frame_index, l.rule_id.clone()));
    let mut trigger_used = vec![false; triggers.len()];
    let mut td = 0u32;
    for label in labels_sorted {
        let mut best: Option<(u64, u64, usize)> = None; // (|delta|, frame, index)
        for (idx, trig) in triggers.iter().enumerate() {
            if trigger_used[idx] || trig.rule_id != label.rule_id {
                continue;
            }
            let delta = trig.frame_index.abs_diff(label.frame_index);
            if delta > label.window {
                continue;
            }
            let key = (delta, trig.frame_index, idx);
            if best.map(|b| key < b).unwrap_or(true) {
                best = Some(key);
            }
        }
        if let Some((_, _, idx)) = best {
            trigger_used[idx] = true;
            td += 1;
        }
    }
    let fp = trigger_used.iter().filter(|u| !**u).count() as u32;
    let missed = labels.len() as u32 - td;
    MetricCounts::from_counts(td, fp, missed)
}

/// Reads labels from CSV lines of `frame_index,rule_id`. A header line
/// starting with `frame` is skipped; blank lines and `#` comments are
/// ignored.
pub fn read_labels_csv(path: &Path) -> Result<Vec<GroundTruthLabel>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("frame") {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let frame: u64 = parts
            .next()
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| Error::Format {
                path: path.display().to_string(),
                message: format!("line {}: bad frame index", lineno + 1),
            })?;
        let rule = parts.next().map(str::trim).unwrap_or_default();
        if rule.is_empty() {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!("line {}: missing rule id", lineno + 1),
            });
        }
        labels.push(GroundTruthLabel::new(frame, rule));
    }
    Ok(labels)
}

pub fn labels_to_csv(labels: &[GroundTruthLabel]) -> String {
    let mut out = String::from("frame_index,rule_id\n");
    for label in labels {
        out.push_str(&format!("{},{}\n", label.frame_index, label.rule_id));
    }
    out
}

pub fn triggers_to_csv(triggers: &[TriggerEvent]) -> String {
    let mut out = String::from("frame_index,rule_id,track_id,row,col\n");
    for t in triggers {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2}\n",
            t.frame_index, t.rule_id, t.track_id, t.row, t.col
        ));
    }
    out
}
