//! Address-event visual processing: seeded clustering detection, blob
//! filtering and merging, track association with Kalman smoothing, and
//! the application trigger rules.
//!
//! The detection stage operates directly on the sparse event stream, so
//! its cost scales with the number of asserted pixels rather than the
//! frame size. Tracking and triggering are shared with the frame-based
//! baseline detector: both feed the same `Tracker` and `TriggerEngine`.

pub mod kalman;
pub mod tracker;
pub mod trigger;

use crate::sensor::AddressEvent;

/// Axis-aligned bounding box in (row, col) coordinates, inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_row: f64,
    pub min_col: f64,
    pub max_row: f64,
    pub max_col: f64,
}

impl BBox {
    pub fn at_point(row: f64, col: f64) -> Self {
        BBox {
            min_row: row,
            min_col: col,
            max_row: row,
            max_col: col,
        }
    }

    pub fn include(&mut self, row: f64, col: f64) {
        self.min_row = self.min_row.min(row);
        self.min_col = self.min_col.min(col);
        self.max_row = self.max_row.max(row);
        self.max_col = self.max_col.max(col);
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min_row: self.min_row.min(other.min_row),
            min_col: self.min_col.min(other.min_col),
            max_row: self.max_row.max(other.max_row),
            max_col: self.max_col.max(other.max_col),
        }
    }

    pub fn width(&self) -> f64 {
        self.max_col - self.min_col + 1.0
    }

    pub fn height(&self) -> f64 {
        self.max_row - self.min_row + 1.0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, row: f64, col: f64) -> bool {
        row >= self.min_row && row <= self.max_row && col >= self.min_col && col <= self.max_col
    }
}

/// A detected moving object: center of mass, bounding box and the number
/// of events that formed it.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub centroid: (f64, f64),
    pub bbox: BBox,
    pub pixel_count: u32,
}

/// Tuning knobs of the detection and tracking stages.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    /// Clustering distance: an event joins a cluster whose running
    /// centroid lies within this radius.
    pub cluster_radius: f64,
    /// First filter: clusters below this event count are dropped.
    pub min_blob_pixels: u32,
    /// Blobs whose centroids are within this distance merge.
    pub merge_distance: f64,
    /// Second filter, applied after merging.
    pub min_blob_pixels_2: u32,
    /// Association gate on centroid distance.
    pub gate: f64,
    /// Association limit on bounding-box size difference (max of the
    /// width and height differences).
    pub bbox_size_limit: f64,
    /// Frames a track may go unmatched before it is dropped.
    pub max_missed: u32,
    /// Kalman white-acceleration process noise intensity.
    pub process_noise: f64,
    /// Kalman measurement variance.
    pub measurement_noise: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            cluster_radius: 6.0,
            min_blob_pixels: 40,
            merge_distance: 8.0,
            min_blob_pixels_2: 40,
            gate: 10.0,
            bbox_size_limit: 16.0,
            max_missed: 3,
            process_noise: 0.5,
            measurement_noise: 1.0,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<(), String> {
        let positives = [
            self.cluster_radius,
            self.merge_distance,
            self.gate,
            self.bbox_size_limit,
            self.process_noise,
            self.measurement_noise,
        ];
        if positives.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err("pipeline distances and noise levels must be positive".into());
        }
        if self.min_blob_pixels == 0 || self.min_blob_pixels_2 == 0 {
            return Err("blob filters must be at least 1".into());
        }
        Ok(())
    }
}

/// One growing cluster during the single-pass grouping.
#[derive(Debug, Clone)]
pub struct RawCluster {
    sum_row: f64,
    sum_col: f64,
    pub count: u32,
    bbox: Option<BBox>,
    seed: Option<(f64, f64)>,
}

impl RawCluster {
    fn from_seed(pos: (f64, f64)) -> Self {
        RawCluster {
            sum_row: 0.0,
            sum_col: 0.0,
            count: 0,
            bbox: None,
            seed: Some(pos),
        }
    }

    fn from_event(row: f64, col: f64) -> Self {
        RawCluster {
            sum_row: row,
            sum_col: col,
            count: 1,
            bbox: Some(BBox::at_point(row, col)),
            seed: None,
        }
    }

    /// Current centroid: the seed position until the first event joins.
    pub fn centroid(&self) -> (f64, f64) {
        if self.count == 0 {
            self.seed.expect("empty cluster without seed")
        } else {
            (
                self.sum_row / self.count as f64,
                self.sum_col / self.count as f64,
            )
        }
    }

    fn absorb(&mut self, row: f64, col: f64) {
        self.sum_row += row;
        self.sum_col += col;
        self.count += 1;
        match &mut self.bbox {
            Some(b) => b.include(row, col),
            None => self.bbox = Some(BBox::at_point(row, col)),
        }
    }

    fn merge(&mut self, other: &RawCluster) {
        self.sum_row += other.sum_row;
        self.sum_col += other.sum_col;
        self.count += other.count;
        self.bbox = match (self.bbox, other.bbox) {
            (Some(a), Some(b)) => Some(a.union(&b)),
            (a, b) => a.or(b),
        };
    }

    fn to_blob(&self) -> Blob {
        Blob {
            centroid: self.centroid(),
            bbox: self.bbox.expect("blob without events"),
            pixel_count: self.count,
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dr = a.0 - b.0;
    let dc = a.1 - b.1;
    (dr * dr + dc * dc).sqrt()
}

/// Single pass over the events in stream order: each event joins the
/// nearest cluster whose running centroid is within `radius` (ties to
/// the lowest cluster index), or opens a new cluster. Clusters start at
/// the given seed positions. Every event lands in exactly one cluster.
///
/// The returned operation count (distance evaluations) backs the
/// event-proportional cost property.
pub fn cluster_events(
    events: &[AddressEvent],
    seeds: &[(f64, f64)],
    radius: f64,
) -> (Vec<RawCluster>, u64) {
    let mut clusters: Vec<RawCluster> = seeds
        .iter()
        .map(|&pos| RawCluster::from_seed(pos))
        .collect();
    let mut ops = 0u64;
    for ev in events {
        let row = ev.row as f64;
        let col = ev.col as f64;
        let mut best: Option<(usize, f64)> = None;
        for (idx, cluster) in clusters.iter().enumerate() {
            ops += 1;
            let d = dist((row, col), cluster.centroid());
            if d <= radius && best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((idx, d));
            }
        }
        match best {
            Some((idx, _)) => clusters[idx].absorb(row, col),
            None => clusters.push(RawCluster::from_event(row, col)),
        }
    }
    (clusters, ops)
}

/// Merges blobs whose centroids are within `distance`, iterating to a
/// fixpoint. Merged blobs take the union of the boxes, the sum of the
/// counts and the count-weighted centroid.
fn merge_clusters(mut clusters: Vec<RawCluster>, distance: f64) -> Vec<RawCluster> {
    loop {
        let mut merged_any = false;
        'scan: for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                if dist(clusters[i].centroid(), clusters[j].centroid()) <= distance {
                    let other = clusters.remove(j);
                    clusters[i].merge(&other);
                    merged_any = true;
                    break 'scan;
                }
            }
        }
        if !merged_any {
            return clusters;
        }
    }
}

/// Full detection stage: seeded clustering, first count filter, merge to
/// fixpoint, second count filter.
pub fn detect_blobs(
    events: &[AddressEvent],
    seeds: &[(f64, f64)],
    params: &PipelineParams,
) -> Vec<Blob> {
    detect_blobs_counted(events, seeds, params).0
}

pub fn detect_blobs_counted(
    events: &[AddressEvent],
    seeds: &[(f64, f64)],
    params: &PipelineParams,
) -> (Vec<Blob>, u64) {
    let (clusters, ops) = cluster_events(events, seeds, params.cluster_radius);
    let populated: Vec<RawCluster> = clusters
        .into_iter()
        .filter(|c| c.count >= params.min_blob_pixels)
        .collect();
    let merged = merge_clusters(populated, params.merge_distance);
    let blobs = merged
        .iter()
        .filter(|c| c.count >= params.min_blob_pixels_2)
        .map(|c| c.to_blob())
        .collect();
    (blobs, ops)
}

/// End-to-end event pipeline: detection feeding the shared tracker and
/// trigger engine.
#[derive(Debug)]
pub struct EventPipeline {
    pub params: PipelineParams,
    pub tracker: tracker::Tracker,
    pub triggers: trigger::TriggerEngine,
    /// Work counter for the last step (distance evaluations plus per-track
    /// bookkeeping); used to check event-proportional cost.
    pub last_step_ops: u64,
}

impl EventPipeline {
    pub fn new(params: PipelineParams, rules: Vec<trigger::TriggerRule>) -> Self {
        EventPipeline {
            tracker: tracker::Tracker::new(params.clone()),
            triggers: trigger::TriggerEngine::new(rules),
            params,
            last_step_ops: 0,
        }
    }

    /// Processes one frame's event stream.
    pub fn step(
        &mut self,
        frame_index: u64,
        events: &[AddressEvent],
    ) -> Vec<trigger::TriggerEvent> {
        let seeds = self.tracker.current_positions();
        let (blobs, cluster_ops) = detect_blobs_counted(events, &seeds, &self.params);
        let fired = self.step_with_blobs(frame_index, &blobs);
        self.last_step_ops = cluster_ops + self.tracker.last_step_ops;
        fired
    }

    /// Processes one frame given externally detected blobs. The baseline
    /// detector enters here so that tracking and triggering are shared
    /// code paths.
    pub fn step_with_blobs(
        &mut self,
        frame_index: u64,
        blobs: &[Blob],
    ) -> Vec<trigger::TriggerEvent> {
        let outcome = self.tracker.step(blobs);
        self.last_step_ops = self.tracker.last_step_ops;
        self.triggers
            .evaluate(frame_index, &self.tracker.tracks, &outcome)
    }
}
