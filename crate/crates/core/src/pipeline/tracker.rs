//! Multi-object tracking: greedy association of detected blobs to live
//! tracks, Kalman smoothing, and track lifecycle (birth, coasting, death).

use super::kalman::{kalman_predict, kalman_update, KalmanState};
use super::{BBox, Blob, PipelineParams};

/// Initial velocity variance for freshly born tracks.
const BIRTH_VELOCITY_VAR: f64 = 25.0;

/// A tracked moving object.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    pub kf: KalmanState,
    pub bbox: BBox,
    /// Frames since birth.
    pub age: u32,
    /// Consecutive frames without a matching blob.
    pub missed: u32,
    pub birth_pos: (f64, f64),
    /// Largest distance from the birth position reached so far.
    pub max_displacement: f64,
    /// Filtered position at the last successful match.
    pub last_observed: (f64, f64),
    /// Whether a blob matched this track in the current frame.
    pub updated: bool,
}

impl Track {
    pub fn centroid(&self) -> (f64, f64) {
        self.kf.position()
    }
}

/// Outcome of greedy association.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    /// Pairs of (track index, blob index).
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_blobs: Vec<usize>,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dr = a.0 - b.0;
    let dc = a.1 - b.1;
    (dr * dr + dc * dc).sqrt()
}

fn size_difference(a: &BBox, b: &BBox) -> f64 {
    (a.width() - b.width())
        .abs()
        .max((a.height() - b.height()).abs())
}

/// Greedy nearest-centroid matching among pairs within the gate whose
/// bounding-box sizes differ by no more than the configured limit.
/// Candidates are ranked by (distance, track id, blob stream order), so
/// ties resolve deterministically.
pub fn associate(blobs: &[Blob], tracks: &[Track], params: &PipelineParams) -> Association {
    let mut candidates: Vec<(f64, u32, usize, usize)> = Vec::new();
    for (ti, track) in tracks.iter().enumerate() {
        for (bi, blob) in blobs.iter().enumerate() {
            let d = dist(track.centroid(), blob.centroid);
            if d <= params.gate
                && size_difference(&track.bbox, &blob.bbox) <= params.bbox_size_limit
            {
                candidates.push((d, track.id, ti, bi));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.3.cmp(&b.3)));

    let mut track_used = vec![false; tracks.len()];
    let mut blob_used = vec![false; blobs.len()];
    let mut matches = Vec::new();
    for (_, _, ti, bi) in candidates {
        if !track_used[ti] && !blob_used[bi] {
            track_used[ti] = true;
            blob_used[bi] = true;
            matches.push((ti, bi));
        }
    }
    Association {
        matches,
        unmatched_tracks: (0..tracks.len()).filter(|&i| !track_used[i]).collect(),
        unmatched_blobs: (0..blobs.len()).filter(|&i| !blob_used[i]).collect(),
    }
}

/// What happened to the track population in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Tracks removed this frame (exceeded the missed budget), in their
    /// final state.
    pub died: Vec<Track>,
    /// Ids of tracks born this frame.
    pub born: Vec<u32>,
    /// Number of matched (track, blob) pairs.
    pub matched: u32,
}

/// Stateful per-frame tracker.
#[derive(Debug)]
pub struct Tracker {
    pub params: PipelineParams,
    pub tracks: Vec<Track>,
    next_id: u32,
    /// Distance evaluations plus per-track bookkeeping in the last step.
    pub last_step_ops: u64,
}

impl Tracker {
    pub fn new(params: PipelineParams) -> Self {
        Tracker {
            params,
            tracks: Vec::new(),
            next_id: 0,
            last_step_ops: 0,
        }
    }

    /// Current track positions, used to seed the clustering stage.
    pub fn current_positions(&self) -> Vec<(f64, f64)> {
        self.tracks.iter().map(|t| t.centroid()).collect()
    }

    /// Advances every track by one frame, associates the given blobs,
    /// births new tracks from unmatched blobs and retires tracks that
    /// exceeded the missed budget.
    pub fn step(&mut self, blobs: &[Blob]) -> StepOutcome {
        let mut ops = 0u64;
        for track in &mut self.tracks {
            kalman_predict(&mut track.kf, 1.0, self.params.process_noise);
            track.updated = false;
            track.age += 1;
            ops += 1;
        }

        let assoc = associate(blobs, &self.tracks, &self.params);
        ops += (self.tracks.len() * blobs.len()) as u64;

        for &(ti, bi) in &assoc.matches {
            let track = &mut self.tracks[ti];
            let blob = &blobs[bi];
            kalman_update(
                &mut track.kf,
                blob.centroid.0,
                blob.centroid.1,
                self.params.measurement_noise,
            );
            track.bbox = blob.bbox;
            track.missed = 0;
            track.updated = true;
            track.last_observed = track.centroid();
            let moved = dist(track.centroid(), track.birth_pos);
            if moved > track.max_displacement {
                track.max_displacement = moved;
            }
        }

        let mut born = Vec::new();
        for &bi in &assoc.unmatched_blobs {
            let blob = &blobs[bi];
            let id = self.next_id;
            self.next_id += 1;
            self.tracks.push(Track {
                id,
                kf: KalmanState::at(
                    blob.centroid.0,
                    blob.centroid.1,
                    self.params.measurement_noise,
                    BIRTH_VELOCITY_VAR,
                ),
                bbox: blob.bbox,
                age: 1,
                missed: 0,
                birth_pos: blob.centroid,
                max_displacement: 0.0,
                last_observed: blob.centroid,
                updated: true,
            });
            born.push(id);
        }

        for &ti in &assoc.unmatched_tracks {
            self.tracks[ti].missed += 1;
        }
        let max_missed = self.params.max_missed;
        let mut died = Vec::new();
        self.tracks.retain(|t| {
            if t.missed > max_missed {
                died.push(t.clone());
                false
            } else {
                true
            }
        });

        self.last_step_ops = ops;
        StepOutcome {
            died,
            born,
            matched: assoc.matches.len() as u32,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_at(row: f64, col: f64, side: f64, count: u32) -> Blob {
        Blob {
            centroid: (row, col),
            bbox: BBox {
                min_row: row - side / 2.0,
                min_col: col - side / 2.0,
                max_row: row + side / 2.0,
                max_col: col + side / 2.0,
            },
            pixel_count: count,
        }
    }

    fn track_at(id: u32, row: f64, col: f64, side: f64) -> Track {
        Track {
            id,
            kf: KalmanState::at(row, col, 1.0, 1.0),
            bbox: blob_at(row, col, side, 10).bbox,
            age: 5,
            missed: 0,
            birth_pos: (row, col),
            max_displacement: 0.0,
            last_observed: (row, col),
            updated: false,
        }
    }

    #[test]
    fn blob_at_predicted_position_matches() {
        let tracks = vec![track_at(0, 20.0, 40.0, 6.0)];
        let blobs = vec![blob_at(20.5, 40.5, 6.0, 20)];
        let assoc = associate(&blobs, &tracks, &PipelineParams::default());
        assert_eq!(assoc.matches, vec![(0, 0)]);
    }

    #[test]
    fn blob_outside_gate_becomes_new_track() {
        let mut tracker = Tracker::new(PipelineParams::default());
        tracker.step(&[blob_at(10.0, 10.0, 5.0, 20)]);
        let outcome = tracker.step(&[blob_at(10.0, 60.0, 5.0, 20)]);
        assert_eq!(outcome.born.len(), 1);
        assert_eq!(tracker.tracks.len(), 2);
    }

    #[test]
    fn size_gate_blocks_mismatched_boxes() {
        let tracks = vec![track_at(0, 20.0, 40.0, 4.0)];
        let blobs = vec![blob_at(20.0, 40.0, 40.0, 200)];
        let assoc = associate(&blobs, &tracks, &PipelineParams::default());
        assert!(assoc.matches.is_empty());
    }

    #[test]
    fn equidistant_blobs_resolve_by_stream_order() {
        let tracks = vec![track_at(3, 20.0, 40.0, 6.0)];
        let blobs = vec![
            blob_at(20.0, 44.0, 6.0, 20), // same distance, earlier in stream
            blob_at(20.0, 36.0, 6.0, 20),
        ];
        let assoc = associate(&blobs, &tracks, &PipelineParams::default());
        assert_eq!(assoc.matches, vec![(0, 0)]);
        assert_eq!(assoc.unmatched_blobs, vec![1]);
    }

    #[test]
    fn track_dies_after_missed_budget() {
        let params = PipelineParams {
            max_missed: 2,
            ..PipelineParams::default()
        };
        let mut tracker = Tracker::new(params);
        tracker.step(&[blob_at(30.0, 30.0, 5.0, 25)]);
        assert_eq!(tracker.tracks.len(), 1);
        let mut died = Vec::new();
        for _ in 0..4 {
            died.extend(tracker.step(&[]).died);
        }
        assert_eq!(died.len(), 1);
        assert!(tracker.tracks.is_empty());
    }

    #[test]
    fn displacement_is_monotone_and_tracks_motion() {
        let mut tracker = Tracker::new(PipelineParams::default());
        for i in 0..10 {
            tracker.step(&[blob_at(30.0, 30.0 + i as f64 * 3.0, 5.0, 25)]);
        }
        let track = &tracker.tracks[0];
        assert!(track.max_displacement > 20.0);
        let towards_birth = tracker.step(&[blob_at(30.0, 30.0, 5.0, 25)]);
        assert!(towards_birth.died.is_empty());
        // Moving back towards birth must not reduce the peak displacement.
        assert!(tracker.tracks[0].max_displacement > 20.0);
    }

    #[test]
    fn empty_frame_cost_is_linear_in_tracks() {
        let mut tracker = Tracker::new(PipelineParams::default());
        let blobs: Vec<Blob> = (0..6)
            .map(|i| blob_at(10.0, 10.0 + i as f64 * 15.0, 5.0, 25))
            .collect();
        tracker.step(&blobs);
        assert_eq!(tracker.tracks.len(), 6);
        tracker.step(&[]);
        assert_eq!(tracker.last_step_ops, 6);
    }
}
