//! Synthetic scene generation with scripted moving objects.
//!
//! Scenes stand in for the recorded monitoring footage: a static textured
//! background, optional per-frame sensor noise, and rectangular objects
//! following piecewise-linear waypoint trajectories. Because trajectories
//! are scripted, ground-truth labels (loop entries, gate crossings, stop
//! events) derive geometrically from the same data the renderer uses.
//!
//! All randomness comes from a ChaCha8 generator seeded with the scenario
//! seed: the texture is drawn first, then per-frame noise in frame order,
//! so a (spec, seed) pair fully determines every pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline::{BaselineParams, ReferenceFrame};
use crate::error::SceneError;
use crate::metrics::GroundTruthLabel;
use crate::pipeline::trigger::{CrossDirection, RectRegion, TriggerKind, TriggerRule};
use crate::pipeline::PipelineParams;
use crate::sensor::{GrayFrame, HEIGHT, WIDTH};

/// Side length of the texture blocks. Block-constant texture keeps the
/// static contrast map sparse away from block borders, which keeps noise
/// flicker from swamping the diff counts.
const TEXTURE_BLOCK: usize = 8;

/// Stationary runs at least this long count as a stop event.
const STOP_RUN_FRAMES: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub frame: u64,
    pub row: f64,
    pub col: f64,
}

/// A rectangular scripted object. The waypoints give the center position;
/// between waypoints the center interpolates linearly, before the first
/// and after the last it holds still.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub intensity: u8,
    /// Visible span: frames in `[enter_frame, exit_frame)`.
    pub enter_frame: u64,
    pub exit_frame: u64,
    pub waypoints: Vec<Waypoint>,
}

impl SceneObject {
    pub fn center(&self, frame: u64) -> (f64, f64) {
        match self.waypoints.len() {
            0 => (0.0, 0.0),
            1 => (self.waypoints[0].row, self.waypoints[0].col),
            _ => {
                let first = &self.waypoints[0];
                let last = &self.waypoints[self.waypoints.len() - 1];
                if frame <= first.frame {
                    return (first.row, first.col);
                }
                if frame >= last.frame {
                    return (last.row, last.col);
                }
                for pair in self.waypoints.windows(2) {
                    let (a, b) = (&pair[0], &pair[1]);
                    if frame >= a.frame && frame <= b.frame {
                        if a.frame == b.frame {
                            return (b.row, b.col);
                        }
                        let t = (frame - a.frame) as f64 / (b.frame - a.frame) as f64;
                        return (a.row + t * (b.row - a.row), a.col + t * (b.col - a.col));
                    }
                }
                (last.row, last.col)
            }
        }
    }

    pub fn visible(&self, frame: u64) -> bool {
        frame >= self.enter_frame && frame < self.exit_frame
    }

    /// Integer top-left corner at a frame, rounding the center.
    fn rect(&self, frame: u64) -> (i64, i64) {
        let (row, col) = self.center(frame);
        let top = (row - (self.height as f64 - 1.0) / 2.0).round() as i64;
        let left = (col - (self.width as f64 - 1.0) / 2.0).round() as i64;
        (top, left)
    }

    fn validate(&self, n_frames: u64) -> Result<(), SceneError> {
        if self.width == 0 || self.height == 0 {
            return Err(SceneError::BadObject {
                name: self.name.clone(),
                message: "zero-sized object".into(),
            });
        }
        if self.waypoints.is_empty() {
            return Err(SceneError::BadObject {
                name: self.name.clone(),
                message: "object needs at least one waypoint".into(),
            });
        }
        let last = self.exit_frame.min(n_frames);
        for frame in self.enter_frame..last {
            let (top, left) = self.rect(frame);
            if top < 0
                || left < 0
                || top + self.height as i64 > HEIGHT as i64
                || left + self.width as i64 > WIDTH as i64
            {
                return Err(SceneError::OutOfBounds {
                    name: self.name.clone(),
                    frame,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSceneSpec {
    pub background_level: u8,
    /// Amplitude of the static block texture (uniform in [-a, a]).
    pub texture_amplitude: u8,
    /// Amplitude of per-frame pixel noise (uniform in [-a, a]).
    pub noise_amplitude: u8,
    pub objects: Vec<SceneObject>,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        SyntheticSceneSpec {
            background_level: 110,
            texture_amplitude: 30,
            noise_amplitude: 2,
            objects: Vec::new(),
        }
    }
}

fn clamp_u8(v: i32) -> u8 {
    v.clamp(0, 255) as u8
}

/// Renders the scene. Deterministic in (spec, n_frames, seed).
pub fn generate_scene(
    spec: &SyntheticSceneSpec,
    n_frames: u64,
    seed: u64,
) -> Result<Vec<GrayFrame>, SceneError> {
    for object in &spec.objects {
        object.validate(n_frames)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Static block texture, drawn once.
    let blocks_across = WIDTH.div_ceil(TEXTURE_BLOCK);
    let blocks_down = HEIGHT.div_ceil(TEXTURE_BLOCK);
    let amp = spec.texture_amplitude as i32;
    let block_offsets: Vec<i32> = (0..blocks_across * blocks_down)
        .map(|_| {
            if amp > 0 {
                rng.gen_range(-amp..=amp)
            } else {
                0
            }
        })
        .collect();
    let mut background = vec![0u8; WIDTH * HEIGHT];
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let block = (row / TEXTURE_BLOCK) * blocks_across + col / TEXTURE_BLOCK;
            background[row * WIDTH + col] =
                clamp_u8(spec.background_level as i32 + block_offsets[block]);
        }
    }

    let noise_amp = spec.noise_amplitude as i32;
    let mut frames = Vec::with_capacity(n_frames as usize);
    for frame_idx in 0..n_frames {
        let mut pixels = background.clone();
        if noise_amp > 0 {
            for px in pixels.iter_mut() {
                *px = clamp_u8(*px as i32 + rng.gen_range(-noise_amp..=noise_amp));
            }
        }
        for object in spec.objects.iter().filter(|o| o.visible(frame_idx)) {
            let (top, left) = object.rect(frame_idx);
            for r in 0..object.height as i64 {
                for c in 0..object.width as i64 {
                    let row = (top + r) as usize;
                    let col = (left + c) as usize;
                    pixels[row * WIDTH + col] = object.intensity;
                }
            }
        }
        frames.push(GrayFrame::new(pixels).expect("sized buffer"));
    }
    Ok(frames)
}

/// Derives ground-truth labels from the scripted trajectories for each
/// rule in the set.
pub fn derive_labels(
    spec: &SyntheticSceneSpec,
    rules: &[TriggerRule],
    n_frames: u64,
) -> Vec<GroundTruthLabel> {
    let mut labels = Vec::new();
    for rule in rules {
        match &rule.kind {
            TriggerKind::LoopEnter { region, .. } => {
                for object in &spec.objects {
                    let last = object.exit_frame.min(n_frames);
                    for frame in (object.enter_frame + 1)..last {
                        let (pr, pc) = object.center(frame - 1);
                        let (cr, cc) = object.center(frame);
                        if !region.contains(pr, pc) && region.contains(cr, cc) {
                            labels.push(GroundTruthLabel::new(frame, rule.id.clone()));
                        }
                    }
                }
            }
            TriggerKind::LineCross { a, b, direction } => {
                for object in &spec.objects {
                    let last = object.exit_frame.min(n_frames);
                    for frame in (object.enter_frame + 1)..last {
                        let prev = object.center(frame - 1);
                        let cur = object.center(frame);
                        let side_prev = orient(*a, *b, prev);
                        let side_cur = orient(*a, *b, cur);
                        let changed = side_prev != 0 && side_cur != 0 && side_prev != side_cur;
                        let within = orient(prev, cur, *a) != orient(prev, cur, *b);
                        let direction_ok = match direction {
                            CrossDirection::Both => true,
                            CrossDirection::NegToPos => side_prev < 0 && side_cur > 0,
                            CrossDirection::PosToNeg => side_prev > 0 && side_cur < 0,
                        };
                        if changed && within && direction_ok {
                            labels.push(GroundTruthLabel::new(frame, rule.id.clone()));
                        }
                    }
                }
            }
            TriggerKind::Disappear {
                border_margin,
                min_displacement,
            } => {
                for object in &spec.objects {
                    labels.extend(stop_labels(
                        object,
                        rule,
                        n_frames,
                        *border_margin,
                        *min_displacement,
                    ));
                }
            }
        }
    }
    labels.sort_by_key(|l| (l.frame_index, l.rule_id.clone()));
    labels
}

fn orient(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> i8 {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    if cross > 0.0 {
        1
    } else if cross < 0.0 {
        -1
    } else {
        0
    }
}

fn interior(pos: (f64, f64), margin: f64) -> bool {
    let edge = pos
        .0
        .min((HEIGHT - 1) as f64 - pos.0)
        .min(pos.1)
        .min((WIDTH - 1) as f64 - pos.1);
    edge > margin
}

/// Stop events of one object: a transition from motion to a stationary
/// run of at least `STOP_RUN_FRAMES` rendered positions, away from the
/// borders and after enough accumulated displacement. A mid-plane vanish
/// right after motion counts as a stop as well.
fn stop_labels(
    object: &SceneObject,
    rule: &TriggerRule,
    n_frames: u64,
    border_margin: f64,
    min_displacement: f64,
) -> Vec<GroundTruthLabel> {
    let last = object.exit_frame.min(n_frames);
    if last <= object.enter_frame + 1 {
        return Vec::new();
    }
    let rects: Vec<(i64, i64)> = (object.enter_frame..last).map(|f| object.rect(f)).collect();
    let birth = object.center(object.enter_frame);
    let mut max_disp = 0.0f64;
    let mut labels = Vec::new();
    let mut moved_before = false;
    let mut idx = 1usize;
    while idx < rects.len() {
        let frame = object.enter_frame + idx as u64;
        let pos = object.center(frame);
        let d = ((pos.0 - birth.0).powi(2) + (pos.1 - birth.1).powi(2)).sqrt();
        max_disp = max_disp.max(d);
        if rects[idx] != rects[idx - 1] {
            moved_before = true;
            idx += 1;
            continue;
        }
        // Start of a stationary run; measure its length.
        let run_start = idx;
        while idx < rects.len() && rects[idx] == rects[run_start - 1] {
            idx += 1;
        }
        let run_len = (idx - run_start) as u64;
        let runs_to_vanish = idx == rects.len() && object.exit_frame < n_frames;
        if moved_before
            && (run_len >= STOP_RUN_FRAMES || runs_to_vanish)
            && interior(pos, border_margin)
            && max_disp >= min_displacement
        {
            labels.push(GroundTruthLabel::new(
                object.enter_frame + run_start as u64,
                rule.id.clone(),
            ));
            moved_before = false;
        }
    }
    // Vanish while still moving (no stationary tail at all).
    if moved_before && object.exit_frame < n_frames && rects.len() >= 2 {
        let final_pos = object.center(last - 1);
        if rects[rects.len() - 1] != rects[rects.len() - 2]
            && interior(final_pos, border_margin)
            && max_disp >= min_displacement
        {
            labels.push(GroundTruthLabel::new(last, rule.id.clone()));
        }
    }
    labels
}

/// A packaged scenario: scene, rules and matched parameters.
#[derive(Debug, Clone)]
pub struct SceneProfile {
    pub name: String,
    pub spec: SyntheticSceneSpec,
    pub rules: Vec<TriggerRule>,
    pub wake_threshold: u32,
    pub theta_c: f64,
    pub pipeline: PipelineParams,
    pub baseline: BaselineParams,
}

fn loop_rule(id: &str, region: RectRegion, min_size: f64) -> TriggerRule {
    TriggerRule {
        id: id.into(),
        kind: TriggerKind::LoopEnter { region, min_size },
    }
}

fn disappear_rule(id: &str) -> TriggerRule {
    TriggerRule {
        id: id.into(),
        kind: TriggerKind::Disappear {
            border_margin: 5.0,
            min_displacement: 8.0,
        },
    }
}

/// Cars entering a parking gate from the left: sparse activity, strong
/// contrast, threshold 100.
fn parking(n_frames: u64) -> SceneProfile {
    // One car crossing takes `travel` frames; cars are spaced so that the
    // moving fraction lands near 16%.
    let travel = 30u64;
    let spacing = 188u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 30 + k * spacing;
        if start + travel + 5 >= n_frames {
            break;
        }
        let lane_row = if k.is_multiple_of(2) { 34.0 } else { 28.0 };
        objects.push(SceneObject {
            name: format!("car{k}"),
            width: 34,
            height: 20,
            intensity: if k % 3 == 2 { 20 } else { 225 },
            enter_frame: start,
            exit_frame: start + travel + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row: lane_row,
                    col: 17.0,
                },
                Waypoint {
                    frame: start + travel,
                    row: lane_row,
                    col: 110.0,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "parking".into(),
        spec: SyntheticSceneSpec {
            background_level: 110,
            texture_amplitude: 26,
            noise_amplitude: 2,
            objects,
        },
        rules: vec![loop_rule(
            "entrance",
            RectRegion {
                min_row: 18.0,
                min_col: 34.0,
                max_row: 50.0,
                max_col: 70.0,
            },
            80.0,
        )],
        wake_threshold: 100,
        theta_c: 0.15,
        pipeline: PipelineParams {
            cluster_radius: 9.0,
            min_blob_pixels: 20,
            merge_distance: 40.0,
            min_blob_pixels_2: 70,
            gate: 14.0,
            bbox_size_limit: 34.0,
            ..PipelineParams::default()
        },
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 60,
            reference: ReferenceFrame::First,
        },
    }
}

/// Vehicles at a crossroad: dense activity, threshold 40.
fn street(n_frames: u64) -> SceneProfile {
    let travel = 46u64;
    let spacing = 76u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 20 + k * spacing;
        if start + travel + 5 >= n_frames {
            break;
        }
        let rightward = k.is_multiple_of(2);
        let lane_row = if rightward { 24.0 } else { 40.0 };
        let (col_from, col_to) = if rightward {
            (14.0, 113.0)
        } else {
            (113.0, 14.0)
        };
        objects.push(SceneObject {
            name: format!("vehicle{k}"),
            width: 26,
            height: 14,
            intensity: if k.is_multiple_of(3) { 30 } else { 220 },
            enter_frame: start,
            exit_frame: start + travel + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row: lane_row,
                    col: col_from,
                },
                Waypoint {
                    frame: start + travel,
                    row: lane_row,
                    col: col_to,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "street".into(),
        spec: SyntheticSceneSpec {
            background_level: 120,
            texture_amplitude: 20,
            noise_amplitude: 1,
            objects,
        },
        rules: vec![
            loop_rule(
                "loop_east",
                RectRegion {
                    min_row: 14.0,
                    min_col: 78.0,
                    max_row: 34.0,
                    max_col: 112.0,
                },
                80.0,
            ),
            loop_rule(
                "loop_west",
                RectRegion {
                    min_row: 30.0,
                    min_col: 16.0,
                    max_row: 50.0,
                    max_col: 50.0,
                },
                80.0,
            ),
        ],
        wake_threshold: 40,
        theta_c: 0.15,
        pipeline: PipelineParams {
            cluster_radius: 10.0,
            min_blob_pixels: 15,
            merge_distance: 32.0,
            min_blob_pixels_2: 40,
            gate: 14.0,
            bbox_size_limit: 30.0,
            ..PipelineParams::default()
        },
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 60,
            reference: ReferenceFrame::First,
        },
    }
}

/// People crossing an indoor area and stopping by a landmark:
/// threshold 80 (set above the blob filter value 40).
fn people(n_frames: u64) -> SceneProfile {
    // Alternating stoppers and walkers; the moving fraction targets 65.4%.
    let walk_in = 25u64;
    let stop_hold = 30u64;
    let walk_out = 25u64;
    let gap = 12u64;
    let mut objects = Vec::new();
    let mut t = 15u64;
    let mut k = 0u64;
    loop {
        let stopper = k.is_multiple_of(2);
        let total = if stopper {
            walk_in + stop_hold + walk_out
        } else {
            walk_in + walk_out
        };
        if t + total + 5 >= n_frames {
            break;
        }
        let row = 26.0 + 12.0 * ((k % 3) as f64 - 1.0);
        let mid_col = 58.0 + 8.0 * ((k % 4) as f64);
        let mut waypoints = vec![
            Waypoint {
                frame: t,
                row,
                col: 6.0,
            },
            Waypoint {
                frame: t + walk_in,
                row,
                col: mid_col,
            },
        ];
        if stopper {
            waypoints.push(Waypoint {
                frame: t + walk_in + stop_hold,
                row,
                col: mid_col,
            });
        }
        let resume = if stopper {
            t + walk_in + stop_hold
        } else {
            t + walk_in
        };
        waypoints.push(Waypoint {
            frame: resume + walk_out,
            row,
            col: 123.0,
        });
        objects.push(SceneObject {
            name: format!("person{k}"),
            width: 9,
            height: 16,
            intensity: 25,
            enter_frame: t,
            exit_frame: resume + walk_out + 1,
            waypoints,
        });
        t += total + gap;
        k += 1;
    }
    SceneProfile {
        name: "people".into(),
        spec: SyntheticSceneSpec {
            background_level: 150,
            texture_amplitude: 26,
            noise_amplitude: 2,
            objects,
        },
        rules: vec![TriggerRule {
            id: "stop".into(),
            kind: TriggerKind::Disappear {
                border_margin: 8.0,
                min_displacement: 12.0,
            },
        }],
        wake_threshold: 80,
        theta_c: 0.15,
        pipeline: PipelineParams {
            cluster_radius: 10.0,
            min_blob_pixels: 20,
            merge_distance: 16.0,
            min_blob_pixels_2: 40,
            gate: 12.0,
            bbox_size_limit: 20.0,
            max_missed: 5,
            ..PipelineParams::default()
        },
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 40,
            ..BaselineParams::default()
        },
    }
}

/// Clean single-object loop-entry validation scene.
fn triggers_loop(n_frames: u64) -> SceneProfile {
    let travel = 50u64;
    let spacing = 70u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 10 + k * spacing;
        if start + travel + 5 >= n_frames {
            break;
        }
        let row = 22.0 + 10.0 * ((k % 3) as f64);
        objects.push(SceneObject {
            name: format!("walker{k}"),
            width: 10,
            height: 14,
            intensity: 230,
            enter_frame: start,
            exit_frame: start + travel + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row,
                    col: 8.0,
                },
                Waypoint {
                    frame: start + travel,
                    row,
                    col: 119.0,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "triggers_loop".into(),
        spec: SyntheticSceneSpec {
            background_level: 90,
            texture_amplitude: 0,
            noise_amplitude: 0,
            objects,
        },
        rules: vec![loop_rule(
            "loop",
            RectRegion {
                min_row: 10.0,
                min_col: 58.0,
                max_row: 52.0,
                max_col: 96.0,
            },
            40.0,
        )],
        wake_threshold: 20,
        theta_c: 0.15,
        pipeline: trigger_scene_pipeline(),
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 20,
            reference: ReferenceFrame::First,
        },
    }
}

/// Gate-crossing validation scene with alternating directions.
fn triggers_line(n_frames: u64) -> SceneProfile {
    let travel = 48u64;
    let spacing = 68u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 10 + k * spacing;
        if start + travel + 5 >= n_frames {
            break;
        }
        let rightward = k.is_multiple_of(2);
        let row = 20.0 + 8.0 * ((k % 4) as f64);
        let (from, to) = if rightward {
            (8.0, 119.0)
        } else {
            (119.0, 8.0)
        };
        objects.push(SceneObject {
            name: format!("crosser{k}"),
            width: 10,
            height: 14,
            intensity: 230,
            enter_frame: start,
            exit_frame: start + travel + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row,
                    col: from,
                },
                Waypoint {
                    frame: start + travel,
                    row,
                    col: to,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "triggers_line".into(),
        spec: SyntheticSceneSpec {
            background_level: 90,
            texture_amplitude: 0,
            noise_amplitude: 0,
            objects,
        },
        rules: vec![TriggerRule {
            id: "gate".into(),
            kind: TriggerKind::LineCross {
                a: (4.0, 64.0),
                b: (59.0, 64.0),
                direction: CrossDirection::Both,
            },
        }],
        wake_threshold: 20,
        theta_c: 0.15,
        pipeline: trigger_scene_pipeline(),
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 20,
            reference: ReferenceFrame::First,
        },
    }
}

/// Walk-stop-resume validation scene for the disappear rule.
fn triggers_disappear(n_frames: u64) -> SceneProfile {
    let walk_in = 30u64;
    let hold = 25u64;
    let walk_out = 30u64;
    let spacing = 100u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 10 + k * spacing;
        if start + walk_in + hold + walk_out + 5 >= n_frames {
            break;
        }
        let row = 24.0 + 8.0 * ((k % 3) as f64);
        let stop_col = 50.0 + 10.0 * ((k % 4) as f64);
        objects.push(SceneObject {
            name: format!("stopper{k}"),
            width: 10,
            height: 14,
            intensity: 230,
            enter_frame: start,
            exit_frame: start + walk_in + hold + walk_out + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row,
                    col: 8.0,
                },
                Waypoint {
                    frame: start + walk_in,
                    row,
                    col: stop_col,
                },
                Waypoint {
                    frame: start + walk_in + hold,
                    row,
                    col: stop_col,
                },
                Waypoint {
                    frame: start + walk_in + hold + walk_out,
                    row,
                    col: 119.0,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "triggers_disappear".into(),
        spec: SyntheticSceneSpec {
            background_level: 90,
            texture_amplitude: 0,
            noise_amplitude: 0,
            objects,
        },
        rules: vec![disappear_rule("stop")],
        wake_threshold: 20,
        theta_c: 0.15,
        pipeline: trigger_scene_pipeline(),
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 20,
            reference: ReferenceFrame::First,
        },
    }
}

/// Negative scene: every track leaves flush across a border, so the
/// disappear rule must stay silent.
fn triggers_border(n_frames: u64) -> SceneProfile {
    let travel = 48u64;
    let spacing = 66u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 10 + k * spacing;
        if start + travel + 5 >= n_frames {
            break;
        }
        let rightward = k.is_multiple_of(2);
        let row = 22.0 + 9.0 * ((k % 3) as f64);
        // Narrow walkers reach the outermost center column, so the track's
        // last observation sits within the border margin when it dies.
        let (from, to) = if rightward {
            (4.0, 124.0)
        } else {
            (124.0, 4.0)
        };
        objects.push(SceneObject {
            name: format!("leaver{k}"),
            width: 7,
            height: 12,
            intensity: 230,
            enter_frame: start,
            exit_frame: start + travel + 1,
            waypoints: vec![
                Waypoint {
                    frame: start,
                    row,
                    col: from,
                },
                Waypoint {
                    frame: start + travel,
                    row,
                    col: to,
                },
            ],
        });
        k += 1;
    }
    SceneProfile {
        name: "triggers_border".into(),
        spec: SyntheticSceneSpec {
            background_level: 90,
            texture_amplitude: 0,
            noise_amplitude: 0,
            objects,
        },
        rules: vec![disappear_rule("stop")],
        wake_threshold: 20,
        theta_c: 0.15,
        pipeline: trigger_scene_pipeline(),
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 20,
            reference: ReferenceFrame::First,
        },
    }
}

/// Negative scene: objects jitter in place briefly and freeze; the
/// disappear rule must stay silent (displacement too small).
fn triggers_jitter(n_frames: u64) -> SceneProfile {
    let active = 14u64;
    let frozen = 26u64;
    let spacing = 60u64;
    let mut objects = Vec::new();
    let mut k = 0u64;
    loop {
        let start = 10 + k * spacing;
        if start + active + frozen + 5 >= n_frames {
            break;
        }
        let row = 25.0 + 7.0 * ((k % 3) as f64);
        let col = 40.0 + 12.0 * ((k % 5) as f64);
        // Rock back and forth by one pixel, then freeze in place.
        let mut waypoints = Vec::new();
        for j in 0..=active {
            waypoints.push(Waypoint {
                frame: start + j,
                row,
                col: col + if j.is_multiple_of(2) { 0.0 } else { 1.5 },
            });
        }
        waypoints.push(Waypoint {
            frame: start + active + frozen,
            row,
            col,
        });
        objects.push(SceneObject {
            name: format!("idler{k}"),
            width: 10,
            height: 14,
            intensity: 230,
            enter_frame: start,
            exit_frame: start + active + frozen + 1,
            waypoints,
        });
        k += 1;
    }
    SceneProfile {
        name: "triggers_jitter".into(),
        spec: SyntheticSceneSpec {
            background_level: 90,
            texture_amplitude: 0,
            noise_amplitude: 0,
            objects,
        },
        rules: vec![disappear_rule("stop")],
        wake_threshold: 20,
        theta_c: 0.15,
        pipeline: trigger_scene_pipeline(),
        baseline: BaselineParams {
            intensity_threshold: 30,
            min_blob_pixels: 20,
            reference: ReferenceFrame::First,
        },
    }
}

fn trigger_scene_pipeline() -> PipelineParams {
    PipelineParams {
        cluster_radius: 9.0,
        min_blob_pixels: 14,
        merge_distance: 11.0,
        min_blob_pixels_2: 14,
        gate: 13.0,
        bbox_size_limit: 18.0,
        max_missed: 3,
        process_noise: 0.5,
        measurement_noise: 1.0,
    }
}

/// Builds one of the named scene profiles.
pub fn profile(name: &str, n_frames: u64) -> Option<SceneProfile> {
    match name {
        "parking" => Some(parking(n_frames)),
        "street" => Some(street(n_frames)),
        "people" => Some(people(n_frames)),
        "triggers_loop" => Some(triggers_loop(n_frames)),
        "triggers_line" => Some(triggers_line(n_frames)),
        "triggers_disappear" => Some(triggers_disappear(n_frames)),
        "triggers_border" => Some(triggers_border(n_frames)),
        "triggers_jitter" => Some(triggers_jitter(n_frames)),
        _ => None,
    }
}

pub const PROFILE_NAMES: [&str; 8] = [
    "parking",
    "street",
    "people",
    "triggers_loop",
    "triggers_line",
    "triggers_disappear",
    "triggers_border",
    "triggers_jitter",
];
