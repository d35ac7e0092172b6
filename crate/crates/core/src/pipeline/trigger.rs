//! Application trigger rules over tracked objects.
//!
//! Three rule families cover the monitoring applications: entering a
//! virtual loop, crossing a virtual gate segment, and disappearing from
//! the tracking list away from the frame borders (a moving object that
//! stopped). Each rule fires at most once per qualifying transition of a
//! track, matching the single-bit alert semantics.

use std::collections::BTreeMap;

use super::tracker::{StepOutcome, Track};
use crate::sensor::{HEIGHT, WIDTH};

/// Rectangular region on the camera plane, inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectRegion {
    pub min_row: f64,
    pub min_col: f64,
    pub max_row: f64,
    pub max_col: f64,
}

impl RectRegion {
    pub fn contains(&self, row: f64, col: f64) -> bool {
        row >= self.min_row && row <= self.max_row && col >= self.min_col && col <= self.max_col
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.min_row > self.max_row || self.min_col > self.max_col {
            return Err("region has inverted bounds".into());
        }
        if self.min_row < 0.0
            || self.min_col < 0.0
            || self.max_row > (HEIGHT - 1) as f64
            || self.max_col > (WIDTH - 1) as f64
        {
            return Err(format!("region must lie within the {WIDTH}x{HEIGHT} plane"));
        }
        Ok(())
    }
}

/// Which side change of the gate segment raises the alert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossDirection {
    NegToPos,
    PosToNeg,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TriggerKind {
    /// Fires when a track's centroid moves from outside to inside the
    /// region and its bounding box covers at least `min_size` area.
    LoopEnter { region: RectRegion, min_size: f64 },
    /// Fires when a track's centroid crosses the segment `a`-`b` in the
    /// configured direction.
    LineCross {
        a: (f64, f64),
        b: (f64, f64),
        direction: CrossDirection,
    },
    /// Fires when a track dies farther than `border_margin` from every
    /// frame edge after having moved at least `min_displacement` from its
    /// birth position.
    Disappear {
        border_margin: f64,
        min_displacement: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerRule {
    pub id: String,
    pub kind: TriggerKind,
}

impl TriggerRule {
    pub fn validate(&self) -> Result<(), String> {
        match &self.kind {
            TriggerKind::LoopEnter { region, min_size } => {
                region.validate()?;
                if *min_size < 0.0 {
                    return Err("min_size must be nonnegative".into());
                }
            }
            TriggerKind::LineCross { a, b, .. } => {
                for (row, col) in [a, b] {
                    if *row < 0.0
                        || *col < 0.0
                        || *row > (HEIGHT - 1) as f64
                        || *col > (WIDTH - 1) as f64
                    {
                        return Err(format!(
                            "gate endpoints must lie within the {WIDTH}x{HEIGHT} plane"
                        ));
                    }
                }
                if a == b {
                    return Err("gate endpoints coincide".into());
                }
            }
            TriggerKind::Disappear {
                border_margin,
                min_displacement,
            } => {
                if *border_margin < 0.0 || *min_displacement < 0.0 {
                    return Err("disappear parameters must be nonnegative".into());
                }
            }
        }
        Ok(())
    }
}

/// One raised alert.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerEvent {
    pub frame_index: u64,
    pub rule_id: String,
    pub track_id: u32,
    pub row: f64,
    pub col: f64,
}

/// Per-(track, rule) memory for transition detection.
#[derive(Debug, Clone, PartialEq)]
enum RuleMemory {
    Inside(bool),
    Side { side: i8, pos: (f64, f64) },
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

/// Evaluates the rule set each frame and remembers per-track transition
/// state.
#[derive(Debug)]
pub struct TriggerEngine {
    rules: Vec<TriggerRule>,
    state: BTreeMap<(u32, usize), RuleMemory>,
}

impl TriggerEngine {
    pub fn new(rules: Vec<TriggerRule>) -> Self {
        TriggerEngine {
            rules,
            state: BTreeMap::new(),
        }
    }

    pub fn rules(&self) -> &[TriggerRule] {
        &self.rules
    }

    /// Runs every rule against the post-step track population. Loop and
    /// gate rules consider tracks that matched a detection this frame;
    /// the disappear rule considers tracks that died this frame.
    pub fn evaluate(
        &mut self,
        frame_index: u64,
        tracks: &[Track],
        outcome: &StepOutcome,
    ) -> Vec<TriggerEvent> {
        let mut fired = Vec::new();
        for (rule_idx, rule) in self.rules.iter().enumerate() {
            match &rule.kind {
                TriggerKind::LoopEnter { region, min_size } => {
                    for track in tracks.iter().filter(|t| t.updated) {
                        let (row, col) = track.centroid();
                        let inside = region.contains(row, col);
                        let key = (track.id, rule_idx);
                        match self.state.get(&key) {
                            None => {
                                // Birth inside the loop is not an entry.
                                self.state.insert(key, RuleMemory::Inside(inside));
                            }
                            Some(RuleMemory::Inside(was_inside)) => {
                                if !was_inside && inside && track.bbox.area() >= *min_size {
                                    fired.push(TriggerEvent {
                                        frame_index,
                                        rule_id: rule.id.clone(),
                                        track_id: track.id,
                                        row,
                                        col,
                                    });
                                }
                                self.state.insert(key, RuleMemory::Inside(inside));
                            }
                            Some(_) => unreachable!("loop rule uses Inside memory"),
                        }
                    }
                }
                TriggerKind::LineCross { a, b, direction } => {
                    for track in tracks.iter().filter(|t| t.updated) {
                        let pos = track.centroid();
                        let side = orient(*a, *b, pos);
                        let key = (track.id, rule_idx);
                        if let Some(RuleMemory::Side {
                            side: prev_side,
                            pos: prev_pos,
                        }) = self.state.get(&key).cloned()
                        {
                            let changed = prev_side != 0 && side != 0 && prev_side != side;
                            // The motion segment must actually cross the
                            // gate's extent, not just its infinite line.
                            let within_extent =
                                orient(prev_pos, pos, *a) != orient(prev_pos, pos, *b);
                            let direction_ok = match direction {
                                CrossDirection::Both => true,
                                CrossDirection::NegToPos => prev_side < 0 && side > 0,
                                CrossDirection::PosToNeg => prev_side > 0 && side < 0,
                            };
                            if changed && within_extent && direction_ok {
                                fired.push(TriggerEvent {
                                    frame_index,
                                    rule_id: rule.id.clone(),
                                    track_id: track.id,
                                    row: pos.0,
                                    col: pos.1,
                                });
                            }
                        }
                        // A position exactly on the line keeps the previous
                        // side so a slow crossing still counts once.
                        let remembered_side = if side != 0 {
                            side
                        } else {
                            match self.state.get(&key) {
                                Some(RuleMemory::Side { side: s, .. }) => *s,
                                _ => 0,
                            }
                        };
                        self.state.insert(
                            key,
                            RuleMemory::Side {
                                side: remembered_side,
                                pos,
                            },
                        );
                    }
                }
                TriggerKind::Disappear {
                    border_margin,
                    min_displacement,
                } => {
                    for track in &outcome.died {
                        let (row, col) = track.last_observed;
                        let edge_distance = row
                            .min((HEIGHT - 1) as f64 - row)
                            .min(col)
                            .min((WIDTH - 1) as f64 - col);
                        if edge_distance > *border_margin
                            && track.max_displacement >= *min_displacement
                        {
                            fired.push(TriggerEvent {
                                frame_index,
                                rule_id: rule.id.clone(),
                                track_id: track.id,
                                row,
                                col,
                            });
                        }
                    }
                }
            }
        }
        // Drop memory of retired tracks.
        for track in &outcome.died {
            let id = track.id;
            self.state.retain(|(track_id, _), _| *track_id != id);
        }
        fired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::kalman::KalmanState;
    use crate::pipeline::BBox;

    fn track_at(id: u32, row: f64, col: f64) -> Track {
        Track {
            id,
            kf: KalmanState::at(row, col, 1.0, 1.0),
            bbox: BBox {
                min_row: row - 3.0,
                min_col: col - 3.0,
                max_row: row + 3.0,
                max_col: col + 3.0,
            },
            age: 5,
            missed: 0,
            birth_pos: (row, col),
            max_displacement: 0.0,
            last_observed: (row, col),
            updated: true,
        }
    }

    fn no_outcome() -> StepOutcome {
        StepOutcome {
            died: vec![],
            born: vec![],
            matched: 0,
        }
    }

    fn loop_rule() -> TriggerRule {
        TriggerRule {
            id: "loop".into(),
            kind: TriggerKind::LoopEnter {
                region: RectRegion {
                    min_row: 20.0,
                    min_col: 60.0,
                    max_row: 40.0,
                    max_col: 90.0,
                },
                min_size: 9.0,
            },
        }
    }

    #[test]
    fn loop_entry_fires_exactly_once() {
        let mut engine = TriggerEngine::new(vec![loop_rule()]);
        let outcome = no_outcome();
        let mut total = 0;
        // Approach from outside, enter, stay inside for many frames.
        for (frame, col) in [(0u64, 40.0), (1, 50.0), (2, 70.0), (3, 72.0), (4, 74.0)] {
            let tracks = vec![track_at(1, 30.0, col)];
            total += engine.evaluate(frame, &tracks, &outcome).len();
        }
        assert_eq!(total, 1);
    }

    #[test]
    fn birth_inside_loop_is_not_an_entry() {
        let mut engine = TriggerEngine::new(vec![loop_rule()]);
        let outcome = no_outcome();
        for frame in 0..5 {
            let tracks = vec![track_at(1, 30.0, 70.0)];
            assert!(engine.evaluate(frame, &tracks, &outcome).is_empty());
        }
    }

    #[test]
    fn reentry_fires_again() {
        let mut engine = TriggerEngine::new(vec![loop_rule()]);
        let outcome = no_outcome();
        let path = [40.0, 70.0, 40.0, 70.0];
        let mut total = 0;
        for (frame, col) in path.iter().enumerate() {
            let tracks = vec![track_at(1, 30.0, *col)];
            total += engine.evaluate(frame as u64, &tracks, &outcome).len();
        }
        assert_eq!(total, 2);
    }

    #[test]
    fn line_cross_respects_direction_and_extent() {
        let gate = TriggerRule {
            id: "gate".into(),
            kind: TriggerKind::LineCross {
                a: (10.0, 64.0),
                b: (50.0, 64.0),
                direction: CrossDirection::Both,
            },
        };
        let mut engine = TriggerEngine::new(vec![gate.clone()]);
        let outcome = no_outcome();
        // Crossing within the gate extent fires.
        engine.evaluate(0, &[track_at(1, 30.0, 60.0)], &outcome);
        let fired = engine.evaluate(1, &[track_at(1, 30.0, 68.0)], &outcome);
        assert_eq!(fired.len(), 1);

        // Crossing the infinite line beyond the segment does not.
        let mut engine = TriggerEngine::new(vec![gate]);
        engine.evaluate(0, &[track_at(1, 60.0, 60.0)], &outcome);
        let fired = engine.evaluate(1, &[track_at(1, 60.0, 68.0)], &outcome);
        assert!(fired.is_empty());
    }

    #[test]
    fn directional_gate_ignores_reverse_crossings() {
        let gate = TriggerRule {
            id: "gate".into(),
            kind: TriggerKind::LineCross {
                a: (10.0, 64.0),
                b: (50.0, 64.0),
                direction: CrossDirection::NegToPos,
            },
        };
        let mut engine = TriggerEngine::new(vec![gate]);
        let outcome = no_outcome();
        // orient() for this downward vertical gate grows with the column,
        // so col 60 -> 68 is the neg-to-pos direction.
        engine.evaluate(0, &[track_at(1, 30.0, 60.0)], &outcome);
        let forward = engine.evaluate(1, &[track_at(1, 30.0, 68.0)], &outcome);
        assert_eq!(forward.len(), 1);
        let back = engine.evaluate(2, &[track_at(1, 30.0, 60.0)], &outcome);
        assert!(back.is_empty());
    }

    fn disappear_rule() -> TriggerRule {
        TriggerRule {
            id: "stop".into(),
            kind: TriggerKind::Disappear {
                border_margin: 5.0,
                min_displacement: 8.0,
            },
        }
    }

    fn died_track(row: f64, col: f64, max_displacement: f64) -> StepOutcome {
        let mut t = track_at(9, row, col);
        t.max_displacement = max_displacement;
        StepOutcome {
            died: vec![t],
            born: vec![],
            matched: 0,
        }
    }

    #[test]
    fn interior_death_with_displacement_fires() {
        let mut engine = TriggerEngine::new(vec![disappear_rule()]);
        let fired = engine.evaluate(10, &[], &died_track(30.0, 60.0, 20.0));
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].rule_id, "stop");
    }

    #[test]
    fn border_death_is_suppressed() {
        let mut engine = TriggerEngine::new(vec![disappear_rule()]);
        let fired = engine.evaluate(10, &[], &died_track(30.0, 2.0, 20.0));
        assert!(fired.is_empty());
    }

    #[test]
    fn jitter_death_is_suppressed() {
        let mut engine = TriggerEngine::new(vec![disappear_rule()]);
        let fired = engine.evaluate(10, &[], &died_track(30.0, 60.0, 3.0));
        assert!(fired.is_empty());
    }

    #[test]
    fn rule_validation_rejects_out_of_plane_regions() {
        let rule = TriggerRule {
            id: "bad".into(),
            kind: TriggerKind::LoopEnter {
                region: RectRegion {
                    min_row: 0.0,
                    min_col: 0.0,
                    max_row: 80.0,
                    max_col: 200.0,
                },
                min_size: 1.0,
            },
        };
        assert!(rule.validate().is_err());
    }
}
