//! Scenario configuration: plain-text `key = value` files with
//! `[section]` headers. No quoting, `#` or `;` start a comment line.
//!
//! A scenario names its frame source (a built-in scene profile, a
//! directory of PGM frames, or inline `[object.*]` definitions), the
//! threshold and sensor settings, and optional overrides for the power
//! table, timing, processing model, pipeline and baseline parameters and
//! trigger rules. Profiles provide defaults for everything they package;
//! explicit keys win over profile defaults.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::baseline::BaselineParams;
use crate::energy::{ComponentPowerTable, ProcessingModel};
use crate::error::{ConfigError, Error, Result};
use crate::interface::InterfaceConfig;
use crate::pipeline::trigger::{CrossDirection, RectRegion, TriggerKind, TriggerRule};
use crate::pipeline::PipelineParams;
use crate::power::TimingParams;
use crate::scene::{self, SceneObject, SyntheticSceneSpec, Waypoint};
use crate::time::Nanos;

/// Where frames come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameSource {
    /// One of the built-in scene profiles.
    Profile(String),
    /// A directory of `*.pgm` frames.
    Directory(PathBuf),
    /// Objects defined inline in the config.
    Inline,
}

/// How the processing model is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessingSpec {
    Fixed(ProcessingModel),
    /// Calibrate against a periodic-polling power target, scaling the
    /// base model.
    Calibrate {
        target_uw: f64,
        base: ProcessingModel,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub n_frames: u64,
    pub frame_rate: f64,
    pub seed: u64,
    pub source: FrameSource,
    pub wake_threshold: u32,
    pub theta_c: f64,
    pub power: ComponentPowerTable,
    pub timing: TimingParams,
    pub processing: ProcessingSpec,
    pub pipeline: PipelineParams,
    pub baseline: BaselineParams,
    pub rules: Vec<TriggerRule>,
    pub scene_spec: SyntheticSceneSpec,
    /// External labels file (used with `frames_dir`).
    pub labels_path: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn interface(&self) -> InterfaceConfig {
        InterfaceConfig {
            wake_threshold: self.wake_threshold,
            frame_rate: self.frame_rate,
            t_readout: self.timing.t_ro,
        }
    }

    pub fn frame_period(&self) -> Nanos {
        self.interface().frame_period()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let base_dir = path.parent().unwrap_or(Path::new("."));
        Self::from_str_with_base(&text, base_dir)
    }

    pub fn from_str_with_base(text: &str, base_dir: &Path) -> Result<Self> {
        let ini = parse_ini(text)?;
        build_config(&ini, base_dir).map_err(Error::Config)
    }
}

#[derive(Debug, Clone)]
struct IniEntry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
struct Ini {
    /// (section name, entries), in file order.
    sections: Vec<(String, Vec<IniEntry>)>,
}

impl Ini {
    fn section(&self, name: &str) -> Option<&[IniEntry]> {
        self.sections
            .iter()
            .find(|(s, _)| s == name)
            .map(|(_, e)| e.as_slice())
    }

    fn sections_with_prefix<'a>(
        &'a self,
        prefix: &'a str,
    ) -> impl Iterator<Item = (&'a str, &'a [IniEntry])> {
        self.sections
            .iter()
            .filter(move |(s, _)| s.starts_with(prefix))
            .map(|(s, e)| (s.as_str(), e.as_slice()))
    }
}

fn parse_ini(text: &str) -> Result<Ini> {
    let mut ini = Ini::default();
    let mut current: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config(ConfigError::Syntax {
                    line: idx + 1,
                    message: "unterminated section header".into(),
                }));
            }
            let name = line[1..line.len() - 1].trim().to_string();
            if name.is_empty() {
                return Err(Error::Config(ConfigError::Syntax {
                    line: idx + 1,
                    message: "empty section name".into(),
                }));
            }
            ini.sections.push((name, Vec::new()));
            current = Some(ini.sections.len() - 1);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(ConfigError::Syntax {
                line: idx + 1,
                message: "expected 'key = value'".into(),
            }));
        };
        let Some(section) = current else {
            return Err(Error::Config(ConfigError::Syntax {
                line: idx + 1,
                message: "key before any [section]".into(),
            }));
        };
        ini.sections[section].1.push(IniEntry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: idx + 1,
        });
    }
    Ok(ini)
}

/// Typed reader over one section with unknown-key detection.
struct SectionReader<'a> {
    section: &'a str,
    entries: &'a [IniEntry],
    used: BTreeSet<&'a str>,
}

impl<'a> SectionReader<'a> {
    fn new(section: &'a str, entries: &'a [IniEntry]) -> Self {
        SectionReader {
            section,
            entries,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &'a str) -> Option<&'a str> {
        self.used.insert(key);
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    fn value_err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            section: self.section.to_string(),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(
        &mut self,
        key: &'a str,
    ) -> std::result::Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.value_err(key, format!("cannot parse '{v}'"))),
        }
    }

    fn require<T: std::str::FromStr>(
        &mut self,
        key: &'a str,
    ) -> std::result::Result<T, ConfigError> {
        self.parse(key)?.ok_or(ConfigError::Missing {
            section: self.section.to_string(),
            key: key.to_string(),
        })
    }

    fn finish(self) -> std::result::Result<(), ConfigError> {
        for entry in self.entries {
            if !self.used.contains(entry.key.as_str()) {
                return Err(ConfigError::Value {
                    section: self.section.to_string(),
                    key: entry.key.clone(),
                    message: format!("unknown key (line {})", entry.line),
                });
            }
        }
        Ok(())
    }
}

fn build_config(ini: &Ini, base_dir: &Path) -> std::result::Result<ScenarioConfig, ConfigError> {
    for (name, _) in &ini.sections {
        let known = name == "scenario"
            || name == "power"
            || name == "timing"
            || name == "processing"
            || name == "pipeline"
            || name == "baseline"
            || name == "scene"
            || name.starts_with("object.")
            || name.starts_with("rule.");
        if !known {
            return Err(ConfigError::Invalid(format!("unknown section [{name}]")));
        }
    }

    let scenario_entries = ini
        .section("scenario")
        .ok_or_else(|| ConfigError::Invalid("missing [scenario] section".into()))?;
    let mut s = SectionReader::new("scenario", scenario_entries);

    let n_frames: u64 = s.require("frames")?;
    if n_frames == 0 {
        return Err(s.value_err("frames", "must be at least 1"));
    }
    let frame_rate: f64 = s.parse("frame_rate")?.unwrap_or(10.0);
    if frame_rate.is_nan() || frame_rate <= 0.0 {
        return Err(s.value_err("frame_rate", "must be positive"));
    }
    let seed: u64 = s.parse("seed")?.unwrap_or(0);
    let profile_name: Option<String> = s.parse("profile")?;
    let frames_dir: Option<String> = s.parse("frames_dir")?;
    let labels: Option<String> = s.parse("labels")?;
    let explicit_threshold: Option<u32> = s.parse("wake_threshold")?;
    let explicit_theta: Option<f64> = s.parse("theta_c")?;
    let name: String = s
        .parse("name")?
        .or_else(|| profile_name.clone())
        .unwrap_or_else(|| "scenario".to_string());
    s.finish()?;

    // Profile defaults, if any.
    let profile = match &profile_name {
        Some(p) => Some(
            scene::profile(p, n_frames).ok_or_else(|| ConfigError::Value {
                section: "scenario".into(),
                key: "profile".into(),
                message: format!(
                    "unknown profile '{p}' (available: {})",
                    scene::PROFILE_NAMES.join(", ")
                ),
            })?,
        ),
        None => None,
    };

    let inline_objects = parse_objects(ini)?;
    let source = match (&profile_name, &frames_dir) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "choose one of profile / frames_dir, not both".into(),
            ))
        }
        (Some(p), None) => {
            if !inline_objects.is_empty() {
                return Err(ConfigError::Invalid(
                    "inline [object.*] sections cannot be combined with a profile".into(),
                ));
            }
            FrameSource::Profile(p.clone())
        }
        (None, Some(dir)) => FrameSource::Directory(base_dir.join(dir)),
        (None, None) => {
            if inline_objects.is_empty() {
                return Err(ConfigError::Invalid(
                    "scenario needs a profile, a frames_dir or [object.*] sections".into(),
                ));
            }
            FrameSource::Inline
        }
    };

    let wake_threshold =
        match explicit_threshold.or_else(|| profile.as_ref().map(|p| p.wake_threshold)) {
            Some(t) => t,
            None => {
                return Err(ConfigError::Missing {
                    section: "scenario".into(),
                    key: "wake_threshold".into(),
                })
            }
        };
    if wake_threshold as usize > crate::sensor::PIXELS {
        return Err(ConfigError::Value {
            section: "scenario".into(),
            key: "wake_threshold".into(),
            message: format!("exceeds the pixel total {}", crate::sensor::PIXELS),
        });
    }
    let theta_c = explicit_theta
        .or_else(|| profile.as_ref().map(|p| p.theta_c))
        .unwrap_or(0.15);
    if !(0.0..=1.0).contains(&theta_c) {
        return Err(ConfigError::Value {
            section: "scenario".into(),
            key: "theta_c".into(),
            message: "must be in [0, 1]".into(),
        });
    }

    let power = parse_power(ini, ComponentPowerTable::default())?;
    power.validate().map_err(ConfigError::Invalid)?;
    let timing = parse_timing(ini, TimingParams::default())?;
    timing.validate().map_err(ConfigError::Invalid)?;
    let processing = parse_processing(ini)?;
    let pipeline = parse_pipeline(
        ini,
        profile
            .as_ref()
            .map(|p| p.pipeline.clone())
            .unwrap_or_default(),
    )?;
    pipeline.validate().map_err(ConfigError::Invalid)?;
    let baseline = parse_baseline(
        ini,
        profile
            .as_ref()
            .map(|p| p.baseline.clone())
            .unwrap_or_default(),
    )?;

    let explicit_rules = parse_rules(ini)?;
    let rules = if explicit_rules.is_empty() {
        profile
            .as_ref()
            .map(|p| p.rules.clone())
            .unwrap_or_default()
    } else {
        explicit_rules
    };
    for rule in &rules {
        rule.validate()
            .map_err(|m| ConfigError::Invalid(format!("rule '{}': {m}", rule.id)))?;
    }

    let scene_spec = match &profile {
        Some(p) => p.spec.clone(),
        None => {
            let mut spec = parse_scene(ini)?;
            spec.objects = inline_objects;
            spec
        }
    };

    Ok(ScenarioConfig {
        name,
        n_frames,
        frame_rate,
        seed,
        source,
        wake_threshold,
        theta_c,
        power,
        timing,
        processing,
        pipeline,
        baseline,
        rules,
        scene_spec,
        labels_path: labels.map(|l| base_dir.join(l)),
    })
}

fn parse_power(
    ini: &Ini,
    mut table: ComponentPowerTable,
) -> std::result::Result<ComponentPowerTable, ConfigError> {
    let Some(entries) = ini.section("power") else {
        return Ok(table);
    };
    let mut s = SectionReader::new("power", entries);
    if let Some(v) = s.parse("sensor_idle")? {
        table.sensor_idle = v;
    }
    if let Some(v) = s.parse("sensor_active")? {
        table.sensor_active = v;
    }
    if let Some(v) = s.parse("fpga_base")? {
        table.fpga_base = v;
    }
    if let Some(v) = s.parse("fpga_ringosc_on")? {
        table.fpga_ringosc_on = v;
    }
    if let Some(v) = s.parse("fpga_spi_extra")? {
        table.fpga_spi_extra = v;
    }
    if let Some(v) = s.parse("soc_idle")? {
        table.soc_idle = v;
    }
    if let Some(v) = s.parse("soc_active")? {
        table.soc_active = v;
    }
    if let Some(v) = s.parse("cluster_active")? {
        table.cluster_active = v;
    }
    if let Some(v) = s.parse("cluster_gated")? {
        table.cluster_gated = v;
    }
    if let Some(v) = s.parse("fll_active")? {
        table.fll_active = v;
    }
    if let Some(v) = s.parse("fll_gated")? {
        table.fll_gated = v;
    }
    s.finish()?;
    Ok(table)
}

fn parse_timing(
    ini: &Ini,
    mut timing: TimingParams,
) -> std::result::Result<TimingParams, ConfigError> {
    let Some(entries) = ini.section("timing") else {
        return Ok(timing);
    };
    let mut s = SectionReader::new("timing", entries);
    if let Some(v) = s.parse::<f64>("t_ro_us")? {
        timing.t_ro = Nanos::from_us_f64(v);
    }
    if let Some(v) = s.parse::<f64>("t_on_us")? {
        timing.t_on = Nanos::from_us_f64(v);
    }
    if let Some(v) = s.parse::<f64>("t_boot_us")? {
        timing.t_boot = Nanos::from_us_f64(v);
    }
    s.finish()?;
    Ok(timing)
}

fn parse_processing(ini: &Ini) -> std::result::Result<ProcessingSpec, ConfigError> {
    let Some(entries) = ini.section("processing") else {
        return Ok(ProcessingSpec::Fixed(ProcessingModel::default()));
    };
    let mut s = SectionReader::new("processing", entries);
    let c0: Option<f64> = s.parse("c0_us")?;
    let c1: Option<f64> = s.parse("c1_us")?;
    let target: Option<f64> = s.parse("calibrate_target_uw")?;
    s.finish()?;
    let base = ProcessingModel {
        c0_us: c0.unwrap_or(ProcessingModel::default().c0_us),
        c1_us_per_event: c1.unwrap_or(ProcessingModel::default().c1_us_per_event),
    };
    if base.c0_us < 0.0 || base.c1_us_per_event < 0.0 {
        return Err(ConfigError::Invalid(
            "processing coefficients must be nonnegative".into(),
        ));
    }
    match target {
        Some(t) if t > 0.0 => Ok(ProcessingSpec::Calibrate { target_uw: t, base }),
        Some(_) => Err(ConfigError::Invalid(
            "calibrate_target_uw must be positive".into(),
        )),
        None => Ok(ProcessingSpec::Fixed(base)),
    }
}

fn parse_pipeline(
    ini: &Ini,
    mut params: PipelineParams,
) -> std::result::Result<PipelineParams, ConfigError> {
    let Some(entries) = ini.section("pipeline") else {
        return Ok(params);
    };
    let mut s = SectionReader::new("pipeline", entries);
    if let Some(v) = s.parse("cluster_radius")? {
        params.cluster_radius = v;
    }
    if let Some(v) = s.parse("min_blob_pixels")? {
        params.min_blob_pixels = v;
    }
    if let Some(v) = s.parse("merge_distance")? {
        params.merge_distance = v;
    }
    if let Some(v) = s.parse("min_blob_pixels_2")? {
        params.min_blob_pixels_2 = v;
    }
    if let Some(v) = s.parse("gate")? {
        params.gate = v;
    }
    if let Some(v) = s.parse("bbox_size_limit")? {
        params.bbox_size_limit = v;
    }
    if let Some(v) = s.parse("max_missed")? {
        params.max_missed = v;
    }
    if let Some(v) = s.parse("process_noise")? {
        params.process_noise = v;
    }
    if let Some(v) = s.parse("measurement_noise")? {
        params.measurement_noise = v;
    }
    s.finish()?;
    Ok(params)
}

fn parse_baseline(
    ini: &Ini,
    mut params: BaselineParams,
) -> std::result::Result<BaselineParams, ConfigError> {
    let Some(entries) = ini.section("baseline") else {
        return Ok(params);
    };
    let mut s = SectionReader::new("baseline", entries);
    if let Some(v) = s.parse("intensity_threshold")? {
        params.intensity_threshold = v;
    }
    if let Some(v) = s.parse("min_blob_pixels")? {
        params.min_blob_pixels = v;
    }
    match s.parse::<String>("reference")?.as_deref() {
        None => {}
        Some("previous") => params.reference = crate::baseline::ReferenceFrame::Previous,
        Some("first") => params.reference = crate::baseline::ReferenceFrame::First,
        Some(other) => {
            return Err(s.value_err("reference", format!("'{other}' is not previous/first")))
        }
    }
    s.finish()?;
    Ok(params)
}

fn parse_scene(ini: &Ini) -> std::result::Result<SyntheticSceneSpec, ConfigError> {
    let mut spec = SyntheticSceneSpec::default();
    let Some(entries) = ini.section("scene") else {
        return Ok(spec);
    };
    let mut s = SectionReader::new("scene", entries);
    if let Some(v) = s.parse("background")? {
        spec.background_level = v;
    }
    if let Some(v) = s.parse("texture")? {
        spec.texture_amplitude = v;
    }
    if let Some(v) = s.parse("noise")? {
        spec.noise_amplitude = v;
    }
    s.finish()?;
    Ok(spec)
}

fn parse_objects(ini: &Ini) -> std::result::Result<Vec<SceneObject>, ConfigError> {
    let mut objects = Vec::new();
    for (section, entries) in ini.sections_with_prefix("object.") {
        let name = section.trim_start_matches("object.").to_string();
        let mut s = SectionReader::new(section, entries);
        let size: String = s.require("size")?;
        let (w, h) = size
            .split_once('x')
            .and_then(|(w, h)| Some((w.trim().parse::<u32>().ok()?, h.trim().parse::<u32>().ok()?)))
            .ok_or_else(|| s.value_err("size", "expected WIDTHxHEIGHT, e.g. 22x12"))?;
        let intensity: u8 = s.require("intensity")?;
        let enter: u64 = s.require("enter")?;
        let exit: u64 = s.require("exit")?;
        let waypoints_raw: String = s.require("waypoints")?;
        let mut waypoints = Vec::new();
        for part in waypoints_raw.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let fields: Vec<&str> = part.split(':').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(s.value_err("waypoints", "expected frame:row:col; ..."));
            }
            let frame: u64 = fields[0]
                .parse()
                .map_err(|_| s.value_err("waypoints", format!("bad frame '{}'", fields[0])))?;
            let row: f64 = fields[1]
                .parse()
                .map_err(|_| s.value_err("waypoints", format!("bad row '{}'", fields[1])))?;
            let col: f64 = fields[2]
                .parse()
                .map_err(|_| s.value_err("waypoints", format!("bad col '{}'", fields[2])))?;
            waypoints.push(Waypoint { frame, row, col });
        }
        if waypoints.is_empty() {
            return Err(s.value_err("waypoints", "needs at least one waypoint"));
        }
        s.finish()?;
        objects.push(SceneObject {
            name,
            width: w,
            height: h,
            intensity,
            enter_frame: enter,
            exit_frame: exit,
            waypoints,
        });
    }
    Ok(objects)
}

fn parse_rules(ini: &Ini) -> std::result::Result<Vec<TriggerRule>, ConfigError> {
    let mut rules = Vec::new();
    for (section, entries) in ini.sections_with_prefix("rule.") {
        let id = section.trim_start_matches("rule.").to_string();
        let mut s = SectionReader::new(section, entries);
        let kind_name: String = s.require("type")?;
        let kind = match kind_name.as_str() {
            "loop_enter" => {
                let region_raw: String = s.require("region")?;
                let nums = parse_floats(&region_raw, 4).ok_or_else(|| {
                    s.value_err("region", "expected min_row,min_col,max_row,max_col")
                })?;
                let min_size: f64 = s.parse("min_size")?.unwrap_or(0.0);
                TriggerKind::LoopEnter {
                    region: RectRegion {
                        min_row: nums[0],
                        min_col: nums[1],
                        max_row: nums[2],
                        max_col: nums[3],
                    },
                    min_size,
                }
            }
            "line_cross" => {
                let from_raw: String = s.require("from")?;
                let to_raw: String = s.require("to")?;
                let from = parse_floats(&from_raw, 2)
                    .ok_or_else(|| s.value_err("from", "expected row,col"))?;
                let to = parse_floats(&to_raw, 2)
                    .ok_or_else(|| s.value_err("to", "expected row,col"))?;
                let direction = match s.parse::<String>("direction")?.as_deref() {
                    None | Some("both") => CrossDirection::Both,
                    Some("neg_to_pos") => CrossDirection::NegToPos,
                    Some("pos_to_neg") => CrossDirection::PosToNeg,
                    Some(other) => {
                        return Err(s.value_err(
                            "direction",
                            format!("'{other}' is not both/neg_to_pos/pos_to_neg"),
                        ))
                    }
                };
                TriggerKind::LineCross {
                    a: (from[0], from[1]),
                    b: (to[0], to[1]),
                    direction,
                }
            }
            "disappear" => {
                let border_margin: f64 = s.parse("border_margin")?.unwrap_or(5.0);
                let min_displacement: f64 = s.parse("min_displacement")?.unwrap_or(8.0);
                TriggerKind::Disappear {
                    border_margin,
                    min_displacement,
                }
            }
            other => {
                return Err(s.value_err(
                    "type",
                    format!("'{other}' is not loop_enter/line_cross/disappear"),
                ))
            }
        };
        s.finish()?;
        rules.push(TriggerRule { id, kind });
    }
    Ok(rules)
}

fn parse_floats(raw: &str, n: usize) -> Option<Vec<f64>> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().ok())
        .collect::<Option<Vec<f64>>>()?;
    (values.len() == n).then_some(values)
}
