//! TOML scenario files. Every section is optional except `[environment]`;
//! omitted values fall back to the calibrated reference setup. Unknown keys
//! are rejected with their dotted path.

use std::path::{Path, PathBuf};

use irland_core::dynamics::DEFAULT_DT;
use irland_core::guidance::{ControllerKind, PdLayout, DEFAULT_ARRAY_RADIUS};
use irland_core::lightfield::{
    Emitter, Environment, LightSource, Surface, Vec3, DEFAULT_PATCH_EDGE,
};
use irland_core::scenario::{
    calibrated_motor_response, calibrated_noise, calibrated_params, calibrated_response,
    grid_environment, reference_environment, synthetic_field, RangeSensors, RangeVariant,
    ScenarioConfig, StartGrid, SyntheticField,
};
use irland_core::sensing::{default_filter_window, InterferenceModel, DEFAULT_INTERFERENCE_PERIOD};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_csv::load_field_grid;
use crate::io::read_to_string;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub run: RunSection,
    /// Overrides for the downward PDs' response.
    pub sensor: Option<toml::Table>,
    /// Overrides for the motorized PD's response.
    pub motor_sensor: Option<toml::Table>,
    pub noise: Option<toml::Table>,
    pub params: Option<toml::Table>,
    /// Presence enables interference; keys override the reference model.
    pub interference: Option<toml::Table>,
    pub sweep: Option<SweepSection>,
    pub range: Option<RangeSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    /// One of the built-in layouts `env1`..`env5`.
    pub reference: Option<String>,
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub walls: Vec<WallSpec>,
    #[serde(default)]
    pub surfaces: Vec<SurfaceSpec>,
    #[serde(default)]
    pub ambient_dc: f64,
    pub patch_edge: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Bulb {
        #[serde(default)]
        position: [f64; 3],
        #[serde(default = "up")]
        axis: [f64; 3],
        #[serde(default = "one")]
        power: f64,
        #[serde(default = "one")]
        lambert_exponent: f64,
    },
    /// Measured field CSV; relative paths resolve against the config file.
    Grid {
        path: PathBuf,
        #[serde(default)]
        anchor: [f64; 3],
    },
    Synthetic {
        field: SyntheticField,
        #[serde(default = "synthetic_spacing")]
        spacing: f64,
    },
}

/// Vertical panel over the floor segment `from`–`to`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    pub from: [f64; 2],
    pub to: [f64; 2],
    #[serde(default = "wall_z")]
    pub z: [f64; 2],
    #[serde(default = "wall_reflectance")]
    pub reflectance: f64,
    #[serde(default = "yes")]
    pub opaque: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub corners: [[f64; 3]; 4],
    pub reflectance: f64,
    #[serde(default = "yes")]
    pub opaque: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControllerChoice {
    #[default]
    Hybrid,
    Arpd,
    Spd,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default)]
    pub kind: ControllerChoice,
    /// ArPD only; default 3.
    pub pd_count: Option<usize>,
    #[serde(default = "array_radius")]
    pub array_radius: f64,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            kind: ControllerChoice::Hybrid,
            pd_count: None,
            array_radius: DEFAULT_ARRAY_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub start: Option<[f64; 3]>,
    #[serde(default)]
    pub start_yaw: f64,
    #[serde(default = "dt")]
    pub dt: f64,
    #[serde(default = "max_time")]
    pub max_time: f64,
    pub filter_window: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            start: None,
            start_yaw: 0.0,
            dt: DEFAULT_DT,
            max_time: max_time(),
            filter_window: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
    /// `sweep` exits 0 only when the success rate reaches this.
    #[serde(default)]
    pub success_floor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    #[serde(default = "all_variants")]
    pub variants: Vec<RangeVariant>,
    #[serde(default = "one")]
    pub height: f64,
    #[serde(default = "r_limit")]
    pub r_limit: f64,
}

impl Default for RangeSection {
    fn default() -> Self {
        Self {
            variants: all_variants(),
            height: 1.0,
            r_limit: r_limit(),
        }
    }
}

fn up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn synthetic_spacing() -> f64 {
    0.05
}
fn wall_z() -> [f64; 2] {
    [0.0, 2.0]
}
fn wall_reflectance() -> f64 {
    0.8
}
fn array_radius() -> f64 {
    DEFAULT_ARRAY_RADIUS
}
fn dt() -> f64 {
    DEFAULT_DT
}
fn max_time() -> f64 {
    60.0
}
fn r_limit() -> f64 {
    25.0
}
fn all_variants() -> Vec<RangeVariant> {
    vec![
        RangeVariant::DownwardArray,
        RangeVariant::SideFacing,
        RangeVariant::Hybrid,
    ]
}

/// A config file resolved into runnable pieces.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: ScenarioConfig,
    /// False when neither `run.start` nor a reference start was available;
    /// `scenario.start` is then a placeholder above the station.
    pub start_given: bool,
    pub sweep: Option<(StartGrid, f64)>,
    pub range: RangeSection,
    pub sensors: RangeSensors,
}

pub fn load_config(path: &Path) -> Result<Resolved> {
    let text = read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(&parse_config(&text)?, base)
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<document>", e.message()))?;
    deserialize_at(toml::Value::Table(table), "")
}

fn deserialize_at<T: DeserializeOwned>(value: toml::Value, section: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (section.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => section.to_string(),
            (false, _) => format!("{section}.{inner}"),
        };
        Error::config(path, e.into_inner())
    })
}

/// `base` with the keys of `patch` replaced.
fn overlay<T: Serialize + DeserializeOwned + Clone>(
    base: &T,
    patch: Option<&toml::Table>,
    section: &str,
) -> Result<T> {
    let Some(patch) = patch else {
        return Ok(base.clone());
    };
    let mut table = toml::Table::try_from(base).map_err(|e| Error::config(section, e))?;
    for (k, v) in patch {
        table.insert(k.clone(), v.clone());
    }
    deserialize_at(toml::Value::Table(table), section)
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn environment(sec: &EnvironmentSection, base: &Path) -> Result<(Environment, Option<Vec3>)> {
    let edge = sec.patch_edge.unwrap_or(DEFAULT_PATCH_EDGE);
    if let Some(name) = &sec.reference {
        if sec.source.is_some() || !sec.walls.is_empty() || !sec.surfaces.is_empty() {
            return Err(Error::config(
                "environment.reference",
                "cannot be combined with source, walls or surfaces",
            ));
        }
        let re = reference_environment(name).ok_or_else(|| {
            Error::config(
                "environment.reference",
                format!("unknown reference environment `{name}`"),
            )
        })?;
        let env = &re.environment;
        let patch_edge = sec.patch_edge.unwrap_or(env.patch_edge());
        let env = Environment::with_patch_edge(
            env.source().clone(),
            env.surfaces().to_vec(),
            sec.ambient_dc,
            patch_edge,
        )
        .map_err(|e| Error::config("environment", e))?;
        return Ok((env, Some(re.start)));
    }
    let emitter = match &sec.source {
        None => Emitter::Bulb(irland_core::scenario::calibrated_source()),
        Some(SourceSpec::Bulb {
            position,
            axis,
            power,
            lambert_exponent,
        }) => Emitter::Bulb(
            LightSource::new(v3(*position), v3(*axis), *power, *lambert_exponent)
                .map_err(|e| Error::config("environment.source", e))?,
        ),
        Some(SourceSpec::Grid { path, anchor }) => {
            let grid = load_field_grid(&base.join(path))?;
            Emitter::Grid {
                grid,
                anchor: v3(*anchor),
            }
        }
        Some(SourceSpec::Synthetic { field, spacing }) => {
            if !(*spacing >= 0.01 && *spacing <= 0.5) {
                return Err(Error::config(
                    "environment.source.spacing",
                    "must lie in [0.01, 0.5] m",
                ));
            }
            grid_environment(synthetic_field(*field, *spacing))
                .source()
                .clone()
        }
    };
    let mut surfaces = Vec::new();
    for (i, w) in sec.walls.iter().enumerate() {
        let mut s = Surface::wall(
            w.from[0],
            w.from[1],
            w.to[0],
            w.to[1],
            w.z[0],
            w.z[1],
            w.reflectance,
        )
        .map_err(|e| Error::config(format!("environment.walls[{i}]"), e))?;
        s.opaque = w.opaque;
        surfaces.push(s);
    }
    for (i, s) in sec.surfaces.iter().enumerate() {
        let corners = s.corners.map(v3);
        surfaces.push(
            Surface::new(corners, s.reflectance, s.opaque)
                .map_err(|e| Error::config(format!("environment.surfaces[{i}]"), e))?,
        );
    }
    let env = Environment::with_patch_edge(emitter, surfaces, sec.ambient_dc, edge)
        .map_err(|e| Error::config("environment", e))?;
    Ok((env, None))
}

pub fn resolve(cfg: &ConfigFile, base: &Path) -> Result<Resolved> {
    let (env, reference_start) = environment(&cfg.environment, base)?;
    let response = overlay(&calibrated_response(), cfg.sensor.as_ref(), "sensor")?;
    let motor = overlay(
        &calibrated_motor_response(),
        cfg.motor_sensor.as_ref(),
        "motor_sensor",
    )?;
    let c = &cfg.controller;
    if c.pd_count.is_some() && c.kind != ControllerChoice::Arpd {
        return Err(Error::config(
            "controller.pd_count",
            "only applies to kind = \"arpd\"",
        ));
    }
    let (kind, layout) = match c.kind {
        ControllerChoice::Hybrid => (
            ControllerKind::Hybrid,
            PdLayout::hybrid(c.array_radius, motor, response),
        ),
        ControllerChoice::Arpd => (
            ControllerKind::ArPd,
            PdLayout::arpd(c.pd_count.unwrap_or(3), c.array_radius, response),
        ),
        ControllerChoice::Spd => (ControllerKind::Spd, PdLayout::spd(c.array_radius, response)),
    };
    let start = match (cfg.run.start, reference_start) {
        (Some(s), _) => v3(s),
        (None, Some(s)) => s,
        (None, None) => Vec3::new(0.0, 0.0, 1.0),
    };
    let start_given = cfg.run.start.is_some() || reference_start.is_some();
    let mut sc = ScenarioConfig::new(env, kind, start).with_layout(layout);
    sc.params = overlay(
        &calibrated_params(&sc.layout),
        cfg.params.as_ref(),
        "params",
    )?;
    sc.noise = overlay(&calibrated_noise(), cfg.noise.as_ref(), "noise")?;
    sc.interference = match &cfg.interference {
        Some(t) => Some(overlay(
            &InterferenceModel::reference(),
            Some(t),
            "interference",
        )?),
        None => None,
    };
    sc.start_yaw = cfg.run.start_yaw;
    sc.dt = cfg.run.dt;
    sc.max_time = cfg.run.max_time;
    sc.seed = cfg.seed.unwrap_or(0);
    let period = sc
        .interference
        .map_or(DEFAULT_INTERFERENCE_PERIOD, |i| i.period);
    sc.filter_window = match cfg.run.filter_window {
        Some(w) => w,
        None if sc.dt > 0.0 && period > 0.0 => default_filter_window(period, sc.dt),
        None => 1,
    };
    sc.validate()?;

    let sweep = match &cfg.sweep {
        Some(s) => {
            let grid = StartGrid {
                x: s.x,
                y: s.y,
                nx: s.nx,
                ny: s.ny,
                z: s.z,
            };
            grid.validate()?;
            if !(0.0..=1.0).contains(&s.success_floor) {
                return Err(Error::config("sweep.success_floor", "must lie in [0, 1]"));
            }
            Some((grid, s.success_floor))
        }
        None => None,
    };
    let range = cfg.range.clone().unwrap_or_default();
    if !(range.height > 0.0 && range.r_limit > 0.0 && range.r_limit <= 1000.0) {
        return Err(Error::config(
            "range",
            "height must be > 0 and r_limit in (0, 1000] m",
        ));
    }
    let sensors = RangeSensors {
        downward: response,
        motorized: motor,
        sweep_tilt: sc.params.sweep_tilt,
        min_signal: sc.params.min_signal,
    };
    Ok(Resolved {
        scenario: sc,
        start_given,
        sweep,
        range,
        sensors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_str(text: &str) -> Result<Resolved> {
        resolve(&parse_config(text)?, Path::new("."))
    }

    #[test]
    fn minimal_reference_config() {
        let r = resolve_str("[environment]\nreference = \"env4\"\n").unwrap();
        assert_eq!(r.scenario.controller, ControllerKind::Hybrid);
        assert_eq!(
            r.scenario.start,
            reference_environment("env4").unwrap().start
        );
        assert_eq!(r.scenario.filter_window, 8);
        assert_eq!(r.scenario.params, calibrated_params(&r.scenario.layout));
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let e = resolve_str("[environment]\nreference = \"env4\"\n[params]\nequal_tolx = 0.1\n")
            .unwrap_err()
            .to_string();
        assert!(
            e.contains("params.equal_tolx") || e.contains("params") && e.contains("equal_tolx"),
            "{e}"
        );
        let e = resolve_str("[environment]\nreference = \"env4\"\n[run]\nstrat = [0, 0, 1]\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("run") && e.contains("strat"), "{e}");
        let e = resolve_str("bogus = 1\n[environment]\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("bogus"), "{e}");
    }

    #[test]
    fn negative_dt_names_dt() {
        let e = resolve_str("[environment]\n[run]\nstart = [1, 0, 1]\ndt = -0.1\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("`dt`"), "{e}");
    }

    #[test]
    fn overrides_apply() {
        let text = r#"
seed = 9
[environment]
ambient_dc = 0.2
walls = [{ from = [-1, 1], to = [1, 1], reflectance = 0.5 }]
[environment.source]
kind = "bulb"
lambert_exponent = 2.0
[controller]
kind = "arpd"
pd_count = 6
[run]
start = [0.3, 0.2, 1.1]
[sensor]
adc_bits = 12
[params]
near_gain = 5.0
[interference]
period = 0.2
"#;
        let r = resolve_str(text).unwrap();
        let sc = &r.scenario;
        assert_eq!(sc.seed, 9);
        assert_eq!(sc.layout.len(), 6);
        assert!(sc.layout.responses.iter().all(|r| r.adc_bits == 12));
        assert_eq!(sc.params.near_gain, 5.0);
        assert_eq!(
            sc.params.min_signal,
            calibrated_params(&sc.layout).min_signal
        );
        assert_eq!(sc.environment.ambient_dc(), 0.2);
        assert_eq!(sc.environment.surfaces().len(), 1);
        assert_eq!(sc.interference.unwrap().period, 0.2);
        assert_eq!(sc.filter_window, 15);
    }

    #[test]
    fn reference_cannot_take_walls() {
        let e = resolve_str(
            "[environment]\nreference = \"env2\"\nwalls = [{ from = [0, 0], to = [1, 0] }]\n",
        )
        .unwrap_err();
        assert!(e.to_string().contains("environment.reference"));
    }
}
