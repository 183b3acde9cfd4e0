//! Scenario files.
//!
//! A scenario is a TOML document with the tables below. Unknown keys are
//! rejected; every validation message starts with the offending field path.
//!
//! ```toml
//! [comb]
//! f0_hz = 19.0008e9        # carrier; tone n sits at f0 + n·delta_f
//! delta_f_hz = 0.2e6
//! num_tones = 21
//! duration_s = 5e-6        # default 1/delta_f
//! amplitude = 1.0          # default 1
//!
//! [array]
//! kind = "linear"          # or "planar"
//! m = 21
//! n = 1                    # default 1
//! dx_m = 0.0078872
//! dy_m = 0.0078872         # default dx_m
//! tuning_order = "ascending"
//! center = false           # put the array centroid at the origin
//!
//! [[sources]]              # one of: az_deg + range_m (+ el_deg), position_m, u (+ v)
//! az_deg = -45.0
//! range_m = 8.4853
//! amplitude = 1.0
//! phase_rad = 0.0
//!
//! [sim]
//! grid_points = 4096
//! lo_hz = 19e9             # default f0_hz
//! phase_sign = "delay"     # or "advance"
//! time_origin = "aligned"  # or "centered"
//! phase_reference = "arrival"  # or "absolute"
//! model = "exact"          # or "far_field"
//! path_loss = false
//! threshold_fraction = 0.5
//! min_separation_u = 0.095 # default 2/num_tones
//! probe_range_m = 1000.0   # default: plane-wave probes
//! phase_map_hz = 19e9      # default: comb centre frequency
//! noise = { sigma = 1.0, seed = 7, trials = 100 }  # default off
//!
//! [output]
//! directory = "out"
//! emit_rf = false
//! emit_phase_map = false
//!
//! [sweep]                  # exactly one list
//! range_m = [1.0, 2.0, 4.0]
//! ```

use combbeam::analysis::SweepParameter;
use combbeam::kspace::DEFAULT_GRID_POINTS;
use combbeam::propagation::PropagationSettings;
use combbeam::{
    geometry::{source_from_az_el_range, PropagationModel, Scene, Source, TuningOrder, Vec3},
    ArrayGeometry, CombSpec, NoiseModel, PhaseReference, PhaseSign, PipelineConfig, TimeOrigin,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub comb: CombConfig,
    pub array: ArrayConfig,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombConfig {
    pub f0_hz: f64,
    pub delta_f_hz: f64,
    pub num_tones: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKindConfig {
    Linear,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningOrderConfig {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub kind: ArrayKindConfig,
    pub m: usize,
    #[serde(default = "one_usize")]
    pub n: usize,
    pub dx_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dy_m: Option<f64>,
    #[serde(default)]
    pub tuning_order: TuningOrderConfig,
    #[serde(default)]
    pub center: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub az_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub el_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_m: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSignConfig {
    #[default]
    Delay,
    Advance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOriginConfig {
    #[default]
    Aligned,
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseReferenceConfig {
    #[default]
    Arrival,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig {
    #[default]
    Exact,
    FarField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    100
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo_hz: Option<f64>,
    #[serde(default)]
    pub phase_sign: PhaseSignConfig,
    #[serde(default)]
    pub time_origin: TimeOriginConfig,
    #[serde(default)]
    pub phase_reference: PhaseReferenceConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub path_loss: bool,
    #[serde(default = "default_threshold")]
    pub threshold_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_range_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_map_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            lo_hz: None,
            phase_sign: PhaseSignConfig::Delay,
            time_origin: TimeOriginConfig::Aligned,
            phase_reference: PhaseReferenceConfig::Arrival,
            model: ModelConfig::Exact,
            path_loss: false,
            threshold_fraction: 0.5,
            min_separation_u: None,
            probe_range_m: None,
            phase_map_hz: None,
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default)]
    pub emit_rf: bool,
    #[serde(default)]
    pub emit_phase_map: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_tones: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx_m: Option<Vec<f64>>,
}

impl SweepConfig {
    /// The single swept parameter and its values.
    pub fn selected(&self) -> Result<(SweepParameter, Vec<f64>), CliError> {
        let mut chosen = Vec::new();
        if let Some(v) = &self.range_m {
            chosen.push((SweepParameter::Range, v.clone()));
        }
        if let Some(v) = &self.num_tones {
            chosen.push((SweepParameter::NumTones, v.iter().map(|&n| n as f64).collect()));
        }
        if let Some(v) = &self.delta_f_hz {
            chosen.push((SweepParameter::DeltaF, v.clone()));
        }
        if let Some(v) = &self.dx_m {
            chosen.push((SweepParameter::Spacing, v.clone()));
        }
        match chosen.len() {
            1 => {
                let (param, values) = chosen.pop().unwrap();
                if values.is_empty() {
                    return Err(config_error(format!("sweep.{}", param.name()), "list is empty"));
                }
                Ok((param, values))
            }
            0 => Err(config_error("sweep", "no swept parameter given")),
            _ => Err(config_error("sweep", "only one parameter can be swept at a time")),
        }
    }
}

fn config_error(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(config_error(path, format!("must be a positive finite number, got {x}")))
    }
}

/// Parses and validates a scenario, filling in defaults that depend on other
/// fields so the result re-serializes to an equivalent document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.expand_defaults();
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config always serializes")
    }

    pub fn expand_defaults(&mut self) {
        if self.comb.duration_s.is_none() && self.comb.delta_f_hz > 0.0 {
            self.comb.duration_s = Some(1.0 / self.comb.delta_f_hz);
        }
        if self.array.dy_m.is_none() {
            self.array.dy_m = Some(self.array.dx_m);
        }
        if self.sim.lo_hz.is_none() {
            self.sim.lo_hz = Some(self.comb.f0_hz);
        }
        if self.sim.min_separation_u.is_none() && self.comb.num_tones > 0 {
            self.sim.min_separation_u = Some(2.0 / self.comb.num_tones as f64);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.comb;
        positive("comb.f0_hz", c.f0_hz)?;
        positive("comb.delta_f_hz", c.delta_f_hz)?;
        if c.num_tones == 0 {
            return Err(config_error("comb.num_tones", "must be >= 1"));
        }
        if let Some(d) = c.duration_s {
            positive("comb.duration_s", d)?;
        }
        if !(c.amplitude >= 0.0 && c.amplitude.is_finite()) {
            return Err(config_error("comb.amplitude", format!("must be >= 0, got {}", c.amplitude)));
        }

        let a = &self.array;
        if a.m == 0 {
            return Err(config_error("array.m", "must be >= 1"));
        }
        if a.n == 0 {
            return Err(config_error("array.n", "must be >= 1"));
        }
        if a.kind == ArrayKindConfig::Linear && a.n != 1 {
            return Err(config_error("array.n", "a linear array has n = 1"));
        }
        positive("array.dx_m", a.dx_m)?;
        if let Some(dy) = a.dy_m {
            positive("array.dy_m", dy)?;
        }

        if self.sources.is_empty() {
            return Err(config_error("sources", "at least one source is required"));
        }
        for (k, s) in self.sources.iter().enumerate() {
            self.source(k, s)?;
        }

        let s = &self.sim;
        if s.grid_points < 3 {
            return Err(config_error("sim.grid_points", "must be >= 3"));
        }
        if let Some(lo) = s.lo_hz {
            if !lo.is_finite() {
                return Err(config_error("sim.lo_hz", "must be finite"));
            }
        }
        if !(s.threshold_fraction > 0.0 && s.threshold_fraction < 1.0) {
            return Err(config_error("sim.threshold_fraction", "must lie in (0, 1)"));
        }
        if let Some(sep) = s.min_separation_u {
            if !(sep >= 0.0 && sep.is_finite()) {
                return Err(config_error("sim.min_separation_u", "must be >= 0"));
            }
        }
        if let Some(r) = s.probe_range_m {
            positive("sim.probe_range_m", r)?;
        }
        if let Some(f) = s.phase_map_hz {
            positive("sim.phase_map_hz", f)?;
        }
        if let Some(n) = &s.noise {
            if !(n.sigma >= 0.0 && n.sigma.is_finite()) {
                return Err(config_error("sim.noise.sigma", "must be >= 0"));
            }
        }
        if let Some(sweep) = &self.sweep {
            let (param, values) = sweep.selected()?;
            for (k, v) in values.iter().enumerate() {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(config_error(format!("sweep.{}[{k}]", param.name()), format!("must be > 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn source(&self, k: usize, s: &SourceConfig) -> Result<Source, CliError> {
        let path = |field: &str| format!("sources[{k}].{field}");
        let by_angle = s.az_deg.is_some() || s.range_m.is_some() || s.el_deg.is_some();
        let by_position = s.position_m.is_some();
        let by_direction = s.u.is_some() || s.v.is_some();
        let forms = [by_angle, by_position, by_direction].iter().filter(|b| **b).count();
        if forms != 1 {
            return Err(config_error(
                format!("sources[{k}]"),
                "give exactly one of az_deg + range_m, position_m, or u/v",
            ));
        }
        let fail = |field: &str, e: combbeam::Error| config_error(path(field), e);
        let source = if by_angle {
            let az = s.az_deg.ok_or_else(|| config_error(path("az_deg"), "required with range_m"))?;
            let range = s.range_m.ok_or_else(|| config_error(path("range_m"), "required with az_deg"))?;
            source_from_az_el_range(az, s.el_deg.unwrap_or(0.0), range).map_err(|e| fail("az_deg", e))?
        } else if let Some([x, y, z]) = s.position_m {
            let src = Source::point(Vec3::new(x, y, z));
            src.validate().map_err(|e| fail("position_m", e))?;
            src
        } else {
            Source::far_field(s.u.unwrap_or(0.0), s.v.unwrap_or(0.0)).map_err(|e| fail("u", e))?
        };
        if !(s.amplitude >= 0.0 && s.amplitude.is_finite()) {
            return Err(config_error(path("amplitude"), "must be >= 0"));
        }
        if !s.phase_rad.is_finite() {
            return Err(config_error(path("phase_rad"), "must be finite"));
        }
        Ok(source.with_amplitude(s.amplitude).with_phase(s.phase_rad))
    }

    pub fn comb_spec(&self) -> Result<CombSpec, CliError> {
        let c = &self.comb;
        let duration = c.duration_s.unwrap_or(1.0 / c.delta_f_hz);
        CombSpec::new(c.f0_hz, c.delta_f_hz, c.num_tones, duration, c.amplitude).map_err(|e| config_error("comb", e))
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, CliError> {
        let a = &self.array;
        let geom = match a.kind {
            ArrayKindConfig::Linear => ArrayGeometry::linear(a.m, a.dx_m),
            ArrayKindConfig::Planar => ArrayGeometry::planar(a.m, a.n, a.dx_m, a.dy_m.unwrap_or(a.dx_m)),
        }
        .map_err(|e| config_error("array", e))?;
        let order = match a.tuning_order {
            TuningOrderConfig::Ascending => TuningOrder::Ascending,
            TuningOrderConfig::Descending => TuningOrder::Descending,
        };
        let geom = geom.with_tuning_order(order);
        Ok(if a.center { geom.centered() } else { geom })
    }

    /// Scene with amplitudes scaled by the comb amplitude.
    pub fn scene(&self) -> Result<Scene, CliError> {
        let sources = self
            .sources
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let src = self.source(k, s)?;
                Ok(src.with_amplitude(src.amplitude * self.comb.amplitude))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let model = match self.sim.model {
            ModelConfig::Exact => PropagationModel::ExactSpherical,
            ModelConfig::FarField => PropagationModel::FarField,
        };
        Scene::new(sources, model).map_err(|e| config_error("sources", e))
    }

    /// Pipeline settings; `seed` overrides the noise seed when given.
    pub fn pipeline(&self, seed: Option<u64>) -> Result<PipelineConfig, CliError> {
        let s = &self.sim;
        let noise = match &s.noise {
            Some(n) if n.sigma > 0.0 => {
                Some(NoiseModel::new(n.sigma, seed.unwrap_or(n.seed)).map_err(|e| config_error("sim.noise", e))?)
            }
            _ => None,
        };
        Ok(PipelineConfig {
            grid_points: s.grid_points,
            f_lo: Some(s.lo_hz.unwrap_or(self.comb.f0_hz)),
            propagation: PropagationSettings {
                sign: match s.phase_sign {
                    PhaseSignConfig::Delay => PhaseSign::Delay,
                    PhaseSignConfig::Advance => PhaseSign::Advance,
                },
                reference: match s.phase_reference {
                    PhaseReferenceConfig::Arrival => PhaseReference::Arrival,
                    PhaseReferenceConfig::Absolute => PhaseReference::Absolute,
                },
                path_loss: s.path_loss,
            },
            time_origin: match s.time_origin {
                TimeOriginConfig::Aligned => TimeOrigin::Aligned,
                TimeOriginConfig::Centered => TimeOrigin::Centered,
            },
            threshold_fraction: s.threshold_fraction,
            min_separation_u: s.min_separation_u,
            noise,
            probe_range: s.probe_range_m,
            emit_rf: self.output.emit_rf,
        })
    }
}
