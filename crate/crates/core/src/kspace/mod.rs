//! Comb k-space beamforming: tone assignment, summation over time, axis
//! calibration and peak extraction.
//!
//! With element `m` tuned to tone `n(m)`, the summed baseband output is
//!
//! ```text
//! y(t) = Σ_m a_m · exp(j(2π ν_{n(m)} t + φ_m))
//! ```
//!
//! where `φ_m` is the propagation phase. Because `ν` steps by `Δf` from one
//! element to the next, the phase gradient across the aperture at time `t`
//! is `2πΔf·t` per element: the array sweeps through every spatial frequency
//! once per period `1/Δf`, and `|y|` peaks when the sweep matches the
//! source's own gradient.

mod beamform;
mod calibration;
mod peaks;
mod tuning;

pub use beamform::{beamform_complex, beamform_envelope, beamform_rf, envelope_at, TimeGrid};
pub use calibration::{calibrate_axis, probe_peak_time, AxisCalibration, ORIENTATION_PROBE_U};
pub use peaks::{find_peaks, Peak};
pub use tuning::{assign_tuning, TuningPlan};

pub(crate) use peaks::{local_maxima, parabolic_vertex};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Scene};
use crate::propagation::{scene_element_phasors, ElementPhasor, NoiseModel, PropagationSettings};
use crate::waveform::CombSpec;

/// Default number of envelope samples per comb period.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Where the reported time axis starts relative to the beamformer's own clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeOrigin {
    /// `t = 0` is the instant all element phases equal their propagation
    /// phases; a boresight source peaks at `t = 0`.
    #[default]
    Aligned,
    /// Shifted by half a period so a boresight source peaks mid-window and
    /// the window runs monotonically from one edge of k-space to the other.
    Centered,
}

impl TimeOrigin {
    pub fn offset(self, comb: &CombSpec) -> f64 {
        match self {
            TimeOrigin::Aligned => 0.0,
            TimeOrigin::Centered => 0.5 * comb.period(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Envelope samples over the comb duration.
    pub grid_points: usize,
    /// Local oscillator; `None` mixes at the comb carrier `f0`.
    pub f_lo: Option<f64>,
    pub propagation: PropagationSettings,
    pub time_origin: TimeOrigin,
    pub threshold_fraction: f64,
    /// Minimum peak spacing in `u`; `None` uses `2/N`.
    pub min_separation_u: Option<f64>,
    pub noise: Option<NoiseModel>,
    /// Range of the calibration probes; `None` uses plane waves.
    pub probe_range: Option<f64>,
    pub emit_rf: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            f_lo: None,
            propagation: PropagationSettings::default(),
            time_origin: TimeOrigin::default(),
            threshold_fraction: 0.5,
            min_separation_u: None,
            noise: None,
            probe_range: None,
            emit_rf: false,
        }
    }
}

impl PipelineConfig {
    pub fn lo(&self, comb: &CombSpec) -> f64 {
        self.f_lo.unwrap_or(comb.f0)
    }

    pub fn min_separation(&self, comb: &CombSpec) -> f64 {
        self.min_separation_u.unwrap_or(2.0 / comb.num_tones as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformOutput {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Real RF sum, when requested.
    pub rf: Option<Vec<f64>>,
    pub calibration: AxisCalibration,
    pub u: Vec<f64>,
    /// Azimuth per grid point, degrees; NaN where `|u| > 1`.
    pub azimuth_deg: Vec<f64>,
    pub peaks: Vec<Peak>,
}

impl BeamformOutput {
    /// True when the grid spans a whole number of comb periods, so its ends wrap.
    pub fn is_periodic(&self) -> bool {
        let periods = self.grid.span() * self.calibration.delta_f;
        periods >= 1.0 - 1e-9 && (periods - periods.round()).abs() < 1e-9
    }
}

/// Converts a direction cosine to azimuth in degrees, `arcsin(u)`.
///
/// Identical to `atan(u / √(1 − u²))` for `|u| < 1` and well defined at the
/// endfire points `u = ±1`.
pub fn u_to_azimuth(u: f64) -> Result<f64> {
    if !(u.abs() <= 1.0) {
        return Err(Error::AngleOutOfRange(format!("|u| must be <= 1, got {u}")));
    }
    Ok(u.asin().to_degrees())
}

/// Everything produced by one run of the k-space chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub tuning: TuningPlan,
    pub phasors: Vec<ElementPhasor>,
    pub output: BeamformOutput,
}

pub fn element_phasors(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<(TuningPlan, Vec<ElementPhasor>)> {
    let tuning = assign_tuning(geom, comb)?;
    let phasors = scene_element_phasors(scene, geom, comb, &tuning, cfg.lo(comb), &cfg.propagation)?;
    Ok((tuning, phasors))
}

/// Peak time of the noiseless envelope over one comb period.
pub(crate) fn global_peak_time(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<f64> {
    let (_, phasors) = element_phasors(scene, geom, comb, cfg)?;
    let grid = TimeGrid::over(comb.period(), cfg.grid_points)?;
    let env = beamform_envelope(&phasors, &grid, cfg.time_origin.offset(comb), None)?;
    let peak =
        local_maxima(&env, true)?.into_iter().next().ok_or_else(|| Error::Empty("probe produced no output".into()))?;
    Ok(grid.at(0) + peak.position * grid.step)
}

/// Full chain: phasors, calibrated envelope over the comb duration, peaks.
pub fn run_pipeline(scene: &Scene, geom: &ArrayGeometry, comb: &CombSpec, cfg: &PipelineConfig) -> Result<PipelineRun> {
    comb.validate()?;
    let calibration = calibrate_axis(geom, comb, cfg)?;
    run_with_calibration(scene, geom, comb, cfg, calibration)
}

pub fn run_with_calibration(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
    calibration: AxisCalibration,
) -> Result<PipelineRun> {
    let (tuning, phasors) = element_phasors(scene, geom, comb, cfg)?;
    let grid = TimeGrid::over(comb.duration, cfg.grid_points)?;
    let offset = cfg.time_origin.offset(comb);
    let envelope = beamform_envelope(&phasors, &grid, offset, cfg.noise.as_ref())?;
    let times = grid.times();
    let rf = cfg.emit_rf.then(|| beamform_rf(&phasors, &times, offset));
    let u: Vec<f64> = times.iter().map(|&t| calibration.time_to_u(t)).collect();
    let azimuth_deg = u.iter().map(|&u| u_to_azimuth(u).unwrap_or(f64::NAN)).collect();
    let mut output = BeamformOutput { grid, times, envelope, rf, calibration, u, azimuth_deg, peaks: Vec::new() };
    output.peaks = find_peaks(&output, cfg.threshold_fraction, cfg.min_separation(comb))?;
    Ok(PipelineRun { tuning, phasors, output })
}

/// `(azimuth in degrees, magnitude)` for every detected source, strongest first.
pub fn estimate_azimuths(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<Vec<(f64, f64)>> {
    let run = run_pipeline(scene, geom, comb, cfg)?;
    Ok(run.output.peaks.iter().map(|p| (p.azimuth_deg, p.magnitude)).collect())
}
