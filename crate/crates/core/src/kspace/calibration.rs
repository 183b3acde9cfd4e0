//! Empirical map from beamformer time to direction cosine `u`.
//!
//! Two far-field probes are pushed through the same pipeline as the data:
//! a boresight probe fixes the time offset `t0`, a probe at `u = +0.5` fixes
//! the orientation and the number of `u` units swept per comb period. The
//! result is convention-independent: flipping the phase sign, the tuning
//! order or the time origin changes the probes exactly as it changes the data.

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Placement, PropagationModel, Scene, Source, Vec3};
use crate::waveform::CombSpec;

use super::{global_peak_time, PipelineConfig};

/// Direction cosine of the orientation probe.
pub const ORIENTATION_PROBE_U: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCalibration {
    /// `+1` when `u` grows with time, `−1` otherwise.
    pub slope_sign: f64,
    /// Time at which a boresight source peaks, in `[0, 1/Δf)`.
    pub t0: f64,
    pub delta_f: f64,
    /// `u` units swept per comb period; `λ/d` at the comb centre, so `≈ 2`
    /// for half-wavelength spacing.
    pub u_per_cycle: f64,
}

impl AxisCalibration {
    pub fn new(slope_sign: f64, t0: f64, delta_f: f64, u_per_cycle: f64) -> Result<Self> {
        if slope_sign.abs() != 1.0 {
            return Err(Error::InvalidParameter(format!("slope_sign must be ±1, got {slope_sign}")));
        }
        if !(delta_f > 0.0 && u_per_cycle > 0.0 && u_per_cycle.is_finite()) {
            return Err(Error::InvalidParameter("delta_f and u_per_cycle must be > 0".into()));
        }
        let period = 1.0 / delta_f;
        Ok(Self { slope_sign, t0: t0.rem_euclid(period), delta_f, u_per_cycle })
    }

    pub fn period(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// `u(t) = s·(λ/d)·Δf·(t − t0)` wrapped into `(−λ/2d, λ/2d]`.
    pub fn time_to_u(&self, t: f64) -> f64 {
        let cycles = self.delta_f * (t - self.t0);
        let frac = cycles - cycles.round();
        let mut u = self.slope_sign * self.u_per_cycle * frac;
        let half = 0.5 * self.u_per_cycle;
        if u <= -half {
            u += self.u_per_cycle;
        }
        u
    }

    /// Earliest time in `[0, 1/Δf)` that maps to `u`.
    pub fn u_to_time(&self, u: f64) -> f64 {
        let cycles = self.slope_sign * u / self.u_per_cycle;
        (self.t0 + cycles / self.delta_f).rem_euclid(self.period())
    }

    /// Peak offset from boresight in cycles of `Δf`, in `(−0.5, 0.5]`.
    pub fn t0_cycles(&self) -> f64 {
        self.t0 * self.delta_f
    }
}

pub(crate) fn probe_source(u: f64, probe_range: Option<f64>) -> Result<Source> {
    match probe_range {
        None => Source::far_field(u, 0.0),
        Some(r) if r > 0.0 && r.is_finite() => {
            let w = (1.0 - u * u).sqrt();
            Ok(Source::point(Vec3::new(r * u, 0.0, r * w)))
        }
        Some(r) => Err(Error::InvalidParameter(format!("probe range must be > 0, got {r}"))),
    }
}

/// Runs a probe scene and returns its envelope peak time.
pub fn probe_peak_time(u: f64, geom: &ArrayGeometry, comb: &CombSpec, cfg: &PipelineConfig) -> Result<f64> {
    let source = probe_source(u, cfg.probe_range)?;
    let model = match source.placement {
        Placement::Point(_) => PropagationModel::ExactSpherical,
        Placement::FarField { .. } => PropagationModel::FarField,
    };
    let scene = Scene::new(vec![source], model)?;
    let quiet = PipelineConfig { noise: None, ..cfg.clone() };
    global_peak_time(&scene, geom, comb, &quiet)
}

pub fn calibrate_axis(geom: &ArrayGeometry, comb: &CombSpec, cfg: &PipelineConfig) -> Result<AxisCalibration> {
    if geom.num_elements() < 2 || comb.num_tones < 2 {
        return Err(Error::DegenerateCalibration("a single element has no spatial frequency".into()));
    }
    let t_boresight = probe_peak_time(0.0, geom, comb, cfg)?;
    let t_probe = probe_peak_time(ORIENTATION_PROBE_U, geom, comb, cfg)?;
    let cycles = comb.delta_f * (t_probe - t_boresight);
    let cycles = cycles - cycles.round();
    if cycles.abs() < 1e-9 {
        return Err(Error::DegenerateCalibration("orientation probe peaks with the boresight probe".into()));
    }
    AxisCalibration::new(cycles.signum(), t_boresight, comb.delta_f, ORIENTATION_PROBE_U / cycles.abs())
}
