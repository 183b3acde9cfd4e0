//! Received per-element phasors under the spherical or plane-wave model.
//!
//! A point source at `p` reaches element `e` after a path `d = |p − e|`; the
//! received tone carries a phase of `σ·2π·d/λ` where `σ = −1` for
//! [`PhaseSign::Delay`] and `+1` for [`PhaseSign::Advance`]. A far-field
//! source in direction `s` is the `|p| → ∞` limit with the bulk path removed,
//! `d − |p| → −s·e`, so the two models agree for distant sources.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{check_direction, ArrayGeometry, ArrayKind, Placement, PropagationModel, Scene, Source, Vec3};
use crate::kspace::TuningPlan;
use crate::waveform::CombSpec;
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseSign {
    /// `e^{−j2πd/λ}`: phase lags with path length.
    #[default]
    Delay,
    /// `e^{+j2πd/λ}`.
    Advance,
}

impl PhaseSign {
    pub fn factor(self) -> f64 {
        match self {
            PhaseSign::Delay => -1.0,
            PhaseSign::Advance => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            PhaseSign::Delay => PhaseSign::Advance,
            PhaseSign::Advance => PhaseSign::Delay,
        }
    }
}

/// Which path length a point source's phase is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseReference {
    /// Path relative to the source's distance from the coordinate origin,
    /// i.e. time is counted from the pulse's arrival at the origin.
    #[default]
    Arrival,
    /// Full source-to-element path, counted from transmission.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationSettings {
    pub sign: PhaseSign,
    pub reference: PhaseReference,
    /// Scale point-source amplitudes by `1/d` (meters).
    pub path_loss: bool,
}

/// Output of one ideal single-tone element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPhasor {
    pub element: usize,
    /// Comb tone index, 1-based.
    pub tone: usize,
    pub tone_hz: f64,
    /// Tone frequency after mixing, `f_n − f_LO`.
    pub baseband_hz: f64,
    pub value: Complex64,
}

impl ElementPhasor {
    pub fn amplitude(&self) -> f64 {
        self.value.norm()
    }

    /// Phase wrapped to `(−π, π]`.
    pub fn angle(&self) -> f64 {
        wrap_phase(self.value.arg())
    }
}

/// Wraps radians into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut w = x.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

/// Fractional cycles in `[−0.5, 0.5]`.
fn centered_fraction(cycles: f64) -> f64 {
    cycles - cycles.round()
}

fn point_of(source: &Source) -> Result<Vec3> {
    match source.placement {
        Placement::Point(p) => Ok(p),
        Placement::FarField { .. } => Err(Error::FarFieldSourceInExactModel),
    }
}

fn check_freq(freq: f64) -> Result<()> {
    if !(freq.is_finite() && freq > 0.0) {
        return Err(Error::InvalidParameter(format!("frequency must be > 0, got {freq}")));
    }
    Ok(())
}

/// `|p − e| − |p|` without cancellation.
fn path_beyond_origin(p: &Vec3, e: &Vec3) -> f64 {
    let d = p.sub(e).norm();
    let r = p.norm();
    (e.norm_sq() - 2.0 * p.dot(e)) / (d + r)
}

fn propagation_cycles(source: &Source, element: &Vec3, freq: f64, reference: PhaseReference) -> Result<f64> {
    let p = point_of(source)?;
    let path = match reference {
        PhaseReference::Absolute => p.sub(element).norm(),
        PhaseReference::Arrival => path_beyond_origin(&p, element),
    };
    Ok(centered_fraction(path * freq / SPEED_OF_LIGHT))
}

fn farfield_cycles(u: f64, v: f64, element: &Vec3, freq: f64) -> f64 {
    let w = (1.0 - u * u - v * v).max(0.0).sqrt();
    let path = -(u * element.x + v * element.y + w * element.z);
    centered_fraction(path * freq / SPEED_OF_LIGHT)
}

/// Spherical-model phase of a point source at an element, radians in `(−π, π]`,
/// using the full source-to-element path.
pub fn received_phase_exact(source: &Source, element: &Vec3, freq: f64, sign: PhaseSign) -> Result<f64> {
    received_phase_exact_from(source, element, freq, sign, PhaseReference::Absolute)
}

pub fn received_phase_exact_from(
    source: &Source,
    element: &Vec3,
    freq: f64,
    sign: PhaseSign,
    reference: PhaseReference,
) -> Result<f64> {
    check_freq(freq)?;
    let cycles = propagation_cycles(source, element, freq, reference)?;
    Ok(wrap_phase(sign.factor() * TAU * cycles + source.phase))
}

/// Plane-wave phase of a far-field source, radians in `(−π, π]`.
///
/// The path relative to the origin is `−(u·x + v·y + w·z)`, so under
/// [`PhaseSign::Delay`] elements closer to the source lead.
pub fn received_phase_farfield(source: &Source, element: &Vec3, freq: f64, sign: PhaseSign) -> Result<f64> {
    check_freq(freq)?;
    let Placement::FarField { u, v } = source.placement else {
        return Err(Error::InvalidSource("plane-wave model needs a far-field source".into()));
    };
    check_direction(u, v)?;
    let cycles = farfield_cycles(u, v, element, freq);
    Ok(wrap_phase(sign.factor() * TAU * cycles + source.phase))
}

/// Complex contribution of one source at one element and frequency.
pub(crate) fn source_phasor(
    source: &Source,
    element: &Vec3,
    freq: f64,
    model: PropagationModel,
    settings: &PropagationSettings,
) -> Result<Complex64> {
    let (cycles, amplitude) = match (source.placement, model) {
        (Placement::FarField { u, v }, _) => (farfield_cycles(u, v, element, freq), source.amplitude),
        (Placement::Point(p), PropagationModel::FarField) => {
            let (u, v) = crate::geometry::direction_cosines(&p);
            (farfield_cycles(u, v, element, freq), source.amplitude)
        }
        (Placement::Point(p), PropagationModel::ExactSpherical) => {
            let cycles = propagation_cycles(source, element, freq, settings.reference)?;
            let amp = if settings.path_loss {
                source.amplitude / p.sub(element).norm().max(f64::MIN_POSITIVE)
            } else {
                source.amplitude
            };
            (cycles, amp)
        }
    };
    let phase = settings.sign.factor() * TAU * cycles;
    Ok(Complex64::from_polar(amplitude, phase) * Complex64::cis(source.phase))
}

/// One superposed phasor per element of a linear array, each element hearing
/// only the comb tone assigned to it by `tuning`.
pub fn scene_element_phasors(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    tuning: &TuningPlan,
    f_lo: f64,
    settings: &PropagationSettings,
) -> Result<Vec<ElementPhasor>> {
    scene.validate()?;
    geom.validate()?;
    comb.validate()?;
    if geom.kind != ArrayKind::Linear {
        return Err(Error::UnsupportedGeometry("comb beamforming needs a linear array".into()));
    }
    if tuning.len() != geom.num_elements() || comb.num_tones != geom.num_elements() {
        return Err(Error::CountMismatch { elements: geom.num_elements(), tones: tuning.len() });
    }
    geom.element_positions()
        .iter()
        .enumerate()
        .map(|(element, pos)| {
            let tone = tuning.tone_for(element);
            let freq = comb.tone_frequency(tone)?;
            let mut value = Complex64::new(0.0, 0.0);
            for source in &scene.sources {
                value += source_phasor(source, pos, freq, scene.model, settings)?;
            }
            Ok(ElementPhasor { element, tone, tone_hz: freq, baseband_hz: freq - f_lo, value })
        })
        .collect()
}

/// Circular complex white noise added per element per time sample when
/// beamforming. `sigma` is the per-sample RMS magnitude (`E|w|² = σ²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    /// Same noise level with a seed derived from `self.seed` and `stream`.
    pub fn derive(&self, stream: u64) -> Self {
        // splitmix64 finalizer keeps neighbouring streams decorrelated
        let mut z = self.seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self { sigma: self.sigma, seed: z ^ (z >> 31) }
    }
}
