//! Frequency-comb k-space beamforming.
//!
//! Every element of a linear array is tuned to a single tone of a transmitted
//! frequency comb. Because the tones are spaced by `Δf`, the inter-element
//! phase gradient of the summed output sweeps linearly through spatial
//! frequency over one comb period `1/Δf`. A source shows up as a peak at the
//! instant its spatial frequency is matched; a calibrated time axis turns that
//! instant into a direction cosine `u` and an azimuth.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: array layouts, sources, distances and angle conventions
//! - [`waveform`]: the comb itself
//! - [`propagation`]: per-element received phasors (spherical or plane wave)
//! - [`kspace`]: tuning, summation over time, axis calibration, peak picking
//! - [`conventional`]: narrowband steering-vector beamformer and phase maps
//! - [`analysis`]: reference oracles, sweeps and Monte-Carlo drivers

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod conventional;
pub mod error;
pub mod geometry;
pub mod kspace;
pub mod propagation;
pub mod waveform;

pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, ArrayKind, Placement, PropagationModel, Scene, Source, TuningOrder, Vec3};
pub use kspace::{AxisCalibration, BeamformOutput, Peak, PipelineConfig, TimeOrigin, TuningPlan};
pub use propagation::{ElementPhasor, NoiseModel, PhaseReference, PhaseSign};
pub use waveform::CombSpec;

/// Speed of light in vacuum, m/s (exact by definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
