//! Summation of the tuned element outputs over time.
//!
//! Every element emits a single tone, so the summed output is a closed-form
//! sum of complex exponentials and no RF sampling is needed. The envelope is
//! the magnitude of that analytic sum.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagation::{ElementPhasor, NoiseModel};

/// Uniform time grid `start + k·step`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    /// `points` samples covering `[0, span)`.
    pub fn over(span: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::Empty("time grid has no points".into()));
        }
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::InvalidParameter(format!("grid span must be > 0, got {span}")));
        }
        Ok(Self { start: 0.0, step: span / points as f64, len: points })
    }

    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn span(&self) -> f64 {
        self.step * self.len as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.at(k)).collect()
    }
}

/// Lowest baseband frequency; factoring it out leaves only multiples of the
/// tone spacing inside the sum.
fn reference_frequency(phasors: &[ElementPhasor]) -> f64 {
    phasors.iter().map(|p| p.baseband_hz).fold(f64::INFINITY, f64::min)
}

fn cis_cycles(cycles: f64) -> Complex64 {
    Complex64::cis(TAU * cycles.rem_euclid(1.0))
}

/// Summed output with the common rotation `e^{j2πν_ref·t}` removed.
fn rotated_sum(phasors: &[ElementPhasor], nu_ref: f64, tau: f64) -> Complex64 {
    phasors.iter().map(|p| p.value * cis_cycles((p.baseband_hz - nu_ref) * tau)).sum()
}

/// Envelope `|Σ a_n e^{j(2πν_n(t − offset) + φ_n)}|` at a single instant.
pub fn envelope_at(phasors: &[ElementPhasor], t: f64, time_offset: f64) -> f64 {
    rotated_sum(phasors, reference_frequency(phasors), t - time_offset).norm()
}

/// Complex summed baseband output on `grid`, optionally with per-element,
/// per-sample circular Gaussian noise.
pub fn beamform_complex(
    phasors: &[ElementPhasor],
    grid: &TimeGrid,
    time_offset: f64,
    noise: Option<&NoiseModel>,
) -> Result<Vec<Complex64>> {
    if grid.len == 0 {
        return Err(Error::Empty("time grid has no points".into()));
    }
    if phasors.is_empty() {
        return Err(Error::Empty("no element phasors".into()));
    }
    let nu_ref = reference_frequency(phasors);
    let mut out: Vec<Complex64> = (0..grid.len)
        .into_par_iter()
        .map(|k| {
            let tau = grid.at(k) - time_offset;
            rotated_sum(phasors, nu_ref, tau) * cis_cycles(nu_ref * tau)
        })
        .collect();
    if let Some(noise) = noise.filter(|n| n.sigma > 0.0) {
        add_element_noise(&mut out, phasors.len(), noise);
    }
    Ok(out)
}

/// Adds `elements` independent noise samples to every output sample, in a
/// fixed order so a seed reproduces the same realisation.
fn add_element_noise(out: &mut [Complex64], elements: usize, noise: &NoiseModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let scale = noise.sigma * std::f64::consts::FRAC_1_SQRT_2;
    for y in out.iter_mut() {
        for _ in 0..elements {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *y += Complex64::new(re * scale, im * scale);
        }
    }
}

pub fn beamform_envelope(
    phasors: &[ElementPhasor],
    grid: &TimeGrid,
    time_offset: f64,
    noise: Option<&NoiseModel>,
) -> Result<Vec<f64>> {
    if noise.is_some_and(|n| n.sigma > 0.0) {
        return Ok(beamform_complex(phasors, grid, time_offset, noise)?.iter().map(|y| y.norm()).collect());
    }
    if grid.len == 0 {
        return Err(Error::Empty("time grid has no points".into()));
    }
    if phasors.is_empty() {
        return Err(Error::Empty("no element phasors".into()));
    }
    let nu_ref = reference_frequency(phasors);
    Ok((0..grid.len).into_par_iter().map(|k| rotated_sum(phasors, nu_ref, grid.at(k) - time_offset).norm()).collect())
}

/// Real sum of the element outputs before mixing, `Σ a_n cos(2π f_n (t − offset) + φ_n)`.
pub fn beamform_rf(phasors: &[ElementPhasor], times: &[f64], time_offset: f64) -> Vec<f64> {
    times
        .par_iter()
        .map(|&t| {
            let tau = t - time_offset;
            phasors.iter().map(|p| (p.value * cis_cycles(p.tone_hz * tau)).re).sum()
        })
        .collect()
}
