//! Uniform frequency comb: `N` equal-amplitude tones at `f0 + n·Δf`, `n = 1..=N`.

use std::f64::consts::TAU;

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombSpec {
    /// Carrier, Hz. The lowest tone is `f0 + delta_f`.
    pub f0: f64,
    pub delta_f: f64,
    pub num_tones: usize,
    /// Pulse duration, seconds.
    pub duration: f64,
    pub amplitude: f64,
}

impl CombSpec {
    pub fn new(f0: f64, delta_f: f64, num_tones: usize, duration: f64, amplitude: f64) -> Result<Self> {
        let comb = Self { f0, delta_f, num_tones, duration, amplitude };
        comb.validate()?;
        Ok(comb)
    }

    /// Comb whose duration equals the unambiguous period `1/Δf`.
    pub fn periodic(f0: f64, delta_f: f64, num_tones: usize) -> Result<Self> {
        Self::new(f0, delta_f, num_tones, 1.0 / delta_f, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(Error::InvalidComb(format!("delta_f must be > 0, got {}", self.delta_f)));
        }
        if self.num_tones == 0 {
            return Err(Error::InvalidComb("num_tones must be >= 1".into()));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidComb(format!("duration must be > 0, got {}", self.duration)));
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::InvalidComb(format!("amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !self.f0.is_finite() || self.f0 + self.delta_f <= 0.0 {
            return Err(Error::InvalidComb(format!(
                "lowest tone f0 + delta_f = {} Hz must be positive",
                self.f0 + self.delta_f
            )));
        }
        Ok(())
    }

    /// Repetition period of the summed output, `1/Δf`.
    pub fn period(&self) -> f64 {
        1.0 / self.delta_f
    }

    pub fn tone_frequency(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.num_tones {
            return Err(Error::ToneIndex { index: n, count: self.num_tones });
        }
        Ok(self.f0 + n as f64 * self.delta_f)
    }

    pub fn tone_frequencies(&self) -> Vec<f64> {
        (1..=self.num_tones).map(|n| self.f0 + n as f64 * self.delta_f).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.f0 + self.num_tones as f64 * self.delta_f
    }

    /// Mid-point between the lowest and highest tone.
    pub fn center_frequency(&self) -> f64 {
        self.f0 + 0.5 * (self.num_tones as f64 + 1.0) * self.delta_f
    }

    pub fn wavelength(&self, n: usize) -> Result<f64> {
        wavelength_of(self.tone_frequency(n)?)
    }

    /// Transmitted comb `A·Σ cos(2π f_n t)`. No windowing is applied.
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude
            * (1..=self.num_tones)
                .map(|n| {
                    let f = self.f0 + n as f64 * self.delta_f;
                    (TAU * (f * t).rem_euclid(1.0)).cos()
                })
                .sum::<f64>()
    }
}

pub fn wavelength_of(freq: f64) -> Result<f64> {
    if !(freq.is_finite() && freq > 0.0) {
        return Err(Error::InvalidParameter(format!("frequency must be > 0, got {freq}")));
    }
    Ok(SPEED_OF_LIGHT / freq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub frequency: f64,
    /// Single-sided amplitude estimate.
    pub magnitude: f64,
}

/// Samples the comb and returns its `N` strongest positive-frequency DFT bins,
/// ordered by frequency.
pub fn comb_spectrum_lines(comb: &CombSpec, sample_rate: f64, num_samples: usize) -> Result<Vec<SpectralLine>> {
    comb.validate()?;
    let required = 2.0 * comb.max_frequency();
    if !(sample_rate > required) {
        return Err(Error::Undersampled { sample_rate, required });
    }
    if num_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut buf: Vec<Complex64> =
        (0..num_samples).map(|k| Complex64::new(comb.value(k as f64 / sample_rate), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(num_samples).process(&mut buf);

    let half = num_samples / 2;
    let scale = 2.0 / num_samples as f64;
    let mut bins: Vec<SpectralLine> = (1..=half)
        .map(|k| SpectralLine {
            frequency: k as f64 * sample_rate / num_samples as f64,
            magnitude: buf[k].norm() * scale,
        })
        .collect();
    bins.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    bins.truncate(comb.num_tones);
    bins.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(bins)
}
