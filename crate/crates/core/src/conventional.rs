//! Narrowband steering-vector beamformer and aperture phase maps.
//!
//! Element `(m, n)` of an `M × N` grid is weighted by
//! `a_mn(u, v) = exp(−jk(m·dx·u + n·dy·v))`, `k = 2π/λ`, and the beam is
//! `b(u, v) = E(u, v)·aᴴs`. Element offsets are taken relative to element
//! `(0, 0)`, so the steering vector always starts with `1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{check_direction, ArrayGeometry, Placement, Source};
use crate::propagation::{received_phase_exact, received_phase_farfield, PhaseSign};

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub weights: Vec<Complex64>,
    pub u: f64,
    pub v: f64,
    pub wavelength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// `cos(θ)^q` with `cos θ = √(1 − u² − v²)`.
    CosinePower(f64),
}

impl ElementPattern {
    pub fn gain(&self, u: f64, v: f64) -> f64 {
        match *self {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::CosinePower(q) => (1.0 - u * u - v * v).max(0.0).sqrt().powf(q),
        }
    }
}

fn check_wavelength(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("wavelength must be > 0, got {lambda}")));
    }
    Ok(())
}

fn dy_of(geom: &ArrayGeometry) -> f64 {
    match geom.kind {
        crate::ArrayKind::Linear => 0.0,
        crate::ArrayKind::Planar => geom.dy,
    }
}

pub fn steering_vector(geom: &ArrayGeometry, u: f64, v: f64, wavelength: f64) -> Result<SteeringVector> {
    geom.validate()?;
    check_direction(u, v)?;
    check_wavelength(wavelength)?;
    let dy = dy_of(geom);
    let mut weights = Vec::with_capacity(geom.num_elements());
    for m in 0..geom.m {
        for n in 0..geom.n {
            let cycles = (m as f64 * geom.dx * u + n as f64 * dy * v) / wavelength;
            weights.push(Complex64::cis(-TAU * cycles));
        }
    }
    Ok(SteeringVector { weights, u, v, wavelength })
}

/// `|b(u, v)|` over a list of look directions.
///
/// The double sum is evaluated as a product of per-axis sums: the inner sum
/// over `n` is formed once per row `m` and look direction.
pub fn beamform_conventional(
    snapshot: &[Complex64],
    geom: &ArrayGeometry,
    wavelength: f64,
    pattern: ElementPattern,
    directions: &[(f64, f64)],
) -> Result<Vec<f64>> {
    geom.validate()?;
    check_wavelength(wavelength)?;
    if snapshot.len() != geom.num_elements() {
        return Err(Error::CountMismatch { elements: geom.num_elements(), tones: snapshot.len() });
    }
    for &(u, v) in directions {
        check_direction(u, v)?;
    }
    let k = TAU / wavelength;
    let dy = dy_of(geom);
    Ok(directions
        .par_iter()
        .map(|&(u, v)| {
            let col: Vec<Complex64> = (0..geom.n).map(|n| Complex64::cis(k * n as f64 * dy * v)).collect();
            let b: Complex64 = (0..geom.m)
                .map(|m| {
                    let row = &snapshot[m * geom.n..(m + 1) * geom.n];
                    let inner: Complex64 = row.iter().zip(&col).map(|(s, c)| s * c).sum();
                    inner * Complex64::cis(k * m as f64 * geom.dx * u)
                })
                .sum();
            pattern.gain(u, v) * b.norm()
        })
        .collect())
}

/// Array response to a unit plane wave from `(u, v)`: the steering vector itself.
pub fn plane_wave_snapshot(
    geom: &ArrayGeometry,
    u: f64,
    v: f64,
    wavelength: f64,
    amplitude: f64,
) -> Result<Vec<Complex64>> {
    Ok(steering_vector(geom, u, v, wavelength)?.weights.into_iter().map(|w| w * amplitude).collect())
}

/// Wrapped phase (degrees, `(−180, 180]`) of one source at every element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    pub m: usize,
    pub n: usize,
    /// `m`-major, matching [`ArrayGeometry::element_positions`].
    pub phase_deg: Vec<f64>,
    pub geometry: ArrayGeometry,
    pub source: Source,
    pub freq: f64,
}

/// Least-squares plane `offset + grad_x·x + grad_y·y` through an unwrapped map, in cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub offset: f64,
    /// cycles per meter
    pub grad_x: f64,
    pub grad_y: f64,
}

fn wrap_deg(x: f64) -> f64 {
    let mut w = x.rem_euclid(360.0);
    if w > 180.0 {
        w -= 360.0;
    }
    w
}

/// Per-element phase of the received field `exp(−j2πd/λ)` (far-field sources
/// use the plane-wave path).
pub fn phase_map(geom: &ArrayGeometry, source: &Source, freq: f64) -> Result<PhaseMap> {
    geom.validate()?;
    source.validate()?;
    let phase_deg = geom
        .element_positions()
        .iter()
        .map(|pos| {
            let rad = match source.placement {
                Placement::Point(_) => received_phase_exact(source, pos, freq, PhaseSign::Delay)?,
                Placement::FarField { .. } => received_phase_farfield(source, pos, freq, PhaseSign::Delay)?,
            };
            Ok(wrap_deg(rad.to_degrees()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseMap { m: geom.m, n: geom.n, phase_deg, geometry: geom.clone(), source: *source, freq })
}

impl PhaseMap {
    pub fn at(&self, m: usize, n: usize) -> f64 {
        self.phase_deg[m * self.n + n]
    }

    /// Unwraps along the first row (`n = 0`, increasing `m`), then up every
    /// column. Fails if any neighbouring pair still differs by ≥ 180°.
    pub fn unwrap(&self) -> Result<Vec<f64>> {
        let (mm, nn) = (self.m, self.n);
        let mut out = vec![0.0; mm * nn];
        let idx = |m: usize, n: usize| m * nn + n;
        out[0] = self.phase_deg[0];
        for m in 1..mm {
            let prev = out[idx(m - 1, 0)];
            out[idx(m, 0)] = prev + wrap_deg(self.at(m, 0) - prev);
        }
        for m in 0..mm {
            for n in 1..nn {
                let prev = out[idx(m, n - 1)];
                out[idx(m, n)] = prev + wrap_deg(self.at(m, n) - prev);
            }
        }
        for m in 0..mm {
            for n in 0..nn {
                let here = out[idx(m, n)];
                let steps =
                    [(m + 1 < mm).then(|| out[idx(m + 1, n)] - here), (n + 1 < nn).then(|| out[idx(m, n + 1)] - here)];
                if let Some(step) = steps.into_iter().flatten().find(|s| s.abs() >= 180.0) {
                    return Err(Error::UnwrapFailed { m, n, step_deg: step });
                }
            }
        }
        Ok(out)
    }

    /// Mean absolute unwrapped step between horizontal (`m`) and vertical
    /// (`n`) neighbours, degrees.
    pub fn mean_steps(&self) -> Result<(f64, f64)> {
        let un = self.unwrap()?;
        let (mm, nn) = (self.m, self.n);
        let mean = |v: Vec<f64>| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let horizontal = (0..mm.saturating_sub(1))
            .flat_map(|m| (0..nn).map(move |n| (m, n)))
            .map(|(m, n)| (un[(m + 1) * nn + n] - un[m * nn + n]).abs())
            .collect();
        let vertical = (0..mm)
            .flat_map(|m| (0..nn.saturating_sub(1)).map(move |n| (m, n)))
            .map(|(m, n)| (un[m * nn + n + 1] - un[m * nn + n]).abs())
            .collect();
        Ok((mean(horizontal), mean(vertical)))
    }

    /// Least-squares plane through the unwrapped phase, in cycles.
    pub fn fit_plane(&self) -> Result<PlaneFit> {
        Ok(fit_plane(&self.geometry, &self.unwrapped_cycles()?)?.0)
    }

    fn unwrapped_cycles(&self) -> Result<Vec<f64>> {
        Ok(self.unwrap()?.into_iter().map(|d| d / 360.0).collect())
    }
}

/// Fits `offset + gx·x + gy·y` and returns the fit with its residuals.
fn fit_plane(geom: &ArrayGeometry, values: &[f64]) -> Result<(PlaneFit, Vec<f64>)> {
    if geom.num_elements() < 2 {
        return Err(Error::UnsupportedGeometry("a single element has no phase gradient".into()));
    }
    let pos = geom.element_positions();
    let count = pos.len() as f64;
    let mx = pos.iter().map(|p| p.x).sum::<f64>() / count;
    let my = pos.iter().map(|p| p.y).sum::<f64>() / count;
    let mv = values.iter().sum::<f64>() / count;
    let (mut sxx, mut syy, mut sxy, mut sxv, mut syv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, &val) in pos.iter().zip(values) {
        let (x, y, v) = (p.x - mx, p.y - my, val - mv);
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxv += x * v;
        syv += y * v;
    }
    let (gx, gy) = if syy == 0.0 {
        (sxv / sxx, 0.0)
    } else if sxx == 0.0 {
        (0.0, syv / syy)
    } else {
        let det = sxx * syy - sxy * sxy;
        ((sxv * syy - syv * sxy) / det, (syv * sxx - sxv * sxy) / det)
    };
    let fit = PlaneFit { offset: mv - gx * mx - gy * my, grad_x: gx, grad_y: gy };
    let residuals = pos.iter().zip(values).map(|(p, &val)| val - (fit.offset + gx * p.x + gy * p.y)).collect();
    Ok((fit, residuals))
}

/// Deviation of the unwrapped phase front from its best-fit plane, cycles,
/// `m`-major.
pub fn curvature_profile(geom: &ArrayGeometry, source: &Source, freq: f64) -> Result<Vec<f64>> {
    let map = phase_map(geom, source, freq)?;
    Ok(fit_plane(geom, &map.unwrapped_cycles()?)?.1)
}
