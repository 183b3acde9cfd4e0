use crate::error::{Error, Result};

use super::{u_to_azimuth, BeamformOutput};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Interpolated peak time, seconds.
    pub time: f64,
    pub u: f64,
    pub azimuth_deg: f64,
    pub magnitude: f64,
}

/// A local maximum of a sampled envelope, refined by a 3-point parabola.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RawPeak {
    pub index: usize,
    /// Refined position in fractional samples.
    pub position: f64,
    pub magnitude: f64,
}

/// Relative spread below which an envelope counts as flat.
const FLAT_TOLERANCE: f64 = 1e-9;

/// Vertex of the parabola through `(−1, a)`, `(0, b)`, `(1, c)`.
pub(crate) fn parabolic_vertex(a: f64, b: f64, c: f64) -> (f64, f64) {
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (0.0, b);
    }
    let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (delta, b - 0.25 * (a - c) * delta)
}

/// Local maxima of `env`, strongest first. When `periodic` the first and last
/// samples are neighbours.
pub(crate) fn local_maxima(env: &[f64], periodic: bool) -> Result<Vec<RawPeak>> {
    let len = env.len();
    if len == 0 {
        return Err(Error::Empty("envelope has no samples".into()));
    }
    let max = env.iter().copied().fold(f64::MIN, f64::max);
    let min = env.iter().copied().fold(f64::MAX, f64::min);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    if max - min <= FLAT_TOLERANCE * max {
        return Err(Error::NoIsolatedPeak);
    }
    let mut peaks = Vec::new();
    for k in 0..len {
        let (prev, next) = if periodic {
            ((k + len - 1) % len, (k + 1) % len)
        } else if k == 0 || k + 1 == len {
            continue;
        } else {
            (k - 1, k + 1)
        };
        let (a, b, c) = (env[prev], env[k], env[next]);
        // ties broken toward the earlier sample so plateaus yield one peak
        if b > a && b >= c {
            let (delta, magnitude) = parabolic_vertex(a, b, c);
            peaks.push(RawPeak { index: k, position: k as f64 + delta, magnitude });
        }
    }
    peaks.sort_by(|x, y| y.magnitude.total_cmp(&x.magnitude));
    Ok(peaks)
}

/// Peaks of a calibrated beamformer output above `threshold_fraction` of the
/// global maximum, at least `min_separation_u` apart, strongest first.
///
/// An all-zero envelope has no peaks; a flat nonzero one is an error.
pub fn find_peaks(out: &BeamformOutput, threshold_fraction: f64, min_separation_u: f64) -> Result<Vec<Peak>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold_fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    if !(min_separation_u >= 0.0) {
        return Err(Error::InvalidParameter(format!("min_separation_u must be >= 0, got {min_separation_u}")));
    }
    let cal = &out.calibration;
    let raw = local_maxima(&out.envelope, out.is_periodic())?;
    let Some(global) = raw.first().map(|p| p.magnitude) else {
        return Ok(Vec::new());
    };
    let span = out.grid.span();
    let u_per_second = cal.u_per_cycle * cal.delta_f;

    let mut accepted: Vec<(f64, Peak)> = Vec::new();
    for p in raw.iter().take_while(|p| p.magnitude >= threshold_fraction * global) {
        let time = out.grid.start + p.position * out.grid.step;
        let separated = accepted.iter().all(|(t, _)| {
            let mut dt = (time - t).abs();
            if out.is_periodic() {
                dt = dt.min(span - dt);
            }
            dt * u_per_second >= min_separation_u
        });
        if !separated {
            continue;
        }
        let u = cal.time_to_u(time);
        if u.abs() > 1.0 + 1e-9 {
            // outside the visible region
            continue;
        }
        let u = u.clamp(-1.0, 1.0);
        accepted.push((time, Peak { time, u, azimuth_deg: u_to_azimuth(u)?, magnitude: p.magnitude }));
    }
    Ok(accepted.into_iter().map(|(_, p)| p).collect())
}
