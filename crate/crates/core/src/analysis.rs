//! Reference oracles and experiment drivers built on top of the two beamformers.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::conventional::{beamform_conventional, ElementPattern};
use crate::error::{Error, Result};
use crate::geometry::{source_from_az_range, ArrayGeometry, Placement, Scene};
use crate::kspace::{
    beamform_complex, envelope_at, local_maxima, parabolic_vertex, run_pipeline, u_to_azimuth, PipelineConfig,
    PipelineRun, TimeGrid, TimeOrigin, DEFAULT_GRID_POINTS,
};
use crate::propagation::{source_phasor, ElementPhasor, NoiseModel, PhaseReference, PhaseSign, PropagationSettings};
use crate::waveform::CombSpec;
use crate::SPEED_OF_LIGHT;

/// Plain per-tone evaluation of `|Σ a_n e^{j2πν_n t}|`, kept separate from
/// the beamformer's own evaluation path.
fn direct_envelope(phasors: &[ElementPhasor], t: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for p in phasors {
        let arg = TAU * p.baseband_hz * t + p.value.arg();
        let a = p.value.norm();
        re += a * arg.cos();
        im += a * arg.sin();
    }
    re.hypot(im)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Exhaustive envelope scan over one comb period on `4096·oversample`
/// points, refined by golden-section search. Returns `(time, magnitude)`
/// with the time reported on the same clock as the beamformer output.
pub fn brute_force_peak(
    phasors: &[ElementPhasor],
    comb: &CombSpec,
    time_offset: f64,
    oversample: usize,
) -> Result<(f64, f64)> {
    if oversample == 0 {
        return Err(Error::InvalidParameter("oversample must be >= 1".into()));
    }
    if phasors.is_empty() {
        return Err(Error::Empty("no element phasors".into()));
    }
    let period = comb.period();
    let points = DEFAULT_GRID_POINTS * oversample;
    let step = period / points as f64;
    let env = |t: f64| direct_envelope(phasors, t - time_offset);
    let best = (0..points)
        .into_par_iter()
        .map(|k| (k, env(k as f64 * step)))
        .reduce(|| (0, f64::MIN), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let centre = best.0 as f64 * step;
    let t = golden_max(env, centre - step, centre + step, period * 1e-13);
    Ok((t.rem_euclid(period), env(t)))
}

/// Level of the first sidelobe relative to the main peak, dB, measured by
/// walking out of the mainlobe along the sampled (periodic) envelope.
pub fn first_sidelobe_db(envelope: &[f64]) -> Result<f64> {
    let len = envelope.len();
    let peak =
        local_maxima(envelope, true)?.first().copied().ok_or_else(|| Error::Empty("envelope has no peak".into()))?;
    let at = |k: usize| envelope[k % len];
    let mut k = peak.index;
    while at(k + 1) < at(k) {
        k += 1;
        if k - peak.index > len {
            return Err(Error::NoIsolatedPeak);
        }
    }
    while at(k + 1) >= at(k) {
        k += 1;
        if k - peak.index > len {
            return Err(Error::NoIsolatedPeak);
        }
    }
    let (_, lobe) = parabolic_vertex(at(k + len - 1), at(k), at(k + 1));
    Ok(20.0 * (lobe / peak.magnitude).log10())
}

/// −3 dB width of the envelope lobe around `peak_time`, in seconds.
pub fn half_power_width(phasors: &[ElementPhasor], peak_time: f64, time_offset: f64, period: f64) -> f64 {
    let env = |t: f64| envelope_at(phasors, t, time_offset);
    let level = env(peak_time) * std::f64::consts::FRAC_1_SQRT_2;
    let step = period / 8192.0;
    let edge = |dir: f64| {
        let mut inner = peak_time;
        let mut outer = peak_time + dir * step;
        let mut walked = 0.0;
        while env(outer) > level && walked < 0.5 * period {
            inner = outer;
            outer += dir * step;
            walked += step;
        }
        for _ in 0..60 {
            let mid = 0.5 * (inner + outer);
            if env(mid) > level {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        0.5 * (inner + outer)
    };
    edge(1.0) - edge(-1.0)
}

/// Width of a run's strongest peak in `u`.
fn run_width_u(run: &PipelineRun, comb: &CombSpec, cfg: &PipelineConfig) -> Option<f64> {
    let peak = run.output.peaks.first()?;
    let cal = &run.output.calibration;
    let dt = half_power_width(&run.phasors, peak.time, cfg.time_origin.offset(comb), comb.period());
    Some(dt * cal.delta_f * cal.u_per_cycle)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodPair {
    pub truth_deg: f64,
    pub kspace_deg: f64,
    pub conventional_deg: f64,
    pub difference_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub pairs: Vec<MethodPair>,
    pub kspace_peaks: usize,
    pub conventional_peaks: usize,
}

impl MethodComparison {
    pub fn count_mismatch(&self) -> bool {
        self.kspace_peaks != self.conventional_peaks
    }
}

/// Narrowband baseband snapshot at `freq`. Phases are taken as
/// `exp(+j2π·path/λ)` so a source in direction `u` matches the steering
/// weights `exp(−jk·x·u)`.
pub fn narrowband_snapshot(scene: &Scene, geom: &ArrayGeometry, freq: f64) -> Result<Vec<Complex64>> {
    scene.validate()?;
    let settings =
        PropagationSettings { sign: PhaseSign::Advance, reference: PhaseReference::Arrival, path_loss: false };
    geom.element_positions()
        .iter()
        .map(|pos| {
            scene.sources.iter().map(|s| source_phasor(s, pos, freq, scene.model, &settings)).sum::<Result<Complex64>>()
        })
        .collect()
}

/// Peaks of the conventional beam over `u ∈ [−1, 1]`, as azimuths.
pub fn conventional_azimuths(
    scene: &Scene,
    geom: &ArrayGeometry,
    freq: f64,
    threshold_fraction: f64,
    min_separation_u: f64,
) -> Result<Vec<(f64, f64)>> {
    let snapshot = narrowband_snapshot(scene, geom, freq)?;
    let lambda = SPEED_OF_LIGHT / freq;
    let points = 8001;
    let step = 2.0 / (points - 1) as f64;
    let dirs: Vec<(f64, f64)> = (0..points).map(|k| (-1.0 + k as f64 * step, 0.0)).collect();
    let beam = beamform_conventional(&snapshot, geom, lambda, ElementPattern::Isotropic, &dirs)?;
    let raw = match local_maxima(&beam, false) {
        Ok(r) => r,
        Err(Error::NoIsolatedPeak) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let Some(global) = raw.first().map(|p| p.magnitude) else {
        return Ok(Vec::new());
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut us: Vec<f64> = Vec::new();
    for p in raw.iter().take_while(|p| p.magnitude >= threshold_fraction * global) {
        let u = (-1.0 + p.position * step).clamp(-1.0, 1.0);
        if us.iter().all(|q| (q - u).abs() >= min_separation_u) {
            us.push(u);
            out.push((u_to_azimuth(u)?, p.magnitude));
        }
    }
    Ok(out)
}

/// Runs both beamformers on the same scene and pairs their peaks by
/// nearest azimuth. The conventional path works at the comb's centre
/// frequency.
pub fn compare_methods(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<MethodComparison> {
    scene.validate()?;
    let run = run_pipeline(scene, geom, comb, cfg)?;
    let kspace: Vec<f64> = run.output.peaks.iter().map(|p| p.azimuth_deg).collect();
    let conventional =
        conventional_azimuths(scene, geom, comb.center_frequency(), cfg.threshold_fraction, cfg.min_separation(comb))?;
    let mut pairs = Vec::new();
    for source in &scene.sources {
        let truth = source.azimuth_deg();
        let nearest =
            |list: &mut dyn Iterator<Item = f64>| list.min_by(|a, b| (a - truth).abs().total_cmp(&(b - truth).abs()));
        let (Some(k), Some(c)) = (nearest(&mut kspace.iter().copied()), nearest(&mut conventional.iter().map(|x| x.0)))
        else {
            continue;
        };
        pairs.push(MethodPair { truth_deg: truth, kspace_deg: k, conventional_deg: c, difference_deg: (k - c).abs() });
    }
    Ok(MethodComparison { pairs, kspace_peaks: kspace.len(), conventional_peaks: conventional.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Range,
    NumTones,
    DeltaF,
    Spacing,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Range => "range_m",
            SweepParameter::NumTones => "num_tones",
            SweepParameter::DeltaF => "delta_f_hz",
            SweepParameter::Spacing => "dx_m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Estimated minus true azimuth of the nearest peak, degrees; NaN if nothing was found.
    pub az_error_deg: f64,
    pub peak_magnitude: f64,
    pub width_u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

fn sweep_point(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
    value: f64,
) -> Result<SweepRow> {
    let truth = scene.sources[0].azimuth_deg();
    let run = run_pipeline(scene, geom, comb, cfg)?;
    let nearest =
        run.output.peaks.iter().min_by(|a, b| (a.azimuth_deg - truth).abs().total_cmp(&(b.azimuth_deg - truth).abs()));
    Ok(match nearest {
        Some(p) => SweepRow {
            value,
            az_error_deg: p.azimuth_deg - truth,
            peak_magnitude: p.magnitude,
            width_u: run_width_u(&run, comb, cfg).unwrap_or(f64::NAN),
        },
        None => SweepRow { value, az_error_deg: f64::NAN, peak_magnitude: 0.0, width_u: f64::NAN },
    })
}

/// Re-runs the k-space chain once per value of a single parameter. The
/// first source of `scene` is the reference for the angle error.
pub fn parameter_sweep(
    parameter: SweepParameter,
    values: &[f64],
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Empty("sweep has no values".into()));
    }
    scene.validate()?;
    let rows = values
        .iter()
        .map(|&value| {
            let (mut scene, mut geom, mut comb) = (scene.clone(), geom.clone(), *comb);
            match parameter {
                SweepParameter::Range => {
                    let az = scene.sources[0].azimuth_deg();
                    let base = scene.sources[0];
                    let moved = source_from_az_range(az, value)?;
                    scene.sources[0] = crate::geometry::Source { placement: moved.placement, ..base };
                }
                SweepParameter::NumTones => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "num_tones must be a positive integer, got {value}"
                        )));
                    }
                    comb.num_tones = value as usize;
                    geom.m = value as usize;
                }
                SweepParameter::DeltaF => {
                    comb.delta_f = value;
                    comb.duration = 1.0 / value;
                }
                SweepParameter::Spacing => geom.dx = value,
            }
            geom.validate()?;
            comb.validate()?;
            sweep_point(&scene, &geom, &comb, cfg, value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { parameter, rows })
}

/// Angle error of a single point source at `az_deg` as a function of range.
pub fn nearfield_error_sweep(
    az_deg: f64,
    ranges: &[f64],
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<SweepResult> {
    if let Some(r) = ranges.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::InvalidParameter(format!("ranges must be > 0, got {r}")));
    }
    let scene = Scene::single(source_from_az_range(az_deg, ranges.first().copied().unwrap_or(1.0))?)?;
    parameter_sweep(SweepParameter::Range, ranges, &scene, geom, comb, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrReport {
    pub gain_db: f64,
    /// Per-trial linear gains.
    pub trial_gains: Vec<f64>,
    pub input_snr: f64,
    pub peak_power: f64,
}

/// Monte-Carlo estimate of the beamformer's SNR gain.
///
/// The output SNR of a trial is the noiseless peak power over the noise
/// floor, where the floor is the median residual power `|y_noisy − y_clean|²`
/// away from the peaks (±2 resolution cells excluded) divided by `ln 2`,
/// the median-to-mean ratio of an exponential variate. The input SNR is the
/// mean element power over `σ²`. Trials use seeds derived from `seed`, so the
/// result does not depend on thread scheduling.
pub fn snr_gain(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<SnrReport> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if trials < 10 {
        return Err(Error::InvalidParameter(format!("need at least 10 trials, got {trials}")));
    }
    let (_, phasors) = crate::kspace::element_phasors(scene, geom, comb, cfg)?;
    let grid = TimeGrid::over(comb.period(), cfg.grid_points)?;
    let offset = cfg.time_origin.offset(comb);
    let clean = beamform_complex(&phasors, &grid, offset, None)?;
    let power: Vec<f64> = clean.iter().map(|y| y.norm_sqr()).collect();
    let peak_power = power.iter().copied().fold(0.0, f64::max);
    if peak_power <= 0.0 {
        return Err(Error::InvalidParameter("scene produces no signal".into()));
    }

    let envelope: Vec<f64> = power.iter().map(|p| p.sqrt()).collect();
    let mut keep = vec![true; grid.len];
    let cell = (grid.len as f64 / phasors.len() as f64).ceil() as isize;
    match local_maxima(&envelope, true) {
        Ok(peaks) => {
            let global = peaks.first().map_or(0.0, |p| p.magnitude);
            for p in peaks.iter().take_while(|p| p.magnitude >= cfg.threshold_fraction * global) {
                for d in -2 * cell..=2 * cell {
                    keep[(p.index as isize + d).rem_euclid(grid.len as isize) as usize] = false;
                }
            }
        }
        // a single element has no peak to exclude
        Err(Error::NoIsolatedPeak) => {}
        Err(e) => return Err(e),
    }

    let element_power = phasors.iter().map(|p| p.value.norm_sqr()).sum::<f64>() / phasors.len() as f64;
    let input_snr = element_power / (sigma * sigma);
    let base = NoiseModel::new(sigma, seed)?;
    let trial_gains = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let noise = base.derive(trial);
            let noisy = beamform_complex(&phasors, &grid, offset, Some(&noise))?;
            let mut residual: Vec<f64> = noisy
                .iter()
                .zip(&clean)
                .zip(&keep)
                .filter(|(_, k)| **k)
                .map(|((y, s), _)| (y - s).norm_sqr())
                .collect();
            residual.sort_by(f64::total_cmp);
            let median = residual[residual.len() / 2];
            let floor = median / std::f64::consts::LN_2;
            Ok(peak_power / floor / input_snr)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = trial_gains.iter().sum::<f64>() / trial_gains.len() as f64;
    Ok(SnrReport { gain_db: 10.0 * mean.log10(), trial_gains, input_snr, peak_power })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionCandidate {
    pub sign: PhaseSign,
    pub time_origin: TimeOrigin,
    pub reference: PhaseReference,
    pub peak_time: f64,
    pub peak_magnitude: f64,
}

/// Brute-force peak time of a scene under every combination of phase sign,
/// time origin and phase reference.
pub fn peak_time_conventions(
    scene: &Scene,
    geom: &ArrayGeometry,
    comb: &CombSpec,
    cfg: &PipelineConfig,
) -> Result<Vec<ConventionCandidate>> {
    let mut out = Vec::new();
    for sign in [PhaseSign::Delay, PhaseSign::Advance] {
        for time_origin in [TimeOrigin::Aligned, TimeOrigin::Centered] {
            for reference in [PhaseReference::Arrival, PhaseReference::Absolute] {
                let mut c = cfg.clone();
                c.propagation.sign = sign;
                c.propagation.reference = reference;
                c.time_origin = time_origin;
                let (_, phasors) = crate::kspace::element_phasors(scene, geom, comb, &c)?;
                let (t, mag) = brute_force_peak(&phasors, comb, time_origin.offset(comb), 4)?;
                out.push(ConventionCandidate { sign, time_origin, reference, peak_time: t, peak_magnitude: mag });
            }
        }
    }
    Ok(out)
}

/// True azimuth of every source in a scene, degrees.
pub fn true_azimuths(scene: &Scene) -> Vec<f64> {
    scene.sources.iter().map(|s| s.azimuth_deg()).collect()
}

/// Range of a point source from the coordinate origin; infinite for far-field sources.
pub fn source_range(scene: &Scene, index: usize) -> f64 {
    match scene.sources[index].placement {
        Placement::Point(p) => p.norm(),
        Placement::FarField { .. } => f64::INFINITY,
    }
}
