use std::fmt;
use std::path::{Path, PathBuf};

use combbeam::analysis::{parameter_sweep, snr_gain};
use combbeam::conventional::{curvature_profile, phase_map};
use combbeam::kspace::{calibrate_axis, probe_peak_time, run_pipeline};
use combbeam::{ArrayKind, Peak};

use crate::config::ScenarioConfig;
use crate::{write_tables, Cell, CliError, Table};

/// Direction cosines of the probes `calibrate` holds out from the fit.
pub const HELD_OUT_PROBES: [f64; 6] = [-0.9, -0.6, -0.2, 0.25, 0.7, 0.95];

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub peaks: Vec<Peak>,
    pub files: Vec<PathBuf>,
    pub snr_gain_db: Option<f64>,
}

fn phase_map_tables(cfg: &ScenarioConfig) -> Result<[Table; 2], CliError> {
    if cfg.sources.len() != 1 {
        return Err(CliError::Config(format!(
            "sources: phase maps take exactly one source, got {}",
            cfg.sources.len()
        )));
    }
    let geom = cfg.geometry()?;
    let comb = cfg.comb_spec()?;
    let source = cfg.scene()?.sources[0];
    let freq = cfg.sim.phase_map_hz.unwrap_or_else(|| comb.center_frequency());
    let map = phase_map(&geom, &source, freq)?;
    let residuals = curvature_profile(&geom, &source, freq)?;

    let mut phases = Table::new("phase_map.csv", &["m", "n", "x_m", "y_m", "phase_deg"]);
    let mut curvature = Table::new("curvature.csv", &["m", "n", "residual_cycles"]);
    for m in 0..geom.m {
        for n in 0..geom.n {
            let p = geom.element_position(m, n);
            let k = geom.element_index(m, n);
            phases.push(&[Cell::U(m), Cell::U(n), Cell::F(p.x), Cell::F(p.y), Cell::F(map.phase_deg[k])]);
            curvature.push(&[Cell::U(m), Cell::U(n), Cell::F(residuals[k])]);
        }
    }
    Ok([phases, curvature])
}

/// Runs the k-space chain and writes `envelope.csv`, `peaks.csv`,
/// `phasors.csv`, and optionally `rf.csv`, `snr.csv` and the phase-map tables.
pub fn cmd_simulate(cfg: &ScenarioConfig, out: &Path, seed: Option<u64>) -> Result<SimulateOutput, CliError> {
    let comb = cfg.comb_spec()?;
    let geom = cfg.geometry()?;
    let scene = cfg.scene()?;
    let pipeline = cfg.pipeline(seed)?;
    let run = run_pipeline(&scene, &geom, &comb, &pipeline)?;
    let o = &run.output;

    let mut envelope = Table::new("envelope.csv", &["t_s", "envelope", "u", "az_deg"]);
    for k in 0..o.times.len() {
        envelope.push(&[Cell::F(o.times[k]), Cell::F(o.envelope[k]), Cell::F(o.u[k]), Cell::F(o.azimuth_deg[k])]);
    }
    let mut peaks = Table::new("peaks.csv", &["t_s", "u", "az_deg", "magnitude"]);
    for p in &o.peaks {
        peaks.push(&[Cell::F(p.time), Cell::F(p.u), Cell::F(p.azimuth_deg), Cell::F(p.magnitude)]);
    }
    let mut phasors = Table::new("phasors.csv", &["element", "tone_hz", "phase_rad", "amplitude"]);
    for p in &run.phasors {
        phasors.push(&[Cell::U(p.element), Cell::F(p.tone_hz), Cell::F(p.angle()), Cell::F(p.amplitude())]);
    }
    let mut tables = vec![envelope, peaks, phasors];

    if let Some(rf) = &o.rf {
        let mut t = Table::new("rf.csv", &["t_s", "rf"]);
        for (time, x) in o.times.iter().zip(rf) {
            t.push(&[Cell::F(*time), Cell::F(*x)]);
        }
        tables.push(t);
    }

    let mut snr_gain_db = None;
    if let Some(noise) = cfg.sim.noise.as_ref().filter(|n| n.sigma > 0.0 && n.trials > 0) {
        let quiet = combbeam::PipelineConfig { noise: None, ..pipeline.clone() };
        let report = snr_gain(&scene, &geom, &comb, &quiet, noise.sigma, noise.trials, seed.unwrap_or(noise.seed))?;
        let mut t = Table::new("snr.csv", &["sigma", "trials", "gain_db"]);
        t.push(&[Cell::F(noise.sigma), Cell::U(noise.trials), Cell::F(report.gain_db)]);
        tables.push(t);
        snr_gain_db = Some(report.gain_db);
    }

    if cfg.output.emit_phase_map {
        tables.extend(phase_map_tables(cfg)?);
    }

    let files = write_tables(out, &tables)?;
    Ok(SimulateOutput { peaks: o.peaks.clone(), files, snr_gain_db })
}

/// Writes `phase_map.csv` and `curvature.csv` for a planar array.
pub fn cmd_phase_map(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if cfg.geometry()?.kind != ArrayKind::Planar {
        return Err(CliError::Config("array.kind: phase-map needs a planar array".into()));
    }
    write_tables(out, &phase_map_tables(cfg)?)
}

/// Writes `sweep.csv` with one row per swept value.
pub fn cmd_sweep(cfg: &ScenarioConfig, out: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep: missing [sweep] table".into()))?;
    let (parameter, values) = sweep.selected()?;
    let result =
        parameter_sweep(parameter, &values, &cfg.scene()?, &cfg.geometry()?, &cfg.comb_spec()?, &cfg.pipeline(seed)?)?;
    let mut t = Table::new("sweep.csv", &["value", "az_error_deg", "peak_mag", "width_u"]);
    for r in &result.rows {
        t.push(&[Cell::F(r.value), Cell::F(r.az_error_deg), Cell::F(r.peak_magnitude), Cell::F(r.width_u)]);
    }
    write_tables(out, &[t])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub slope_sign: f64,
    pub t0_s: f64,
    pub t0_cycles: f64,
    pub u_per_cycle: f64,
    /// `(probe u, recovered u − probe u)` for each held-out probe.
    pub residuals: Vec<(f64, f64)>,
}

impl CalibrationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1.abs()).fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("calibration.csv", &["probe_u", "residual_u"]);
        for (u, r) in &self.residuals {
            t.push(&[Cell::F(*u), Cell::F(*r)]);
        }
        t
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "slope_sign  {}", self.slope_sign)?;
        writeln!(f, "t0_s        {:?}", self.t0_s)?;
        writeln!(f, "t0_cycles   {:?}", self.t0_cycles)?;
        writeln!(f, "u_per_cycle {:?}", self.u_per_cycle)?;
        writeln!(f, "held-out probes:")?;
        for (u, r) in &self.residuals {
            writeln!(f, "  u = {u:+.3}  residual {r:+.3e}")?;
        }
        write!(f, "max |residual| {:.3e}", self.max_residual())
    }
}

/// Fits the time-to-u axis and checks it on probes not used by the fit.
pub fn cmd_calibrate(cfg: &ScenarioConfig, seed: Option<u64>) -> Result<CalibrationReport, CliError> {
    let comb = cfg.comb_spec()?;
    let geom = cfg.geometry()?;
    let pipeline = cfg.pipeline(seed)?;
    let cal = calibrate_axis(&geom, &comb, &pipeline)?;
    let residuals = HELD_OUT_PROBES
        .iter()
        .map(|&u| Ok((u, cal.time_to_u(probe_peak_time(u, &geom, &comb, &pipeline)?) - u)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CalibrationReport {
        slope_sign: cal.slope_sign,
        t0_s: cal.t0,
        t0_cycles: cal.t0_cycles(),
        u_per_cycle: cal.u_per_cycle,
        residuals,
    })
}
