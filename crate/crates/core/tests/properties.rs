use std::f64::consts::PI;

use combbeam::analysis::{
    brute_force_peak, compare_methods, nearfield_error_sweep, parameter_sweep, snr_gain, SweepParameter,
};
use combbeam::kspace::{beamform_envelope, run_pipeline, TimeGrid};
use combbeam::{
    ArrayGeometry, CombSpec, ElementPhasor, PipelineConfig, PropagationModel, Scene, Source, Vec3, SPEED_OF_LIGHT,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn reference_array() -> ArrayGeometry {
    ArrayGeometry::linear(21, SPEED_OF_LIGHT / 19.005e9 / 2.0).unwrap()
}

fn rf_comb() -> CombSpec {
    CombSpec::new(19.0008e9, 0.2e6, 21, 5e-6, 1.0).unwrap()
}

fn lo_19ghz() -> PipelineConfig {
    PipelineConfig { f_lo: Some(19e9), ..Default::default() }
}

fn plane_wave(u: f64) -> Scene {
    Scene::new(vec![Source::far_field(u, 0.0).unwrap()], PropagationModel::FarField).unwrap()
}

#[test]
fn envelope_equals_dirichlet_kernel() {
    let (n, df, d_over_lambda, u) = (21usize, 0.2e6, 0.5, 0.37);
    let phasors: Vec<ElementPhasor> = (1..=n)
        .map(|k| ElementPhasor {
            element: k - 1,
            tone: k,
            tone_hz: k as f64 * df,
            baseband_hz: k as f64 * df,
            value: Complex64::from_polar(1.0, -2.0 * PI * k as f64 * d_over_lambda * u + 0.3),
        })
        .collect();
    let grid = TimeGrid::over(1.0 / df, 4096).unwrap();
    let env = beamform_envelope(&phasors, &grid, 0.0, None).unwrap();
    for (k, e) in env.iter().enumerate() {
        let psi = df * grid.at(k) - d_over_lambda * u;
        let s = (PI * psi).sin();
        let kernel = if s.abs() < 1e-12 { 1.0 } else { ((n as f64 * PI * psi).sin() / (n as f64 * s)).abs() };
        assert!((e / n as f64 - kernel).abs() < 1e-9, "k = {k}: {} vs {kernel}", e / n as f64);
    }
}

#[test]
fn peaks_repeat_every_period() {
    let (geom, mut comb) = (reference_array(), rf_comb());
    comb.duration = 2.0 * comb.period();
    let cfg = PipelineConfig { grid_points: 8192, ..lo_19ghz() };
    let scene = Scene::single(Source::point(Vec3::new(-6.0, 0.0, 6.0))).unwrap();
    let run = run_pipeline(&scene, &geom, &comb, &cfg).unwrap();
    let env = &run.output.envelope;
    for k in 0..4096 {
        assert!((env[k] - env[k + 4096]).abs() < 1e-9 * env[k].max(1.0));
    }
    let peaks = &run.output.peaks;
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    let mut times: Vec<f64> = peaks.iter().map(|p| p.time).collect();
    times.sort_by(f64::total_cmp);
    assert!((times[1] - times[0] - comb.period()).abs() < 1e-12);
    assert!((peaks[0].magnitude - peaks[1].magnitude).abs() < 1e-9);
}

#[test]
fn doubling_tones_halves_peak_width() {
    let (geom, comb) = (reference_array(), rf_comb());
    let sweep =
        parameter_sweep(SweepParameter::NumTones, &[21.0, 42.0], &plane_wave(0.2), &geom, &comb, &lo_19ghz()).unwrap();
    let ratio = sweep.rows[0].width_u / sweep.rows[1].width_u;
    assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
}

#[test]
fn far_field_sources_recovered_exactly() {
    let (geom, comb) = (reference_array(), rf_comb());
    for u in [-0.9, -0.5, 0.0, 0.3, 0.7] {
        let run = run_pipeline(&plane_wave(u), &geom, &comb, &lo_19ghz()).unwrap();
        let truth = u.asin().to_degrees();
        let got = run.output.peaks[0].azimuth_deg;
        assert!((got - truth).abs() < 0.05, "u = {u}: {got} vs {truth}");
    }
}

#[test]
fn single_far_field_peak_reaches_amplitude_sum() {
    let (geom, comb) = (reference_array(), rf_comb());
    let run = run_pipeline(&plane_wave(0.0), &geom, &comb, &lo_19ghz()).unwrap();
    let (_, mag) = brute_force_peak(&run.phasors, &comb, 0.0, 4).unwrap();
    assert!((mag - 21.0).abs() < 1e-9, "{mag}");
    // off boresight each element sees its own tone's wavelength, so the
    // aperture phase carries a small quadratic term and the peak dips below N·A
    for u in [-0.6, 0.1, 0.45] {
        let run = run_pipeline(&plane_wave(u), &geom, &comb, &lo_19ghz()).unwrap();
        let (_, mag) = brute_force_peak(&run.phasors, &comb, 0.0, 4).unwrap();
        assert!(mag <= 21.0 + 1e-9 && mag > 21.0 * (1.0 - 1e-5), "{mag}");
    }
}

#[test]
fn methods_converge_in_far_field() {
    let (geom, comb) = (reference_array(), rf_comb());
    for step in -12..=12 {
        let az = 5.0 * step as f64;
        let cmp = compare_methods(&plane_wave(az.to_radians().sin()), &geom, &comb, &lo_19ghz()).unwrap();
        assert_eq!(cmp.pairs.len(), 1);
        assert!(cmp.pairs[0].difference_deg < 0.1, "{az}: {:?}", cmp.pairs[0]);
    }
}

#[test]
fn near_field_error_decays_as_range_doubles() {
    let (geom, comb) = (reference_array(), rf_comb());
    let ranges: Vec<f64> = (0..=10).map(|k| 2f64.powi(k)).collect();
    let sweep = nearfield_error_sweep(-45.0, &ranges, &geom, &comb, &lo_19ghz()).unwrap();
    let errors: Vec<f64> = sweep.rows.iter().map(|r| r.az_error_deg.abs()).collect();
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] + 0.05, "{errors:?}");
    }
    assert_eq!(sweep.values(), ranges);
}

#[test]
fn coherent_gain_of_reference_array() {
    let (geom, comb) = (reference_array(), rf_comb());
    let report = snr_gain(&plane_wave(0.3), &geom, &comb, &lo_19ghz(), 1.0, 100, 2024).unwrap();
    let expected = 10.0 * 21f64.log10();
    assert!((report.gain_db - expected).abs() < 1.5, "{}", report.gain_db);
    let again = snr_gain(&plane_wave(0.3), &geom, &comb, &lo_19ghz(), 1.0, 100, 2024).unwrap();
    assert_eq!(report, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plane_waves_recovered_within_a_twentieth_degree(u in -0.95f64..0.95) {
        let run = run_pipeline(&plane_wave(u), &reference_array(), &rf_comb(), &lo_19ghz()).unwrap();
        let truth = u.asin().to_degrees();
        prop_assert!((run.output.peaks[0].azimuth_deg - truth).abs() < 0.05);
    }
}
