use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx::assert_relative_eq;
use vbg::capacity::q2;
use vbg::gas::SPEED_OF_LIGHT;
use vbg::orchestrator::{
    attenuation_sweep, capacity_report, minimize_on_grid, optimize_wavelength, simulate,
    LensLossConfig, LineListSource, RunConfig,
};
use vbg::VbgError;

fn vbg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbg"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, config: &RunConfig) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, config.to_json()).unwrap();
    path
}

fn in_dir(dir: &Path) -> RunConfig {
    RunConfig {
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash = lines
        .next()
        .unwrap()
        .trim_start_matches("# config_hash=")
        .to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (hash, header, rows)
}

/// Lens loss per lens giving `alpha` dB/km on a 4 km section.
fn ppm_for(alpha: f64) -> f64 {
    -(-0.1 * alpha * 4.0 * std::f64::consts::LN_10).exp_m1() * 1e6
}

#[test]
fn default_sweep_has_zero_gas_and_expected_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let (s, out) = attenuation_sweep(&in_dir(dir.path())).unwrap();
    assert_eq!(s.len(), 2001);
    assert!(s.alpha_gas.iter().all(|&g| g == 0.0));
    let i1550 = 1400;
    assert_relative_eq!(s.wavelengths_m[i1550], 1550e-9, max_relative = 1e-12);
    assert_relative_eq!(s.alpha_align[i1550], 2.42e-5, max_relative = 0.01);
    for i in 0..s.len() {
        assert_eq!(
            s.alpha_tot[i],
            s.alpha_lens[i] + s.alpha_gas[i] + s.alpha_align[i]
        );
    }
    let (hash, header, rows) = read_csv(&out.files[0]);
    assert_eq!(
        header,
        [
            "wavelength_nm",
            "alpha_lens",
            "alpha_gas",
            "alpha_align",
            "alpha_tot"
        ]
    );
    assert_eq!(rows.len(), 2001);
    assert_eq!(rows[1400][0], 1550.0);
    assert_eq!(hash, in_dir(dir.path()).hash());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out.files[1]).unwrap()).unwrap();
    assert_eq!(meta["config_hash"], hash.as_str());
    assert_eq!(meta["crate_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn radius_sweep_lowers_lens_attenuation() {
    let dir = tempfile::tempdir().unwrap();
    let spectra: Vec<_> = [0.08, 0.10, 0.20]
        .iter()
        .map(|&r| {
            let mut c = in_dir(dir.path());
            c.grid.points = 201;
            c.geometry.lens_radius_m = r;
            attenuation_sweep(&c).unwrap().0
        })
        .collect();
    for i in 0..201 {
        assert!(spectra[0].alpha_lens[i] > spectra[1].alpha_lens[i]);
        assert!(spectra[1].alpha_lens[i] > spectra[2].alpha_lens[i]);
    }
}

#[test]
fn pressure_sweep_raises_gas_attenuation_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let spectra: Vec<_> = [0.01, 1.0, 100.0]
        .iter()
        .map(|&p| {
            let mut c = in_dir(dir.path());
            c.grid.points = 501;
            c.gas.pressure_pa = p;
            c.gas.line_list = LineListSource::Sample;
            attenuation_sweep(&c).unwrap().0
        })
        .collect();
    for i in 0..501 {
        assert!(spectra[0].alpha_gas[i] > 0.0);
        assert!(
            spectra[0].alpha_gas[i] < spectra[1].alpha_gas[i],
            "at {}",
            spectra[0].wavelengths_m[i]
        );
        assert!(
            spectra[1].alpha_gas[i] < spectra[2].alpha_gas[i],
            "at {}",
            spectra[0].wavelengths_m[i]
        );
    }
}

#[test]
fn zero_length_names_the_offender() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = in_dir(dir.path());
    c.lengths_km = vec![100.0, 0.0];
    match capacity_report(&c) {
        Err(VbgError::DivergentCapacity { context, .. }) => {
            assert!(context.contains("0 km"), "{context}")
        }
        other => panic!("{other:?}"),
    }
    let out = vbg(&[
        "capacity",
        "--out",
        dir.path().to_str().unwrap(),
        "--lengths",
        "100,0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 km"));
}

fn flat_config(dir: &Path, alpha: f64) -> RunConfig {
    let mut c = in_dir(dir);
    c.geometry.lens_radius_m = 1.0;
    c.lens_loss = LensLossConfig::Constant {
        absorption_ppm: 0.0,
        scattering_ppm: 0.0,
        reflection_ppm: ppm_for(alpha),
    };
    c.misalignment.sigma_s_mm = 0.0;
    c.misalignment.sigma_l0_rel = 0.0;
    c.misalignment.sigma_f_rel = 0.0;
    c
}

#[test]
fn flat_spectrum_capacity_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = flat_config(dir.path(), 5e-5);
    c.lengths_km = vec![100.0, 1000.0, 10000.0];
    let (results, out) = capacity_report(&c).unwrap();
    let closed = q2(5e-5, 1e4).unwrap() * (SPEED_OF_LIGHT / 1.2e-6 - SPEED_OF_LIGHT / 1.7e-6);
    assert_relative_eq!(results[2].q2_integrated, closed, max_relative = 1e-3);
    assert!(results[0].q2_integrated > results[1].q2_integrated);
    assert!(results[1].q2_integrated > results[2].q2_integrated);
    let (_, header, rows) = read_csv(&out.files[0]);
    assert_eq!(
        header,
        ["wavelength_nm", "q2_L100km", "q2_L1000km", "q2_L10000km"]
    );
    assert_relative_eq!(rows[0][3], 3.201, max_relative = 1e-3);
    let (_, header, rows) = read_csv(&out.files[1]);
    assert_eq!(header[1], "Q2_qubits_per_s");
    assert_eq!(rows.len(), 3);
}

#[test]
fn optimizer_finds_grid_argmin_in_both_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    // alignment only: alpha falls as 1/lambda, so the longest wavelength wins
    let mut align = flat_config(dir.path(), 0.0);
    align.lens_loss = LensLossConfig::Constant {
        absorption_ppm: 0.0,
        scattering_ppm: 0.0,
        reflection_ppm: 0.0,
    };
    align.misalignment.sigma_s_mm = 0.1;
    align.grid.points = 101;
    // diffraction only with a small lens: loss grows with lambda
    let mut diff = align.clone();
    diff.misalignment.sigma_s_mm = 0.0;
    diff.geometry.lens_radius_m = 0.08;
    for (config, expected_nm) in [(align, 1700.0), (diff, 1200.0)] {
        let (spectrum, _) = attenuation_sweep(&config).unwrap();
        let argmin = (0..spectrum.len())
            .min_by(|&a, &b| spectrum.alpha_tot[a].total_cmp(&spectrum.alpha_tot[b]))
            .unwrap();
        let (best, _) = optimize_wavelength(&config).unwrap();
        assert_relative_eq!(
            best.wavelength_nm,
            spectrum.wavelengths_m[argmin] * 1e9,
            max_relative = 1e-9
        );
        assert_relative_eq!(best.wavelength_nm, expected_nm, max_relative = 1e-9);
        assert!(best.alpha_min_db_per_km <= spectrum.alpha_tot[argmin]);
    }
}

#[test]
fn optimizer_avoids_a_notch_and_breaks_ties_left() {
    // absorption feature sitting on the background minimum pushes the optimum aside
    let notch =
        |x: f64| 1.0 + 0.01 * (x - 1450.0).abs() + 5.0 * (-((x - 1451.0) / 2.0).powi(2)).exp();
    let grid: Vec<f64> = (0..=100).map(|i| 1200.0 + 5.0 * i as f64).collect();
    let m = minimize_on_grid(&grid, |x| Ok(notch(x)), 1e-9).unwrap();
    let dense: Vec<f64> = (0..=500_000).map(|i| 1200.0 + 0.001 * i as f64).collect();
    let best = dense
        .iter()
        .cloned()
        .min_by(|a, b| notch(*a).total_cmp(&notch(*b)))
        .unwrap();
    assert!((m.x - best).abs() <= 0.001, "{} vs {best}", m.x);

    assert!((m.x - 1451.0).abs() > 3.0);

    let twin = |x: f64| ((x - 1300.0) * (x - 1600.0)).powi(2);
    let m = minimize_on_grid(&grid, |x| Ok(twin(x)), 1e-9).unwrap();
    assert_eq!(m.x, 1300.0);
}

#[test]
fn aligned_simulation_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = in_dir(dir.path());
    c.misalignment.sigma_s_mm = 0.0;
    c.misalignment.sigma_l0_rel = 0.0;
    c.misalignment.sigma_f_rel = 0.0;
    c.simulation.trials = 10;
    c.simulation.sections = 100;
    let path = write_config(dir.path(), &c);
    let out = vbg(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("simulate.json")).unwrap())
            .unwrap();
    assert!(
        report["mean_fundamental_loss_per_section"]
            .as_f64()
            .unwrap()
            <= 1e-9
    );
    assert_eq!(report["config_hash"], c.hash().as_str());
}

#[test]
fn default_simulation_reports_analytic_bound() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = in_dir(dir.path());
    c.simulation.trials = 4;
    c.simulation.sections = 20;
    let (report, _) = simulate(&c).unwrap();
    assert_relative_eq!(
        report.analytic_bound_per_section,
        2.227e-5,
        max_relative = 1e-3
    );
}

#[test]
fn clipping_aperture_violates_the_misalignment_bound() {
    // the misalignment bound ignores diffraction, so a tight hard aperture breaks it
    let dir = tempfile::tempdir().unwrap();
    let mut c = in_dir(dir.path());
    c.geometry.lens_radius_m = 0.08;
    c.simulation.trials = 3;
    c.simulation.sections = 10;
    c.simulation.truncation_n = 4;
    c.simulation.hard_aperture = true;
    let path = write_config(dir.path(), &c);
    let out = vbg(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("simulate.json").exists());
}

#[test]
fn invalid_config_exits_one_with_every_error_listed() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = in_dir(dir.path());
    c.geometry.focal_length_m = 500.0;
    c.gas.pressure_pa = -1.0;
    let path = write_config(dir.path(), &c);
    for sub in [
        "validate",
        "attenuation",
        "capacity",
        "optimize",
        "simulate",
    ] {
        let out = vbg(&[sub, "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{sub}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["errors"].as_array().unwrap().len(), 2);

    fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        vbg(&["validate", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let out = vbg(&[
        "attenuation",
        "--out",
        dir.path().to_str().unwrap(),
        "--grid",
        "1500:1400",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = vbg(&[
        "attenuation",
        "--out",
        dir.path().to_str().unwrap(),
        "--grid",
        "1600:1500:10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = vbg(&["attenuation", "--out", d, "--grid", "1500:1600:11"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, _, rows) = read_csv(&dir.path().join("attenuation.csv"));
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[10][0], 1600.0);

    // the default band no longer fits the narrowed grid
    let out = vbg(&[
        "capacity",
        "--out",
        d,
        "--grid",
        "1500:1600:11",
        "--lengths",
        "50,500",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = vbg(&[
        "capacity",
        "--out",
        d,
        "--grid",
        "1200:1700:101",
        "--lengths",
        "50,500",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, _, rows) = read_csv(&dir.path().join("capacity_Q2.csv"));
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [50.0, 500.0]);

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (o, seed) in [(&a, "1"), (&b, "2")] {
        let out = vbg(&["simulate", "--out", o.to_str().unwrap(), "--seed", seed]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_ne!(
        fs::read(a.join("simulate.json")).unwrap(),
        fs::read(b.join("simulate.json")).unwrap()
    );
}

#[test]
fn effective_config_round_trips_to_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir_all(&data).unwrap();
    fs::write(data.join("lines.csv"), vbg::gas::SAMPLE_LINE_LIST).unwrap();
    fs::write(
        data.join("fiber.csv"),
        "wavelength_nm,alpha_db_per_km\n1200,0.3\n1550,0.15\n1700,0.2\n",
    )
    .unwrap();
    let json = r#"{
        "gas": {"pressure_Pa": 1.0, "temperature_K": 296.0, "mixing_ratios": {"H2O": 0.01, "CO2": 0.0004},
                "line_list": {"file": "data/lines.csv"}},
        "grid": {"min_nm": 1400, "max_nm": 1650, "points": 251},
        "band": {"min_nm": 1450, "max_nm": 1600},
        "fiber_csv": "data/fiber.csv",
        "output_dir": "first"
    }"#;
    let path = dir.path().join("run.json");
    fs::write(&path, json).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(vbg(&["validate", "--config", p]).status.code(), Some(0));
    assert_eq!(vbg(&["attenuation", "--config", p]).status.code(), Some(0));
    let first = dir.path().join("first");
    let effective = first.join("effective_config.json");
    let second = dir.path().join("second");
    let out = vbg(&[
        "attenuation",
        "--config",
        effective.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let a = fs::read_to_string(first.join("attenuation.csv")).unwrap();
    let b = fs::read_to_string(second.join("attenuation.csv")).unwrap();
    assert_eq!(a, b);
    let (_, header, rows) = read_csv(&first.join("attenuation.csv"));
    assert_eq!(header.last().unwrap(), "alpha_fiber");
    assert_relative_eq!(rows[150][5], 0.15, max_relative = 1e-12);
    assert!(rows.iter().all(|r| r[2] > 0.0));
}

#[test]
fn every_output_carries_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let c = RunConfig {
        output_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let path = write_config(dir.path(), &c);
    let p = path.to_str().unwrap();
    for sub in ["validate", "attenuation", "capacity", "optimize"] {
        assert_eq!(vbg(&[sub, "--config", p]).status.code(), Some(0), "{sub}");
    }
    let hash = c.hash();
    for f in ["attenuation.csv", "capacity_q2.csv", "capacity_Q2.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            format!("# config_hash={hash}")
        );
    }
    for f in [
        "attenuation.json",
        "capacity.json",
        "optimize.json",
        "validation.json",
    ] {
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(f)).unwrap()).unwrap();
        assert_eq!(v["config_hash"], hash.as_str(), "{f}");
    }
}
