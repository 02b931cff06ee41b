// Attenuation spectra for the lens-radius and gas-pressure sweeps, written
// through the run configuration.

use vbg::orchestrator::{attenuation_sweep, BandConfig, GridConfig, LineListSource, RunConfig};

pub fn run_example() -> vbg::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| vbg::VbgError::Io {
        path: "tempdir".into(),
        message: e.to_string(),
    })?;
    let base = RunConfig {
        grid: GridConfig::parse("1300:1700:81")?,
        band: BandConfig {
            min_nm: 1300.0,
            max_nm: 1700.0,
        },
        output_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };

    for radius in [0.08, 0.10, 0.20] {
        let mut c = base.clone();
        c.geometry.lens_radius_m = radius;
        let (s, _) = attenuation_sweep(&c)?;
        println!(
            "R = {radius} m: alpha_lens at 1550 nm = {:.3e} dB/km",
            s.alpha_lens[50]
        );
    }
    for pressure in [0.01, 1.0, 100.0] {
        let mut c = base.clone();
        c.gas.pressure_pa = pressure;
        c.gas.line_list = LineListSource::Sample;
        let (s, _) = attenuation_sweep(&c)?;
        let peak = s.alpha_gas.iter().cloned().fold(0.0, f64::max);
        println!("P = {pressure} Pa: peak alpha_gas = {peak:.3e} dB/km");
    }
    let (_, out) = attenuation_sweep(&base)?;
    let text = std::fs::read_to_string(&out.files[0]).unwrap();
    for line in text.lines().take(3) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
