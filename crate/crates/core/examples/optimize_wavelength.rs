// Grid search with golden-section refinement, on a synthetic notch and on
// the default guide.

use vbg::orchestrator::{minimize_on_grid, optimize_wavelength, RunConfig};

pub fn run_example() -> vbg::Result<()> {
    let grid: Vec<f64> = (0..=100).map(|i| 1300.0 + 4.0 * i as f64).collect();
    // rising background with a narrow dip at 1493.3 nm
    let f = |x: f64| Ok(1e-4 + 1e-7 * (x - 1300.0) - 8e-5 * (-((x - 1493.3) / 3.0).powi(2)).exp());
    let m = minimize_on_grid(&grid, f, 1e-9)?;
    println!(
        "notch: grid {} nm -> refined {:.4} nm, value {:.4e}",
        m.grid_x, m.x, m.value
    );

    let dir = tempfile::tempdir().map_err(|e| vbg::VbgError::Io {
        path: "tempdir".into(),
        message: e.to_string(),
    })?;
    let config = RunConfig {
        output_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let (best, _) = optimize_wavelength(&config)?;
    println!(
        "default guide: lambda* = {:.3} nm, alpha_tot = {:.4e} dB/km",
        best.wavelength_nm, best.alpha_min_db_per_km
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
