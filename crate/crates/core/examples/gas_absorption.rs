// Line-by-line residual-gas absorption over the bundled synthetic line list.

use vbg::gas::{number_density_cm3, GasModel};

pub fn run_example() -> vbg::Result<()> {
    let wavelengths: Vec<f64> = (0..6).map(|i| (1350.0 + 70.0 * i as f64) * 1e-9).collect();
    for pressure in [0.01, 1.0, 100.0] {
        let gas = GasModel::sample_air(pressure)?;
        let alpha = gas.attenuation_at_wavelengths(&wavelengths)?;
        let cells: Vec<String> = alpha.iter().map(|a| format!("{a:.2e}")).collect();
        println!(
            "P = {pressure:>6} Pa: alpha_gas [dB/km] = {}",
            cells.join(" ")
        );
    }

    // integrated absorbance of one line equals n x S
    let gas = GasModel::sample_air(1.0)?;
    let line = gas
        .lines
        .iter()
        .find(|l| l.species_id == "CO2")
        .unwrap()
        .clone();
    let single = GasModel::new(
        1.0,
        gas.temperature_k,
        gas.mixing_ratios.clone(),
        vec![line.clone()],
    )?;
    let (lo, hi, n) = (
        line.center_wavenumber - 0.5,
        line.center_wavenumber + 0.5,
        20001,
    );
    let h = (hi - lo) / (n - 1) as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * single.absorption_cm(lo + h * i as f64)
        })
        .sum::<f64>()
        * h;
    let expected =
        number_density_cm3(1.0, gas.temperature_k) * gas.mixing_ratios["CO2"] * line.intensity;
    println!(
        "CO2 line at {:.3} cm^-1: integral {:.5e}, n x S {:.5e}",
        line.center_wavenumber, integral, expected
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
