// Two-way capacity per mode and integrated over a flat band.

use vbg::capacity::{band_capacity, q2, total_attenuation, ComponentSpectrum};

pub fn run_example() -> vbg::Result<()> {
    println!("q2(3.0103 dB) = {:.4}", q2(3.0103, 1.0)?);
    println!("q2(5e-5 dB/km, 1e4 km) = {:.4}", q2(5e-5, 1e4)?);
    println!("q2(0.2 dB/km, 100 km) = {:.4}", q2(0.2, 100.0)?);

    let grid: Vec<f64> = (0..=500).map(|i| (1200.0 + i as f64) * 1e-9).collect();
    let zero = ComponentSpectrum::constant(grid.clone(), 0.0);
    let spectrum = total_attenuation(
        &ComponentSpectrum::constant(grid, 5e-5),
        &zero,
        &zero.clone(),
    )?;
    for length in [100.0, 1000.0, 10000.0] {
        let r = band_capacity(&spectrum, length, 1.2e-6, 1.7e-6)?;
        println!("L = {length:>7} km: Q2 = {:.4e} qubits/s", r.q2_integrated);
    }
    if let Err(e) = q2(5e-5, 0.0) {
        println!("L = 0: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
