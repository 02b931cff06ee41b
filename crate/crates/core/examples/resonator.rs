// Equivalent confocal resonator of a confocal and a non-confocal guide.

use vbg::optics::{equivalent_resonator, GuideGeometry};

pub fn run_example() -> vbg::Result<()> {
    let confocal = GuideGeometry::reference_design();
    let stretched = GuideGeometry::new(4000.0, 2600.0, 0.1, 2500)?;
    for geom in [confocal, stretched] {
        let res = equivalent_resonator(&geom, 1550e-9)?;
        println!(
            "L0 = {} m, f = {} m: f_eq = {:.2} m, F = {:.4}, c = {:.3}, c_eq = {:.3}, w0 = {:.2} mm",
            geom.lens_spacing_m,
            geom.focal_length_m,
            res.f_eq_m,
            res.magnification_f,
            res.fresnel_c,
            res.fresnel_c_eq,
            res.waist_w0_m * 1e3
        );
    }
    // f < L0/4 puts the guide outside the stability region
    let unstable = GuideGeometry::new(4000.0, 900.0, 0.1, 10)?;
    match equivalent_resonator(&unstable, 1550e-9) {
        Err(e) => println!("f = 900 m: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
