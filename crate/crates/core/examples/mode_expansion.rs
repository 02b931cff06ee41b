// Laguerre-Gauss decomposition of a displaced beam and of a beam behind a
// decentred lens.

use num_complex::Complex64;
use vbg::modesim::{
    apply_lens, decompose, lens_plane_grid, ModeExpansion, QuadratureSettings, ThinLens,
};
use vbg::optics::{equivalent_resonator, mode_field, GuideGeometry, ModeIndex};

pub fn run_example() -> vbg::Result<()> {
    let geom = GuideGeometry::reference_design();
    let res = equivalent_resonator(&geom, 1550e-9)?;
    let settings = QuadratureSettings::for_truncation(6);

    let d = 0.3 * res.waist_w0_m;
    let grid = lens_plane_grid(&res, 0.0, [0.0, 0.0], None, &settings);
    let field: Vec<Complex64> = grid
        .points
        .iter()
        .map(|&(x, y, _)| {
            let (dx, dy) = (x - d, y);
            mode_field(
                &res,
                ModeIndex::FUNDAMENTAL,
                dx.hypot(dy),
                dy.atan2(dx),
                0.0,
            )
        })
        .collect();
    let exp = decompose(&field, &grid, &res, 0.0, 6)?;
    println!(
        "waist shifted by 0.3 w0: |c00|^2 = {:.6}, expected exp(-d^2/w0^2) = {:.6}",
        exp.fundamental_power(),
        (-(d / res.waist_w0_m).powi(2)).exp()
    );

    let beam = ModeExpansion::fundamental(&res, 6, res.f0_m);
    let lens = ThinLens {
        focal_length_m: geom.focal_length_m,
        center: [1e-4, 0.0],
        aperture_m: None,
    };
    let out = apply_lens(&beam, &lens, false, &settings)?.expansion;
    for mode in [
        ModeIndex::FUNDAMENTAL,
        ModeIndex::new(0, 1),
        ModeIndex::new(0, -1),
    ] {
        println!(
            "lens offset 0.1 mm: |c{mode:?}|^2 = {:.3e}",
            out.coefficient(mode).unwrap().norm_sqr()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
