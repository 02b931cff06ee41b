// Diffraction loss against lens radius and the per-lens loss budget.

use vbg::lens::{diffraction_loss, lens_attenuation, LensLossSpec, LossEntries};
use vbg::optics::{equivalent_resonator, GuideGeometry, ModeIndex};

pub fn run_example() -> vbg::Result<()> {
    for radius in [0.08, 0.10, 0.20] {
        let geom = GuideGeometry::new(4000.0, 2000.0, radius, 2500)?;
        let res = equivalent_resonator(&geom, 1550e-9)?;
        let (budget, alpha) = lens_attenuation(
            &geom,
            &res,
            &LensLossSpec::Constant(LossEntries::ZERO),
            1550e-9,
        )?;
        println!(
            "R = {:>4.0} cm: c_eq = {:>6.3}, l_d00 = {:.3e}, alpha_lens (diffraction only) = {:.3e} dB/km",
            radius * 100.0,
            res.fresnel_c_eq,
            budget.diffraction,
            alpha
        );
    }

    println!("higher modes at c = 10.134:");
    for mode in ModeIndex::up_to_order(2) {
        println!(
            "  {:?}: {:.3e}",
            mode,
            diffraction_loss(mode, 10.134)?.value
        );
    }

    let geom = GuideGeometry::reference_design();
    let res = equivalent_resonator(&geom, 1550e-9)?;
    let (budget, alpha) =
        lens_attenuation(&geom, &res, &LensLossSpec::reference_maxima(), 1550e-9)?;
    println!("table defaults: {budget:?}");
    println!("  alpha_lens = {alpha:.4e} dB/km");
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
