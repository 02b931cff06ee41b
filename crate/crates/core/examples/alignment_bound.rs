// Analytic misalignment loss and attenuation bound for several transverse tolerances.

use vbg::alignment::{alignment_attenuation_bound, MisalignmentSpec, ReferenceModel};
use vbg::optics::{equivalent_resonator, GuideGeometry};

pub fn run_example() -> vbg::Result<()> {
    let geom = GuideGeometry::reference_design();
    let res = equivalent_resonator(&geom, 1550e-9)?;
    for sigma_mm in [0.06, 0.1, 0.2, 0.6] {
        for model in [
            ReferenceModel::GeodesicReference,
            ReferenceModel::ChainedReference,
        ] {
            let spec = MisalignmentSpec::with_relative_errors(sigma_mm * 1e-3, &geom, model);
            let b = alignment_attenuation_bound(&spec, &geom, &res)?;
            println!(
                "sigma_s = {sigma_mm} mm {model:?}: l_s = {:.3e}, l_f = {:.1e}, l_L0 = {:.1e}, alpha_align = {:.3e} dB/km",
                b.l_s, b.l_f, b.l_l0, b.alpha_align_db_per_km
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
