// Small misalignment Monte Carlo compared with the analytic per-section loss.

use vbg::alignment::{MisalignmentSpec, ReferenceModel};
use vbg::modesim::{monte_carlo_run, SimulationOptions};
use vbg::optics::GuideGeometry;

pub fn run_example() -> vbg::Result<()> {
    let geom = GuideGeometry::reference_design();
    for model in [
        ReferenceModel::GeodesicReference,
        ReferenceModel::ChainedReference,
    ] {
        let mut spec = MisalignmentSpec::aligned();
        spec.sigma_s_m = 1e-4;
        spec.reference_model = model;
        let r = monte_carlo_run(&geom, &spec, &SimulationOptions::new(8, 40, 2024))?;
        println!(
            "{model:?}: mean loss/section {:.3e} +- {:.1e}, analytic {:.3e}, bound holds: {}",
            r.mean_fundamental_loss_per_section,
            r.std_error,
            r.analytic_bound_per_section,
            r.bound_holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
