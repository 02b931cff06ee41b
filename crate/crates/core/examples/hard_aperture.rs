// Hard-aperture eigenvalue loss against the closed-form diffraction estimate.

use vbg::lens::diffraction_loss;
use vbg::modesim::aperture_eigen_loss;
use vbg::optics::ModeIndex;

pub fn run_example() -> vbg::Result<()> {
    for c in [5.0, 7.5, 10.134, 12.0] {
        let exact = aperture_eigen_loss(c, 0, 0)?;
        let formula = diffraction_loss(ModeIndex::FUNDAMENTAL, c)?.value;
        println!(
            "c = {c:>6}: eigen {exact:.3e}, formula {formula:.3e}, ratio {:.3}",
            exact / formula
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> vbg::Result<()> {
    run_example()
}
