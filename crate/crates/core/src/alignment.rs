//! Analytic misalignment loss per section and the resulting attenuation bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VbgError};
use crate::optics::{per_section_loss_to_attenuation, EquivalentResonator, GuideGeometry};

/// How transverse lens offsets are referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReferenceModel {
    /// Each lens fluctuates about its ideal position on the straight line
    /// joining the guide end points.
    GeodesicReference,
    /// Each lens is placed relative to the previous one; the mode is tracked
    /// in the frame attached to each lens.
    ChainedReference,
}

/// Per-lens perturbation magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentSpec {
    /// Transverse displacement along one axis, m.
    pub sigma_s_m: f64,
    /// Longitudinal displacement, m.
    pub sigma_l0_m: f64,
    /// Focal length deviation, m.
    pub sigma_f_m: f64,
    pub reference_model: ReferenceModel,
    /// Displace lenses along both transverse axes instead of one.
    #[serde(default)]
    pub isotropic: bool,
}

impl MisalignmentSpec {
    pub fn aligned() -> Self {
        Self {
            sigma_s_m: 0.0,
            sigma_l0_m: 0.0,
            sigma_f_m: 0.0,
            reference_model: ReferenceModel::GeodesicReference,
            isotropic: false,
        }
    }

    /// Transverse `sigma_s`, with 0.1 % relative spacing and focal errors.
    pub fn with_relative_errors(
        sigma_s_m: f64,
        geom: &GuideGeometry,
        model: ReferenceModel,
    ) -> Self {
        Self {
            sigma_s_m,
            sigma_l0_m: 1e-3 * geom.lens_spacing_m,
            sigma_f_m: 1e-3 * geom.focal_length_m,
            reference_model: model,
            isotropic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_s_m", self.sigma_s_m),
            ("sigma_L0_m", self.sigma_l0_m),
            ("sigma_f_m", self.sigma_f_m),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(VbgError::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentLossBreakdown {
    pub l_s: f64,
    pub l_f: f64,
    pub l_l0: f64,
    pub l_align: f64,
    pub alpha_align_db_per_km: f64,
    /// Some single term exceeds 1e-2, where summing first-order terms is doubtful.
    pub validity_warning: bool,
}

/// Fundamental-mode loss from a longitudinal lens shift, unexpanded form
/// `(s^2/L0^2) / (F^2 + s^2/L0^2)`.
pub fn loss_longitudinal(sigma_l0_m: f64, lens_spacing_m: f64, magnification_f: f64) -> f64 {
    let rel = sigma_l0_m / lens_spacing_m;
    let rel2 = rel * rel;
    rel2 / (magnification_f * magnification_f + rel2)
}

/// Leading-order longitudinal loss `s^2 / (L0^2 F^2)`.
pub fn loss_longitudinal_first_order(
    sigma_l0_m: f64,
    lens_spacing_m: f64,
    magnification_f: f64,
) -> f64 {
    let rel = sigma_l0_m / (lens_spacing_m * magnification_f);
    rel * rel
}

/// Loss from a focal length error: `(sigma_f/f)^2 / F^2`.
pub fn loss_focal(sigma_f_m: f64, focal_length_m: f64, magnification_f: f64) -> f64 {
    let rel = sigma_f_m / (focal_length_m * magnification_f);
    rel * rel
}

/// Loss from a transverse offset along one axis.
pub fn loss_transverse(
    sigma_s_m: f64,
    wavelength_m: f64,
    f_eq_m: f64,
    magnification_f: f64,
    model: ReferenceModel,
) -> f64 {
    let base = 2.0 * PI * sigma_s_m * sigma_s_m / (wavelength_m * f_eq_m);
    match model {
        ReferenceModel::GeodesicReference => 2.0 / (magnification_f * magnification_f + 1.0) * base,
        ReferenceModel::ChainedReference => 0.5 * base,
    }
}

/// Upper bound on the per-section misalignment loss and its attenuation
/// rate. The longitudinal term uses the leading-order form, so in the
/// confocal geodesic case this reduces to
/// `-10/L0 log10(1 - 2 s^2/w0^2 - sL^2/L0^2 - sf^2/f^2)`.
pub fn alignment_attenuation_bound(
    spec: &MisalignmentSpec,
    geom: &GuideGeometry,
    res: &EquivalentResonator,
) -> Result<AlignmentLossBreakdown> {
    spec.validate()?;
    let big_f = res.magnification_f;
    let axes = if spec.isotropic { 2.0 } else { 1.0 };
    let l_s = axes
        * loss_transverse(
            spec.sigma_s_m,
            res.wavelength_m,
            res.f_eq_m,
            big_f,
            spec.reference_model,
        );
    let l_f = loss_focal(spec.sigma_f_m, geom.focal_length_m, big_f);
    let l_l0 = loss_longitudinal_first_order(spec.sigma_l0_m, geom.lens_spacing_m, big_f);
    let l_align = l_s + l_f + l_l0;
    let remaining = 1.0 - l_align;
    if remaining <= 0.0 {
        return Err(VbgError::BoundViolation { remaining });
    }
    let validity_warning = [l_s, l_f, l_l0].iter().any(|&l| l > 1e-2);
    if validity_warning {
        log::warn!("misalignment term above 1e-2 (l_s = {l_s}, l_f = {l_f}, l_L0 = {l_l0}); bound is first-order only");
    }
    Ok(AlignmentLossBreakdown {
        l_s,
        l_f,
        l_l0,
        l_align,
        alpha_align_db_per_km: per_section_loss_to_attenuation(l_align, geom.lens_spacing_m)?,
        validity_warning,
    })
}
