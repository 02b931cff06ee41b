//! Gaussian and Laguerre-Gauss beam mathematics for a periodic lens guide.
//!
//! A guide of identical thin lenses spaced `L0` apart supports a periodic
//! Gaussian beam whose waist sits midway between lenses. Any stable
//! (non-confocal) guide maps onto a confocal one with an equivalent focal
//! length `f_eq`, which is the Rayleigh range of the guided beam.
//!
//! Coordinates are cylindrical `(r, phi, z)` with `z = 0` at the middle of a
//! section, so the lenses of a section sit at `z = -L0/2` and `z = +L0/2`.
//! The field convention is `exp(-i(kz + k r^2 / 2R(z)))`; a converging thin
//! lens therefore multiplies the field by `exp(+i k r^2 / 2f)`.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VbgError};

/// Physical layout of a vacuum beam guide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuideGeometry {
    pub lens_spacing_m: f64,
    pub focal_length_m: f64,
    pub lens_radius_m: f64,
    pub section_count: u64,
}

impl GuideGeometry {
    pub fn new(
        lens_spacing_m: f64,
        focal_length_m: f64,
        lens_radius_m: f64,
        section_count: u64,
    ) -> Result<Self> {
        let geom = Self {
            lens_spacing_m,
            focal_length_m,
            lens_radius_m,
            section_count,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Confocal guide (`f = L0 / 2`).
    pub fn confocal(lens_spacing_m: f64, lens_radius_m: f64, section_count: u64) -> Result<Self> {
        Self::new(
            lens_spacing_m,
            lens_spacing_m / 2.0,
            lens_radius_m,
            section_count,
        )
    }

    /// 4 km spacing, confocal, 10 cm lens radius, 2500 sections (10^4 km).
    pub fn reference_design() -> Self {
        Self {
            lens_spacing_m: 4000.0,
            focal_length_m: 2000.0,
            lens_radius_m: 0.1,
            section_count: 2500,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("lens_spacing_m", self.lens_spacing_m)?;
        positive("focal_length_m", self.focal_length_m)?;
        positive("lens_radius_m", self.lens_radius_m)?;
        if self.section_count == 0 {
            return Err(VbgError::invalid(
                "section_count",
                "must be a positive integer",
            ));
        }
        Ok(())
    }

    pub fn total_length_m(&self) -> f64 {
        self.lens_spacing_m * self.section_count as f64
    }

    pub fn total_length_km(&self) -> f64 {
        self.total_length_m() / 1000.0
    }

    /// `(1 - L0/(2f))^2`; the guide is stable when this is strictly below 1.
    pub fn stability_parameter(&self) -> f64 {
        let g = 1.0 - self.lens_spacing_m / (2.0 * self.focal_length_m);
        g * g
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(VbgError::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

/// Beam parameters of the confocal guide equivalent to a stable geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentResonator {
    pub wavelength_m: f64,
    /// `2 pi / lambda`, in 1/m.
    pub wavenumber: f64,
    pub lens_spacing_m: f64,
    pub focal_length_m: f64,
    pub lens_radius_m: f64,
    /// Half the lens spacing.
    pub f0_m: f64,
    /// Equivalent confocal focal length, equal to the Rayleigh range.
    pub f_eq_m: f64,
    /// `f_eq / f0`.
    pub magnification_f: f64,
    /// `k R^2 / L0`.
    pub fresnel_c: f64,
    /// `k R^2 / (f0 (1/F + F))`.
    pub fresnel_c_eq: f64,
    pub waist_w0_m: f64,
    pub stable: bool,
}

/// Maps a guide geometry onto its equivalent confocal resonator.
pub fn equivalent_resonator(
    geom: &GuideGeometry,
    wavelength_m: f64,
) -> Result<EquivalentResonator> {
    geom.validate()?;
    positive("wavelength_m", wavelength_m)?;
    let stability = geom.stability_parameter();
    if stability >= 1.0 {
        return Err(VbgError::UnstableGeometry {
            lens_spacing_m: geom.lens_spacing_m,
            focal_length_m: geom.focal_length_m,
            stability,
        });
    }
    let k = 2.0 * PI / wavelength_m;
    let f0 = geom.lens_spacing_m / 2.0;
    let f_eq = (f0 * (2.0 * geom.focal_length_m - f0)).sqrt();
    let big_f = f_eq / f0;
    let r2 = geom.lens_radius_m * geom.lens_radius_m;
    Ok(EquivalentResonator {
        wavelength_m,
        wavenumber: k,
        lens_spacing_m: geom.lens_spacing_m,
        focal_length_m: geom.focal_length_m,
        lens_radius_m: geom.lens_radius_m,
        f0_m: f0,
        f_eq_m: f_eq,
        magnification_f: big_f,
        fresnel_c: k * r2 / geom.lens_spacing_m,
        fresnel_c_eq: k * r2 / (f0 * (1.0 / big_f + big_f)),
        waist_w0_m: (2.0 * f_eq / k).sqrt(),
        stable: true,
    })
}

impl EquivalentResonator {
    /// Beam radius `w(z)`.
    pub fn beam_radius(&self, z: f64) -> f64 {
        let t = z / self.f_eq_m;
        self.waist_w0_m * (1.0 + t * t).sqrt()
    }

    /// `1/R(z) = z / (z^2 + f_eq^2)`, finite at the waist.
    pub fn inverse_curvature(&self, z: f64) -> f64 {
        z / (z * z + self.f_eq_m * self.f_eq_m)
    }

    /// Gouy angle `psi(z) = atan(z / f_eq)`.
    pub fn gouy_angle(&self, z: f64) -> f64 {
        (z / self.f_eq_m).atan()
    }

    pub fn plane(&self, z: f64) -> BeamPlane {
        BeamPlane {
            z,
            wavenumber: self.wavenumber,
            beam_radius: self.beam_radius(z),
            inverse_curvature: self.inverse_curvature(z),
            gouy_angle: self.gouy_angle(z),
        }
    }
}

/// Laguerre-Gauss mode label: radial order `n >= 0`, azimuthal index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub radial_n: u32,
    pub azimuthal_m: i32,
}

impl ModeIndex {
    pub const FUNDAMENTAL: ModeIndex = ModeIndex {
        radial_n: 0,
        azimuthal_m: 0,
    };

    pub const fn new(radial_n: u32, azimuthal_m: i32) -> Self {
        Self {
            radial_n,
            azimuthal_m,
        }
    }

    /// Mode order `2n + |m|`; the Gouy phase advances as `(order + 1) psi`.
    pub fn order(&self) -> u32 {
        2 * self.radial_n + self.azimuthal_m.unsigned_abs()
    }

    /// All modes with `2n + |m| <= max_order`, ordered by order, then `n`, then `m`.
    pub fn up_to_order(max_order: u32) -> Vec<ModeIndex> {
        let mut modes = Vec::new();
        for order in 0..=max_order {
            for n in 0..=order / 2 {
                let abs_m = (order - 2 * n) as i32;
                if abs_m == 0 {
                    modes.push(ModeIndex::new(n, 0));
                } else {
                    modes.push(ModeIndex::new(n, -abs_m));
                    modes.push(ModeIndex::new(n, abs_m));
                }
            }
        }
        modes
    }

    /// Unit-power normalization `sqrt(2 n! / (pi (n+|m|)!))`.
    pub fn norm(&self) -> f64 {
        let n = self.radial_n as f64;
        let am = self.azimuthal_m.unsigned_abs() as f64;
        let ln = statrs::function::gamma::ln_gamma(n + 1.0)
            - statrs::function::gamma::ln_gamma(n + am + 1.0);
        (2.0 / PI * ln.exp()).sqrt()
    }
}

/// Generalized Laguerre polynomial `L_n^(alpha)(x)` by three-term recurrence.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Cached per-plane beam quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPlane {
    pub z: f64,
    pub wavenumber: f64,
    pub beam_radius: f64,
    pub inverse_curvature: f64,
    pub gouy_angle: f64,
}

impl BeamPlane {
    /// Transverse profile of a unit-power mode at this plane, without the
    /// `exp(-ikz)` and Gouy factors. `(x, y)` are measured from the beam axis.
    pub fn profile(&self, mode: ModeIndex, x: f64, y: f64) -> Complex64 {
        let w = self.beam_radius;
        let r2 = x * x + y * y;
        let u = 2.0 * r2 / (w * w);
        let am = mode.azimuthal_m.unsigned_abs();
        // (sqrt2 r / w)^|m| e^{-i m phi} = (sqrt2 (x -/+ i y) / w)^|m|
        let s = std::f64::consts::SQRT_2 / w;
        let base = if mode.azimuthal_m >= 0 {
            Complex64::new(s * x, -s * y)
        } else {
            Complex64::new(s * x, s * y)
        };
        let angular = base.powu(am);
        let radial =
            mode.norm() / w * laguerre(mode.radial_n, am as f64, u) * (-r2 / (w * w)).exp();
        let curvature =
            Complex64::from_polar(1.0, -0.5 * self.wavenumber * r2 * self.inverse_curvature);
        angular * curvature * radial
    }

    /// Propagation phase `exp(-ikz + i(order+1) psi)` of a mode at this plane.
    pub fn propagation_phase(&self, mode: ModeIndex) -> Complex64 {
        let phase = -self.wavenumber * self.z + (mode.order() as f64 + 1.0) * self.gouy_angle;
        Complex64::from_polar(1.0, phase)
    }
}

/// Unit-power Laguerre-Gauss field `E_n^m(r, phi, z)` of the equivalent
/// resonator. The time factor and the constant global phase are dropped.
pub fn mode_field(
    res: &EquivalentResonator,
    mode: ModeIndex,
    r: f64,
    phi: f64,
    z: f64,
) -> Complex64 {
    let plane = res.plane(z);
    let (sin, cos) = phi.sin_cos();
    plane.profile(mode, r * cos, r * sin) * plane.propagation_phase(mode)
}

/// Converts a per-section power-loss ratio into an attenuation rate in dB/km.
pub fn per_section_loss_to_attenuation(loss_ratio: f64, lens_spacing_m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&loss_ratio) {
        return Err(VbgError::InvalidLoss(loss_ratio));
    }
    positive("lens_spacing_m", lens_spacing_m)?;
    let spacing_km = lens_spacing_m / 1000.0;
    Ok(-10.0 / spacing_km * (-loss_ratio).ln_1p() / LN_10)
}

/// Inverse of [`per_section_loss_to_attenuation`].
pub fn attenuation_to_per_section_loss(alpha_db_per_km: f64, lens_spacing_m: f64) -> Result<f64> {
    if !(alpha_db_per_km.is_finite() && alpha_db_per_km >= 0.0) {
        return Err(VbgError::invalid(
            "alpha_db_per_km",
            format!("must be >= 0, got {alpha_db_per_km}"),
        ));
    }
    positive("lens_spacing_m", lens_spacing_m)?;
    let spacing_km = lens_spacing_m / 1000.0;
    Ok(-(-alpha_db_per_km * spacing_km * LN_10 / 10.0).exp_m1())
}
