//! Per-lens loss: aperture diffraction of the guided mode plus the material
//! and coating budget, and the resulting lens attenuation rate.

use std::f64::consts::{LN_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, VbgError};
use crate::optics::{
    per_section_loss_to_attenuation, EquivalentResonator, GuideGeometry, ModeIndex,
};

const PPM: f64 = 1e-6;

/// Absorption, scattering and coating-reflection loss of one lens, in ppm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEntries {
    pub absorption_ppm: f64,
    pub scattering_ppm: f64,
    pub reflection_ppm: f64,
}

impl LossEntries {
    pub const ZERO: LossEntries = LossEntries {
        absorption_ppm: 0.0,
        scattering_ppm: 0.0,
        reflection_ppm: 0.0,
    };

    /// Upper values of the reference loss table: 0.25 ppm absorption,
    /// 5 ppm scattering, 100 ppm AR-coating reflection.
    pub const REFERENCE_MAXIMA: LossEntries = LossEntries {
        absorption_ppm: 0.25,
        scattering_ppm: 5.0,
        reflection_ppm: 100.0,
    };

    pub(crate) fn validate(&self, line: Option<usize>) -> Result<()> {
        for (name, v) in [
            ("absorption_ppm", self.absorption_ppm),
            ("scattering_ppm", self.scattering_ppm),
            ("reflection_ppm", self.reflection_ppm),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(match line {
                    Some(line) => VbgError::Unit {
                        line,
                        message: format!("{name} must be >= 0, got {v}"),
                    },
                    None => VbgError::invalid(name, format!("must be >= 0, got {v}")),
                });
            }
        }
        Ok(())
    }
}

/// Wavelength-tabulated loss entries, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    rows: Vec<(f64, LossEntries)>,
}

const TABLE_HEADERS: [&str; 4] = [
    "wavelength_nm",
    "absorption_ppm",
    "scattering_ppm",
    "reflection_ppm",
];

#[derive(Debug, Deserialize)]
struct LossTableRow {
    wavelength_nm: f64,
    absorption_ppm: f64,
    scattering_ppm: f64,
    reflection_ppm: f64,
}

impl LossTable {
    pub fn from_rows(mut rows: Vec<(f64, LossEntries)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(VbgError::invalid(
                "lens loss table",
                "needs at least one row",
            ));
        }
        for (i, (wl, e)) in rows.iter().enumerate() {
            if !(wl.is_finite() && *wl > 0.0) {
                return Err(VbgError::Unit {
                    line: i + 2,
                    message: format!("wavelength_nm must be > 0, got {wl}"),
                });
            }
            e.validate(Some(i + 2))?;
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(VbgError::invalid(
                "lens loss table",
                "duplicate wavelength rows",
            ));
        }
        Ok(Self { rows })
    }

    /// Parses the `wavelength_nm,absorption_ppm,scattering_ppm,reflection_ppm` CSV.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, record) in reader.deserialize::<LossTableRow>().enumerate() {
            let row = record.map_err(|e| VbgError::Parse {
                line: i + 2,
                column: csv_error_field(&e, &TABLE_HEADERS),
                message: e.to_string(),
            })?;
            rows.push((
                row.wavelength_nm,
                LossEntries {
                    absorption_ppm: row.absorption_ppm,
                    scattering_ppm: row.scattering_ppm,
                    reflection_ppm: row.reflection_ppm,
                },
            ));
        }
        Self::from_rows(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| VbgError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_csv(&text)
    }

    pub fn range_nm(&self) -> (f64, f64) {
        (self.rows[0].0, self.rows[self.rows.len() - 1].0)
    }

    pub fn at(&self, wavelength_nm: f64) -> Result<LossEntries> {
        let (lo, hi) = self.range_nm();
        if !(lo..=hi).contains(&wavelength_nm) {
            return Err(VbgError::OutsideTable {
                wavelength_nm,
                min_nm: lo,
                max_nm: hi,
            });
        }
        let idx = self.rows.partition_point(|(wl, _)| *wl <= wavelength_nm);
        if idx == self.rows.len() {
            return Ok(self.rows[idx - 1].1);
        }
        let (x0, a) = self.rows[idx - 1];
        let (x1, b) = self.rows[idx];
        let t = (wavelength_nm - x0) / (x1 - x0);
        let lerp = |p: f64, q: f64| p + t * (q - p);
        Ok(LossEntries {
            absorption_ppm: lerp(a.absorption_ppm, b.absorption_ppm),
            scattering_ppm: lerp(a.scattering_ppm, b.scattering_ppm),
            reflection_ppm: lerp(a.reflection_ppm, b.reflection_ppm),
        })
    }
}

/// Header name of the column a CSV deserialization error points at.
pub(crate) fn csv_error_field(e: &csv::Error, headers: &[&str]) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err
            .field()
            .and_then(|i| headers.get(i as usize))
            .map(|h| h.to_string())
            .unwrap_or_else(|| "?".to_string()),
        _ => "?".to_string(),
    }
}

/// Non-diffractive per-lens losses, constant or wavelength dependent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LensLossSpec {
    Constant(LossEntries),
    Tabulated(LossTable),
}

impl LensLossSpec {
    pub fn reference_maxima() -> Self {
        LensLossSpec::Constant(LossEntries::REFERENCE_MAXIMA)
    }

    pub fn entries_at(&self, wavelength_m: f64) -> Result<LossEntries> {
        match self {
            LensLossSpec::Constant(e) => {
                e.validate(None)?;
                Ok(*e)
            }
            LensLossSpec::Tabulated(t) => t.at(wavelength_m * 1e9),
        }
    }
}

/// Per-lens loss ratios (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensLossBudget {
    pub diffraction: f64,
    pub absorption: f64,
    pub scattering: f64,
    pub reflection: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionLoss {
    pub value: f64,
    /// The raw approximation exceeded 1 and was clamped.
    pub clamped: bool,
}

/// Approximate diffraction loss per section of mode `(n, m)` for Fresnel
/// variable `c`: `pi 2^(4n+2m+3) c^(2n+m+1) e^(-2c) / (Gamma(n+1) Gamma(n+m+1))`.
pub fn diffraction_loss(mode: ModeIndex, fresnel_c: f64) -> Result<DiffractionLoss> {
    if !(fresnel_c.is_finite() && fresnel_c > 0.0) {
        return Err(VbgError::invalid(
            "fresnel_c",
            format!("must be > 0, got {fresnel_c}"),
        ));
    }
    let n = mode.radial_n as f64;
    let m = mode.azimuthal_m.unsigned_abs() as f64;
    let ln = PI.ln() + (4.0 * n + 2.0 * m + 3.0) * LN_2 + (2.0 * n + m + 1.0) * fresnel_c.ln()
        - 2.0 * fresnel_c
        - ln_gamma(n + 1.0)
        - ln_gamma(n + m + 1.0);
    let raw = ln.exp();
    if raw > 1.0 {
        log::warn!(
            "diffraction approximation exceeds unity for {mode:?} at c = {fresnel_c}; clamped"
        );
        Ok(DiffractionLoss {
            value: 1.0,
            clamped: true,
        })
    } else {
        Ok(DiffractionLoss {
            value: raw,
            clamped: false,
        })
    }
}

/// Fundamental-mode lens loss budget and the attenuation it causes.
pub fn lens_attenuation(
    geom: &GuideGeometry,
    res: &EquivalentResonator,
    spec: &LensLossSpec,
    wavelength_m: f64,
) -> Result<(LensLossBudget, f64)> {
    let entries = spec.entries_at(wavelength_m)?;
    let diffraction = diffraction_loss(ModeIndex::FUNDAMENTAL, res.fresnel_c_eq)?.value;
    let absorption = entries.absorption_ppm * PPM;
    let scattering = entries.scattering_ppm * PPM;
    let reflection = entries.reflection_ppm * PPM;
    let total = diffraction + absorption + scattering + reflection;
    let alpha = per_section_loss_to_attenuation(total, geom.lens_spacing_m)?;
    Ok((
        LensLossBudget {
            diffraction,
            absorption,
            scattering,
            reflection,
            total,
        },
        alpha,
    ))
}
