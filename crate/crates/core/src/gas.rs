//! Residual-gas absorption from a molecular line list.
//!
//! Each line contributes `n x S phi(nu - nu0)` where `n` is the number
//! density, `x` the species mixing ratio, `S` the line intensity at 296 K and
//! `phi` a Voigt profile. Intensities are not rescaled with temperature.

use std::collections::BTreeMap;
use std::f64::consts::{LN_10, PI};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VbgError};
use crate::lens::csv_error_field;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const AVOGADRO: f64 = 6.022_140_76e23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const STANDARD_ATMOSPHERE_PA: f64 = 101_325.0;
pub const REFERENCE_TEMPERATURE_K: f64 = 296.0;
/// Lines further than this from a grid point contribute nothing.
pub const LINE_WING_CUTOFF_CM: f64 = 25.0;
/// cm^-1 to dB/km.
pub const NEPER_CM_TO_DB_KM: f64 = 10.0 * 1e5 / LN_10;

pub const LINE_LIST_HEADER: [&str; 5] = [
    "species",
    "nu0_cm-1",
    "S_cm-1_per_molec_cm-2",
    "gamma_air_cm-1_per_atm",
    "molar_mass_g_mol",
];

/// Bundled synthetic line list (H2O, CO2, O2 bands across 1.2-1.7 um).
/// Not HITRAN data; intended for tests and demonstrations only.
pub const SAMPLE_LINE_LIST: &str = include_str!("../data/sample_lines_synthetic.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub species_id: String,
    /// Line centre, cm^-1.
    pub center_wavenumber: f64,
    /// cm^-1 / (molecule cm^-2) at 296 K.
    pub intensity: f64,
    /// Air-broadened Lorentz HWHM at 1 atm, cm^-1/atm.
    pub air_broadening_gamma: f64,
    pub molar_mass_g_mol: f64,
}

impl SpectralLine {
    /// Doppler 1/e half width `b_D`, cm^-1.
    pub fn doppler_width(&self, temperature_k: f64) -> f64 {
        let mass_kg = self.molar_mass_g_mol * 1e-3 / AVOGADRO;
        self.center_wavenumber * (2.0 * BOLTZMANN * temperature_k / mass_kg).sqrt() / SPEED_OF_LIGHT
    }

    /// Lorentz HWHM at the given pressure, cm^-1.
    pub fn lorentz_width(&self, pressure_pa: f64) -> f64 {
        self.air_broadening_gamma * pressure_pa / STANDARD_ATMOSPHERE_PA
    }
}

#[derive(Debug, Deserialize)]
struct LineRow {
    species: String,
    #[serde(rename = "nu0_cm-1")]
    nu0: f64,
    #[serde(rename = "S_cm-1_per_molec_cm-2")]
    intensity: f64,
    #[serde(rename = "gamma_air_cm-1_per_atm")]
    gamma: f64,
    molar_mass_g_mol: f64,
}

/// Parses a line-list CSV with the exact header
/// `species,nu0_cm-1,S_cm-1_per_molec_cm-2,gamma_air_cm-1_per_atm,molar_mass_g_mol`.
/// Lines come back sorted by centre; duplicates are kept.
pub fn parse_line_list(text: &str) -> Result<Vec<SpectralLine>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| VbgError::Parse {
        line: 1,
        column: "header".into(),
        message: e.to_string(),
    })?;
    if header.iter().ne(LINE_LIST_HEADER) {
        return Err(VbgError::Parse {
            line: 1,
            column: "header".into(),
            message: format!("expected `{}`", LINE_LIST_HEADER.join(",")),
        });
    }
    let mut lines = Vec::new();
    for (i, record) in reader.deserialize::<LineRow>().enumerate() {
        let line_no = i + 2;
        let row = record.map_err(|e| VbgError::Parse {
            line: line_no,
            column: csv_error_field(&e, &LINE_LIST_HEADER),
            message: e.to_string(),
        })?;
        if !(row.nu0.is_finite() && row.nu0 > 0.0) {
            return Err(VbgError::Unit {
                line: line_no,
                message: format!("nu0 must be > 0, got {}", row.nu0),
            });
        }
        if !(row.intensity.is_finite() && row.intensity >= 0.0) {
            return Err(VbgError::Unit {
                line: line_no,
                message: format!("line intensity S must be >= 0, got {}", row.intensity),
            });
        }
        if !(row.gamma.is_finite() && row.gamma >= 0.0) {
            return Err(VbgError::Unit {
                line: line_no,
                message: format!("gamma_air must be >= 0, got {}", row.gamma),
            });
        }
        if !(row.molar_mass_g_mol.is_finite() && row.molar_mass_g_mol > 0.0) {
            return Err(VbgError::Unit {
                line: line_no,
                message: format!("molar mass must be > 0, got {}", row.molar_mass_g_mol),
            });
        }
        lines.push(SpectralLine {
            species_id: row.species,
            center_wavenumber: row.nu0,
            intensity: row.intensity,
            air_broadening_gamma: row.gamma,
            molar_mass_g_mol: row.molar_mass_g_mol,
        });
    }
    lines.sort_by(|a, b| a.center_wavenumber.total_cmp(&b.center_wavenumber));
    Ok(lines)
}

pub fn load_line_list(path: &Path) -> Result<Vec<SpectralLine>> {
    let text = std::fs::read_to_string(path).map_err(|e| VbgError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_line_list(&text)
}

/// Real part of the Faddeeva function `w(x + iy)`, `y >= 0`, by Humlicek's
/// four-region rational approximation (relative error below 1e-4).
pub fn faddeeva_re(x: f64, y: f64) -> f64 {
    use num_complex::Complex64 as C;
    let t = C::new(y, -x);
    let s = x.abs() + y;
    let w = if s >= 15.0 {
        t * 0.564_189_6 / (0.5 + t * t)
    } else if s >= 5.5 {
        let u = t * t;
        t * (1.410_474 + u * 0.564_189_6) / (0.75 + u * (3.0 + u))
    } else if y >= 0.195 * x.abs() - 0.176 {
        (16.4955 + t * (20.209_33 + t * (11.964_82 + t * (3.778_987 + t * 0.564_223_6))))
            / (16.4955 + t * (38.823_63 + t * (39.271_21 + t * (21.692_74 + t * (6.699_398 + t)))))
    } else {
        let u = t * t;
        let num = t
            * (36_183.31
                - u * (3_321.990_5
                    - u * (1_540.787
                        - u * (219.031_3 - u * (35.766_83 - u * (1.320_522 - u * 0.564_19))))));
        let den = 32_066.6
            - u * (24_322.84
                - u * (9_022.228
                    - u * (2_186.181 - u * (364.219_1 - u * (61.570_37 - u * (1.841_439 - u))))));
        u.exp() - num / den
    };
    w.re
}

/// Area-normalized Voigt profile (cm) at offset `delta` from line centre,
/// for Doppler 1/e half width `doppler` and Lorentz HWHM `lorentz`.
pub fn voigt_profile(delta: f64, doppler: f64, lorentz: f64) -> f64 {
    if doppler <= 0.0 {
        return lorentz / (PI * (delta * delta + lorentz * lorentz));
    }
    faddeeva_re(delta / doppler, lorentz / doppler) / (doppler * PI.sqrt())
}

/// Number density `P / (k_B T)` in molecules/cm^3.
pub fn number_density_cm3(pressure_pa: f64, temperature_k: f64) -> f64 {
    pressure_pa / (BOLTZMANN * temperature_k) * 1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub pressure_pa: f64,
    pub temperature_k: f64,
    /// Species without an entry contribute nothing.
    pub mixing_ratios: BTreeMap<String, f64>,
    pub lines: Vec<SpectralLine>,
}

impl GasModel {
    pub fn new(
        pressure_pa: f64,
        temperature_k: f64,
        mixing_ratios: BTreeMap<String, f64>,
        mut lines: Vec<SpectralLine>,
    ) -> Result<Self> {
        lines.sort_by(|a, b| a.center_wavenumber.total_cmp(&b.center_wavenumber));
        let model = Self {
            pressure_pa,
            temperature_k,
            mixing_ratios,
            lines,
        };
        model.validate()?;
        Ok(model)
    }

    /// Room-temperature air-like residual gas over the bundled sample lines.
    pub fn sample_air(pressure_pa: f64) -> Result<Self> {
        let ratios = BTreeMap::from([
            ("H2O".to_string(), 0.01),
            ("CO2".to_string(), 4e-4),
            ("O2".to_string(), 0.209),
        ]);
        Self::new(
            pressure_pa,
            REFERENCE_TEMPERATURE_K,
            ratios,
            parse_line_list(SAMPLE_LINE_LIST)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pressure_pa.is_finite() && self.pressure_pa >= 0.0) {
            return Err(VbgError::invalid(
                "pressure_Pa",
                format!("must be >= 0, got {}", self.pressure_pa),
            ));
        }
        crate::optics::positive("temperature_K", self.temperature_k)?;
        let mut sum = 0.0;
        for (species, &x) in &self.mixing_ratios {
            if !(0.0..=1.0).contains(&x) {
                return Err(VbgError::invalid(
                    "mixing_ratios",
                    format!("{species} ratio {x} outside [0, 1]"),
                ));
            }
            sum += x;
        }
        if sum > 1.0 + 1e-12 {
            return Err(VbgError::invalid(
                "mixing_ratios",
                format!("sum {sum} exceeds 1"),
            ));
        }
        if !self
            .lines
            .windows(2)
            .all(|w| w[0].center_wavenumber <= w[1].center_wavenumber)
        {
            return Err(VbgError::invalid(
                "lines",
                "must be sorted by centre wavenumber",
            ));
        }
        Ok(())
    }

    pub fn number_density_cm3(&self) -> f64 {
        number_density_cm3(self.pressure_pa, self.temperature_k)
    }

    fn mixing_ratio(&self, species: &str) -> f64 {
        self.mixing_ratios.get(species).copied().unwrap_or(0.0)
    }

    /// Absorption coefficient in cm^-1 at one wavenumber.
    pub fn absorption_cm(&self, wavenumber: f64) -> f64 {
        let n = self.number_density_cm3();
        if n == 0.0 {
            return 0.0;
        }
        let lo = self
            .lines
            .partition_point(|l| l.center_wavenumber < wavenumber - LINE_WING_CUTOFF_CM);
        let hi = self
            .lines
            .partition_point(|l| l.center_wavenumber <= wavenumber + LINE_WING_CUTOFF_CM);
        self.lines[lo..hi]
            .iter()
            .map(|line| {
                let x = self.mixing_ratio(&line.species_id);
                if x == 0.0 || line.intensity == 0.0 {
                    return 0.0;
                }
                let profile = voigt_profile(
                    wavenumber - line.center_wavenumber,
                    line.doppler_width(self.temperature_k),
                    line.lorentz_width(self.pressure_pa),
                );
                n * x * line.intensity * profile
            })
            // an empty f64 sum is -0.0
            .fold(0.0, |acc, v| acc + v)
    }

    /// Attenuation in dB/km on a strictly increasing wavenumber grid (cm^-1).
    pub fn absorption_coefficient(&self, wavenumber_grid: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if !wavenumber_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(VbgError::invalid(
                "wavenumber_grid",
                "must be strictly increasing",
            ));
        }
        if self.lines.is_empty() {
            log::debug!("gas model has no spectral lines; alpha_gas is zero");
            return Ok(vec![0.0; wavenumber_grid.len()]);
        }
        Ok(wavenumber_grid
            .par_iter()
            .map(|&nu| self.absorption_cm(nu) * NEPER_CM_TO_DB_KM)
            .collect())
    }

    /// Attenuation in dB/km at the given vacuum wavelengths (m), any order.
    pub fn attenuation_at_wavelengths(&self, wavelengths_m: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if self.lines.is_empty() {
            log::debug!("gas model has no spectral lines; alpha_gas is zero");
            return Ok(vec![0.0; wavelengths_m.len()]);
        }
        Ok(wavelengths_m
            .par_iter()
            .map(|&wl| self.absorption_cm(0.01 / wl) * NEPER_CM_TO_DB_KM)
            .collect())
    }
}
