//! Run configuration and the file-producing drivers behind the `vbg` binary.
//!
//! A run is described by one JSON document ([`RunConfig`]). Field names carry
//! their units. Relative paths inside the document are resolved against the
//! directory holding it. Every output file carries the hash of the effective
//! configuration: CSVs in a leading `# config_hash=...` comment line, JSON
//! files in a `config_hash` field.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{alignment_attenuation_bound, MisalignmentSpec, ReferenceModel};
use crate::capacity::{
    band_capacity, total_attenuation, AttenuationSpectrum, CapacityResult, ComponentSpectrum,
};
use crate::error::{Result, VbgError};
use crate::gas::{
    load_line_list, parse_line_list, GasModel, REFERENCE_TEMPERATURE_K, SAMPLE_LINE_LIST,
};
use crate::lens::{lens_attenuation, LensLossSpec, LossEntries, LossTable};
use crate::modesim::{
    monte_carlo_run, MonteCarloReport, SimulationOptions, DEFAULT_TRUNCATION, MAX_TRUNCATION,
};
use crate::optics::{equivalent_resonator, GuideGeometry};

pub const CRATE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub lens_spacing_m: f64,
    pub focal_length_m: f64,
    pub lens_radius_m: f64,
    pub section_count: u64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = GuideGeometry::reference_design();
        Self {
            lens_spacing_m: g.lens_spacing_m,
            focal_length_m: g.focal_length_m,
            lens_radius_m: g.lens_radius_m,
            section_count: g.section_count,
        }
    }
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> GuideGeometry {
        GuideGeometry {
            lens_spacing_m: self.lens_spacing_m,
            focal_length_m: self.focal_length_m,
            lens_radius_m: self.lens_radius_m,
            section_count: self.section_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LensLossConfig {
    Constant {
        absorption_ppm: f64,
        scattering_ppm: f64,
        reflection_ppm: f64,
    },
    /// CSV with `wavelength_nm,absorption_ppm,scattering_ppm,reflection_ppm`.
    Table { path: PathBuf },
}

impl Default for LensLossConfig {
    fn default() -> Self {
        let d = LossEntries::REFERENCE_MAXIMA;
        LensLossConfig::Constant {
            absorption_ppm: d.absorption_ppm,
            scattering_ppm: d.scattering_ppm,
            reflection_ppm: d.reflection_ppm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineListSource {
    /// No lines: the gas contributes nothing.
    None,
    /// The synthetic list compiled into the crate.
    Sample,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasConfig {
    #[serde(rename = "pressure_Pa")]
    pub pressure_pa: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub mixing_ratios: BTreeMap<String, f64>,
    pub line_list: LineListSource,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            pressure_pa: 1.0,
            temperature_k: REFERENCE_TEMPERATURE_K,
            mixing_ratios: BTreeMap::from([
                ("CO2".to_string(), 4e-4),
                ("H2O".to_string(), 0.01),
                ("O2".to_string(), 0.209),
            ]),
            line_list: LineListSource::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MisalignmentConfig {
    pub sigma_s_mm: f64,
    /// sigma_L0 / L0
    #[serde(rename = "sigma_L0_rel")]
    pub sigma_l0_rel: f64,
    pub sigma_f_rel: f64,
    pub reference_model: ReferenceModel,
    #[serde(default)]
    pub isotropic: bool,
}

impl Default for MisalignmentConfig {
    fn default() -> Self {
        Self {
            sigma_s_mm: 0.1,
            sigma_l0_rel: 1e-3,
            sigma_f_rel: 1e-3,
            reference_model: ReferenceModel::GeodesicReference,
            isotropic: false,
        }
    }
}

impl MisalignmentConfig {
    pub fn to_spec(&self, geom: &GuideGeometry) -> MisalignmentSpec {
        MisalignmentSpec {
            sigma_s_m: self.sigma_s_mm * 1e-3,
            sigma_l0_m: self.sigma_l0_rel * geom.lens_spacing_m,
            sigma_f_m: self.sigma_f_rel * geom.focal_length_m,
            reference_model: self.reference_model,
            isotropic: self.isotropic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min_nm: f64,
    pub max_nm: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min_nm: 1200.0,
            max_nm: 1700.0,
            points: 2001,
        }
    }
}

impl GridConfig {
    /// Parses `min_nm:max_nm:points`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |message: String| VbgError::Config {
            path: "--grid".to_string(),
            message,
        };
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected min_nm:max_nm:points, got `{text}`")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("`{s}`: {e}")))
        };
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| bad(format!("`{}`: {e}", parts[2])))?;
        Ok(Self {
            min_nm: num(parts[0])?,
            max_nm: num(parts[1])?,
            points,
        })
    }

    /// Uniform wavelength grid in metres.
    pub fn wavelengths_m(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min_nm * 1e-9];
        }
        let step = (self.max_nm - self.min_nm) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let nm = if i + 1 == self.points {
                    self.max_nm
                } else {
                    self.min_nm + step * i as f64
                };
                nm * 1e-9
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub min_nm: f64,
    pub max_nm: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            min_nm: 1200.0,
            max_nm: 1700.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub wavelength_nm: f64,
    pub trials: usize,
    pub sections: usize,
    #[serde(rename = "truncation_N")]
    pub truncation_n: u32,
    #[serde(default)]
    pub hard_aperture: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            wavelength_nm: 1550.0,
            trials: 20,
            sections: 100,
            truncation_n: DEFAULT_TRUNCATION,
            hard_aperture: false,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub lens_loss: LensLossConfig,
    pub gas: GasConfig,
    pub misalignment: MisalignmentConfig,
    pub grid: GridConfig,
    pub band: BandConfig,
    pub lengths_km: Vec<f64>,
    pub master_seed: u64,
    pub simulation: SimulationConfig,
    /// Optional `wavelength_nm,alpha_db_per_km` CSV written alongside the
    /// guide spectrum for comparison.
    pub fiber_csv: Option<PathBuf>,
    /// Not part of the hash.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            lens_loss: LensLossConfig::default(),
            gas: GasConfig::default(),
            misalignment: MisalignmentConfig::default(),
            grid: GridConfig::default(),
            band: BandConfig::default(),
            lengths_km: vec![100.0, 1000.0, 10000.0],
            master_seed: 0,
            simulation: SimulationConfig::default(),
            fiber_csv: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<GridConfig>,
    pub lengths_km: Option<Vec<f64>>,
}

/// Parses `km,km,...`.
pub fn parse_lengths(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| VbgError::Config {
                path: "--lengths".to_string(),
                message: format!("`{s}`: {e}"),
            })
        })
        .collect()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| VbgError::Config {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let mut config = Self::from_json(&text).map_err(|e| match e {
            VbgError::Config { path: at, message } => VbgError::Config {
                path: format!("{} ({at})", path.display()),
                message,
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let LensLossConfig::Table { path } = &mut self.lens_loss {
            fix(path);
        }
        if let LineListSource::File(path) = &mut self.gas.line_list {
            fix(path);
        }
        if let Some(path) = &mut self.fiber_csv {
            fix(path);
        }
        fix(&mut self.output_dir);
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dir) = &overrides.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(seed) = overrides.seed {
            self.master_seed = seed;
        }
        if let Some(grid) = overrides.grid {
            self.grid = grid;
        }
        if let Some(lengths) = &overrides.lengths_km {
            self.lengths_km = lengths.clone();
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON of everything except `output_dir`.
    pub fn hash(&self) -> String {
        let mut copy = self.clone();
        copy.output_dir = PathBuf::new();
        let text = serde_json::to_string(&copy).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Checks every section and loads referenced files. All problems are
    /// collected into one report.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport {
            config_hash: self.hash(),
            ..ValidationReport::default()
        };
        let geom = self.geometry.to_geometry();
        report.check(
            "geometry",
            geom.validate()
                .and_then(|_| equivalent_resonator(&geom, 1550e-9).map(|_| ())),
        );
        let grid_ok = report.check("grid", self.check_grid());
        if let Err(e) = self.load_lens_spec().and_then(|spec| {
            if grid_ok {
                for &wl in [self.grid.min_nm, self.grid.max_nm].iter() {
                    spec.entries_at(wl * 1e-9)?;
                }
            } else if let LensLossSpec::Constant(e) = &spec {
                e.validate(None)?;
            }
            Ok(())
        }) {
            report.push("lens_loss", e);
        }
        report.check("gas", self.load_gas().map(|_| ()));
        report.check("misalignment", self.misalignment.to_spec(&geom).validate());
        if grid_ok {
            report.check("band", self.check_band());
        }
        for (i, &l) in self.lengths_km.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                report
                    .errors
                    .push(format!("lengths_km[{i}]: must be >= 0, got {l}"));
            }
        }
        if self.gas.line_list == LineListSource::None {
            report
                .warnings
                .push("gas: no line list configured, alpha_gas is zero".to_string());
        }
        if self.lengths_km.is_empty() {
            report
                .warnings
                .push("lengths_km: empty, capacity report will be empty".to_string());
        }
        let sim = &self.simulation;
        if !(sim.wavelength_nm.is_finite() && sim.wavelength_nm > 0.0) {
            report.errors.push(format!(
                "simulation.wavelength_nm: must be > 0, got {}",
                sim.wavelength_nm
            ));
        }
        if sim.trials == 0 || sim.sections == 0 {
            report
                .errors
                .push("simulation: trials and sections must be >= 1".to_string());
        }
        if sim.truncation_n > MAX_TRUNCATION {
            report.errors.push(format!(
                "simulation.truncation_N: must be <= {MAX_TRUNCATION}, got {}",
                sim.truncation_n
            ));
        }
        if let Some(path) = &self.fiber_csv {
            report.check("fiber_csv", load_fiber_csv(path).map(|_| ()));
        }
        if geom.validate().is_ok() {
            let c = equivalent_resonator(&geom, 1550e-9)
                .map(|r| r.fresnel_c_eq)
                .unwrap_or(f64::NAN);
            if c < 1.0 {
                report
                    .warnings
                    .push(format!("geometry: Fresnel number c_eq = {c:.3} at 1550 nm; diffraction formula unreliable"));
            }
        }
        report.valid = report.errors.is_empty();
        report
    }

    fn check_grid(&self) -> Result<()> {
        let g = self.grid;
        if !(g.min_nm.is_finite() && g.min_nm > 0.0 && g.max_nm.is_finite()) {
            return Err(VbgError::invalid(
                "grid",
                format!("bounds must be positive, got {}:{}", g.min_nm, g.max_nm),
            ));
        }
        if g.points < 2 || g.max_nm <= g.min_nm {
            return Err(VbgError::invalid(
                "grid",
                format!(
                    "need max_nm > min_nm and points >= 2, got {}:{}:{}",
                    g.min_nm, g.max_nm, g.points
                ),
            ));
        }
        Ok(())
    }

    fn check_band(&self) -> Result<()> {
        let (b, g) = (self.band, self.grid);
        if b.min_nm > b.max_nm {
            return Err(VbgError::invalid(
                "band",
                format!("min {} exceeds max {}", b.min_nm, b.max_nm),
            ));
        }
        if b.min_nm < g.min_nm || b.max_nm > g.max_nm {
            return Err(VbgError::BandOutOfRange {
                min_m: b.min_nm * 1e-9,
                max_m: b.max_nm * 1e-9,
                grid_min_m: g.min_nm * 1e-9,
                grid_max_m: g.max_nm * 1e-9,
            });
        }
        Ok(())
    }

    pub fn load_lens_spec(&self) -> Result<LensLossSpec> {
        match &self.lens_loss {
            LensLossConfig::Constant {
                absorption_ppm,
                scattering_ppm,
                reflection_ppm,
            } => Ok(LensLossSpec::Constant(LossEntries {
                absorption_ppm: *absorption_ppm,
                scattering_ppm: *scattering_ppm,
                reflection_ppm: *reflection_ppm,
            })),
            LensLossConfig::Table { path } => Ok(LensLossSpec::Tabulated(LossTable::load(path)?)),
        }
    }

    pub fn load_gas(&self) -> Result<GasModel> {
        let lines = match &self.gas.line_list {
            LineListSource::None => Vec::new(),
            LineListSource::Sample => parse_line_list(SAMPLE_LINE_LIST)?,
            LineListSource::File(path) => load_line_list(path)?,
        };
        GasModel::new(
            self.gas.pressure_pa,
            self.gas.temperature_k,
            self.gas.mixing_ratios.clone(),
            lines,
        )
    }

    /// Validates and loads everything a run needs.
    pub fn prepare(&self) -> Result<PreparedRun> {
        self.prepare_with(true)
    }

    /// As [`prepare`](Self::prepare); with `needs_band` false a band outside
    /// the grid is only a warning.
    pub fn prepare_with(&self, needs_band: bool) -> Result<PreparedRun> {
        let mut report = self.validate();
        if !needs_band {
            let (band, rest): (Vec<String>, Vec<String>) = report
                .errors
                .drain(..)
                .partition(|e| e.starts_with("band:"));
            report.errors = rest;
            report.warnings.extend(band);
            report.valid = report.errors.is_empty();
        }
        if !report.valid {
            return Err(VbgError::Config {
                path: report
                    .errors
                    .first()
                    .map(|e| e.split(':').next().unwrap_or("").to_string())
                    .unwrap_or_default(),
                message: report.errors.join("; "),
            });
        }
        for w in &report.warnings {
            log::warn!("{w}");
        }
        let geometry = self.geometry.to_geometry();
        Ok(PreparedRun {
            config_hash: report.config_hash,
            geometry,
            lens: self.load_lens_spec()?,
            gas: self.load_gas()?,
            misalignment: self.misalignment.to_spec(&geometry),
            wavelengths_m: self.grid.wavelengths_m(),
            fiber: self.fiber_csv.as_deref().map(load_fiber_csv).transpose()?,
        })
    }
}

fn io_error(path: &Path, e: std::io::Error) -> VbgError {
    VbgError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Outcome of [`RunConfig::validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub config_hash: String,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    fn push(&mut self, section: &str, e: VbgError) {
        self.errors.push(format!("{section}: {e}"));
    }

    fn check(&mut self, section: &str, r: Result<()>) -> bool {
        match r {
            Ok(()) => true,
            Err(e) => {
                self.push(section, e);
                false
            }
        }
    }
}

/// Validated config with all referenced data loaded.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub config_hash: String,
    pub geometry: GuideGeometry,
    pub lens: LensLossSpec,
    pub gas: GasModel,
    pub misalignment: MisalignmentSpec,
    pub wavelengths_m: Vec<f64>,
    /// `(wavelength_nm, alpha_db_per_km)` rows.
    pub fiber: Option<Vec<(f64, f64)>>,
}

impl PreparedRun {
    /// Attenuation components on an arbitrary increasing wavelength list.
    pub fn spectrum_at(&self, wavelengths_m: &[f64]) -> Result<AttenuationSpectrum> {
        let mut lens = Vec::with_capacity(wavelengths_m.len());
        let mut align = Vec::with_capacity(wavelengths_m.len());
        for &wl in wavelengths_m {
            let res = equivalent_resonator(&self.geometry, wl)?;
            lens.push(lens_attenuation(&self.geometry, &res, &self.lens, wl)?.1);
            align.push(
                alignment_attenuation_bound(&self.misalignment, &self.geometry, &res)?
                    .alpha_align_db_per_km,
            );
        }
        let gas = self.gas.attenuation_at_wavelengths(wavelengths_m)?;
        let grid = wavelengths_m.to_vec();
        total_attenuation(
            &ComponentSpectrum::new(grid.clone(), lens)?,
            &ComponentSpectrum::new(grid.clone(), gas)?,
            &ComponentSpectrum::new(grid, align)?,
        )
    }

    pub fn spectrum(&self) -> Result<AttenuationSpectrum> {
        self.spectrum_at(&self.wavelengths_m)
    }

    pub fn alpha_tot_at(&self, wavelength_m: f64) -> Result<f64> {
        Ok(self.spectrum_at(&[wavelength_m])?.alpha_tot[0])
    }
}

fn load_fiber_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        wavelength_nm: f64,
        alpha_db_per_km: f64,
    }
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| VbgError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(i + 2),
            column: crate::lens::csv_error_field(&e, &["wavelength_nm", "alpha_db_per_km"]),
            message: e.to_string(),
        })?;
        rows.push((row.wavelength_nm, row.alpha_db_per_km));
    }
    if rows.len() < 2 || !rows.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(VbgError::Config {
            path: path.display().to_string(),
            message: "fiber CSV needs at least two rows with increasing wavelength_nm".to_string(),
        });
    }
    Ok(rows)
}

/// Linear interpolation of the fiber curve; `None` outside its range.
fn fiber_at(rows: &[(f64, f64)], nm: f64) -> Option<f64> {
    if nm < rows[0].0 || nm > rows[rows.len() - 1].0 {
        return None;
    }
    let i = rows.partition_point(|r| r.0 <= nm).clamp(1, rows.len() - 1);
    let (a, b) = (rows[i - 1], rows[i]);
    Some(a.1 + (nm - a.0) / (b.0 - a.0) * (b.1 - a.1))
}

/// Result of a grid search with local golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub x: f64,
    pub value: f64,
    /// Index of the best grid point.
    pub grid_index: usize,
    pub grid_x: f64,
    pub grid_value: f64,
}

/// Minimises `f` over an increasing grid, then refines by golden-section
/// search between the neighbours of the best point. Equal grid values go to
/// the smaller abscissa; the refined point replaces the grid point only when
/// strictly lower.
pub fn minimize_on_grid<F>(grid: &[f64], f: F, x_tol: f64) -> Result<GridMinimum>
where
    F: Fn(f64) -> Result<f64>,
{
    let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    minimize_tabulated(grid, &values, f, x_tol)
}

/// As [`minimize_on_grid`] with the grid values already known.
pub fn minimize_tabulated<F>(grid: &[f64], values: &[f64], f: F, x_tol: f64) -> Result<GridMinimum>
where
    F: Fn(f64) -> Result<f64>,
{
    if grid.is_empty() || grid.len() != values.len() {
        return Err(VbgError::GridMismatch);
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            return Err(VbgError::invalid(
                "objective",
                format!("NaN at x = {}", grid[i]),
            ));
        }
        if v < values[best] {
            best = i;
        }
    }
    let mut out = GridMinimum {
        x: grid[best],
        value: values[best],
        grid_index: best,
        grid_x: grid[best],
        grid_value: values[best],
    };
    if grid.len() < 2 {
        return Ok(out);
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, v) = golden_section(&f, lo, hi, x_tol)?;
    if v < out.value {
        out.x = x;
        out.value = v;
    }
    Ok(out)
}

fn golden_section<F>(f: &F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        // ties keep the left bracket
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| io_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn csv_text(
    hash: &str,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String> {
    let mut text = format!("# config_hash={hash}\n");
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(csv_write_error)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_write_error)?;
    }
    let bytes = writer.into_inner().map_err(|e| VbgError::Io {
        path: "<csv buffer>".to_string(),
        message: e.to_string(),
    })?;
    text.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(text)
}

fn csv_write_error(e: csv::Error) -> VbgError {
    VbgError::Io {
        path: "<csv buffer>".to_string(),
        message: e.to_string(),
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn nm(wl_m: f64) -> String {
    // round away binary noise from the metre conversion
    format!("{}", (wl_m * 1e9 * 1e6).round() / 1e6)
}

#[derive(Debug, Clone, Serialize)]
struct Metadata<'a, T: Serialize> {
    config_hash: &'a str,
    crate_version: &'a str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

/// Files written by one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary {
    grid_points: usize,
    min_nm: f64,
    max_nm: f64,
    fresnel_c_eq_at_1550nm: f64,
    l_align: f64,
    alpha_align_db_per_km_at_1550nm: f64,
    alpha_tot_min_db_per_km: f64,
    alpha_tot_min_at_nm: f64,
    fiber_csv: Option<String>,
}

/// Writes `attenuation.csv` and `attenuation.json` into the output directory.
pub fn attenuation_sweep(config: &RunConfig) -> Result<(AttenuationSpectrum, Outputs)> {
    let run = config.prepare_with(false)?;
    let spectrum = run.spectrum()?;
    let mut header: Vec<String> = [
        "wavelength_nm",
        "alpha_lens",
        "alpha_gas",
        "alpha_align",
        "alpha_tot",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if run.fiber.is_some() {
        header.push("alpha_fiber".to_string());
    }
    let rows = (0..spectrum.len()).map(|i| {
        let mut row = vec![
            nm(spectrum.wavelengths_m[i]),
            num(spectrum.alpha_lens[i]),
            num(spectrum.alpha_gas[i]),
            num(spectrum.alpha_align[i]),
            num(spectrum.alpha_tot[i]),
        ];
        if let Some(fiber) = &run.fiber {
            row.push(
                fiber_at(fiber, spectrum.wavelengths_m[i] * 1e9)
                    .map(num)
                    .unwrap_or_default(),
            );
        }
        row
    });
    let csv_path = config.output_dir.join("attenuation.csv");
    write_file(&csv_path, &csv_text(&run.config_hash, &header, rows)?)?;

    let res = equivalent_resonator(&run.geometry, 1550e-9)?;
    let align = alignment_attenuation_bound(&run.misalignment, &run.geometry, &res)?;
    let best = (0..spectrum.len())
        .min_by(|&a, &b| spectrum.alpha_tot[a].total_cmp(&spectrum.alpha_tot[b]))
        .unwrap_or(0);
    let meta = Metadata {
        config_hash: &run.config_hash,
        crate_version: CRATE_VERSION,
        command: "attenuation",
        body: SweepSummary {
            grid_points: spectrum.len(),
            min_nm: config.grid.min_nm,
            max_nm: config.grid.max_nm,
            fresnel_c_eq_at_1550nm: res.fresnel_c_eq,
            l_align: align.l_align,
            alpha_align_db_per_km_at_1550nm: align.alpha_align_db_per_km,
            alpha_tot_min_db_per_km: spectrum.alpha_tot[best],
            alpha_tot_min_at_nm: spectrum.wavelengths_m[best] * 1e9,
            fiber_csv: config.fiber_csv.as_ref().map(|p| p.display().to_string()),
        },
    };
    let json_path = config.output_dir.join("attenuation.json");
    write_file(&json_path, &to_json(&meta))?;
    Ok((
        spectrum,
        Outputs {
            files: vec![csv_path, json_path],
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub length_km: f64,
    pub q2_integrated: f64,
    pub under_resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
struct CapacitySummary<'a> {
    band_min_nm: f64,
    band_max_nm: f64,
    nu_min_hz: f64,
    nu_max_hz: f64,
    rows: &'a [CapacityRow],
}

/// Computes `q2(lambda)` and `Q2` for each configured length and writes
/// `capacity_q2.csv`, `capacity_Q2.csv` and `capacity.json`.
pub fn capacity_report(config: &RunConfig) -> Result<(Vec<CapacityResult>, Outputs)> {
    let run = config.prepare()?;
    let spectrum = run.spectrum()?;
    let (b_lo, b_hi) = (config.band.min_nm * 1e-9, config.band.max_nm * 1e-9);
    let results = config
        .lengths_km
        .iter()
        .map(|&l| {
            band_capacity(&spectrum, l, b_lo, b_hi).map_err(|e| match e {
                VbgError::DivergentCapacity { total_loss_db, .. } => VbgError::DivergentCapacity {
                    total_loss_db,
                    context: format!(" for lengths_km entry {l} km"),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut header = vec!["wavelength_nm".to_string()];
    header.extend(config.lengths_km.iter().map(|l| format!("q2_L{l}km")));
    let rows = (0..spectrum.len()).map(|i| {
        let mut row = vec![nm(spectrum.wavelengths_m[i])];
        row.extend(results.iter().map(|r| num(r.q2[i])));
        row
    });
    let q2_path = config.output_dir.join("capacity_q2.csv");
    write_file(&q2_path, &csv_text(&run.config_hash, &header, rows)?)?;

    let table: Vec<CapacityRow> = results
        .iter()
        .map(|r| CapacityRow {
            length_km: r.total_length_km,
            q2_integrated: r.q2_integrated,
            under_resolved: r.under_resolved,
        })
        .collect();
    let header: Vec<String> = ["length_km", "Q2_qubits_per_s", "under_resolved"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = table.iter().map(|r| {
        vec![
            format!("{}", r.length_km),
            num(r.q2_integrated),
            r.under_resolved.to_string(),
        ]
    });
    let table_path = config.output_dir.join("capacity_Q2.csv");
    write_file(&table_path, &csv_text(&run.config_hash, &header, rows)?)?;

    let meta = Metadata {
        config_hash: &run.config_hash,
        crate_version: CRATE_VERSION,
        command: "capacity",
        body: CapacitySummary {
            band_min_nm: config.band.min_nm,
            band_max_nm: config.band.max_nm,
            nu_min_hz: crate::gas::SPEED_OF_LIGHT / b_hi,
            nu_max_hz: crate::gas::SPEED_OF_LIGHT / b_lo,
            rows: &table,
        },
    };
    let json_path = config.output_dir.join("capacity.json");
    write_file(&json_path, &to_json(&meta))?;
    Ok((
        results,
        Outputs {
            files: vec![q2_path, table_path, json_path],
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub wavelength_nm: f64,
    pub alpha_min_db_per_km: f64,
    pub grid_wavelength_nm: f64,
    pub grid_alpha_db_per_km: f64,
}

/// Wavelength of least total attenuation on the configured grid, refined
/// between neighbouring grid points. Writes `optimize.json`.
pub fn optimize_wavelength(config: &RunConfig) -> Result<(OptimumReport, Outputs)> {
    let run = config.prepare_with(false)?;
    let spectrum = run.spectrum()?;
    let step = (config.grid.max_nm - config.grid.min_nm) / (config.grid.points - 1) as f64;
    let found = minimize_tabulated(
        &run.wavelengths_m,
        &spectrum.alpha_tot,
        |wl| run.alpha_tot_at(wl),
        step * 1e-9 * 1e-6,
    )?;
    let report = OptimumReport {
        wavelength_nm: found.x * 1e9,
        alpha_min_db_per_km: found.value,
        grid_wavelength_nm: found.grid_x * 1e9,
        grid_alpha_db_per_km: found.grid_value,
    };
    let meta = Metadata {
        config_hash: &run.config_hash,
        crate_version: CRATE_VERSION,
        command: "optimize",
        body: report,
    };
    let path = config.output_dir.join("optimize.json");
    write_file(&path, &to_json(&meta))?;
    Ok((report, Outputs { files: vec![path] }))
}

/// Runs the misalignment Monte Carlo and writes `simulate.json`. The caller
/// decides what to do with `bound_holds`.
pub fn simulate(config: &RunConfig) -> Result<(MonteCarloReport, Outputs)> {
    let run = config.prepare_with(false)?;
    let sim = &config.simulation;
    let options = SimulationOptions {
        wavelength_m: sim.wavelength_nm * 1e-9,
        trials: sim.trials,
        sections: sim.sections,
        master_seed: config.master_seed,
        truncation_n: sim.truncation_n,
        hard_aperture: sim.hard_aperture,
    };
    let report = monte_carlo_run(&run.geometry, &run.misalignment, &options)?;
    let meta = Metadata {
        config_hash: &run.config_hash,
        crate_version: CRATE_VERSION,
        command: "simulate",
        body: &report,
    };
    let path = config.output_dir.join("simulate.json");
    write_file(&path, &to_json(&meta))?;
    Ok((report, Outputs { files: vec![path] }))
}

/// Writes `validation.json` and the effective config `effective_config.json`.
pub fn validate(config: &RunConfig) -> Result<(ValidationReport, Outputs)> {
    let report = config.validate();
    let report_path = config.output_dir.join("validation.json");
    write_file(&report_path, &to_json(&report))?;
    let config_path = config.output_dir.join("effective_config.json");
    write_file(&config_path, &(config.to_json() + "\n"))?;
    Ok((
        report,
        Outputs {
            files: vec![report_path, config_path],
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_config_round_trips() {
        let config = RunConfig::default();
        let back = RunConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(back, config);
        assert_eq!(back.hash(), config.hash());
        assert_eq!(config.hash().len(), 64);
    }

    #[test]
    fn output_dir_does_not_change_hash() {
        let mut a = RunConfig::default();
        let h = a.hash();
        a.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), h);
        a.master_seed = 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c = RunConfig::from_json(r#"{"geometry": {"lens_spacing_m": 1000, "focal_length_m": 600, "lens_radius_m": 0.05, "section_count": 10}}"#).unwrap();
        assert_eq!(c.geometry.lens_spacing_m, 1000.0);
        assert_eq!(c.grid, GridConfig::default());
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let e = RunConfig::from_json(r#"{"geometry": {"lens_spacing": 1000}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn grid_and_lengths_parse() {
        let g = GridConfig::parse("1500:1600:11").unwrap();
        assert_eq!(g.points, 11);
        let wl = g.wavelengths_m();
        assert_eq!(wl.len(), 11);
        assert_relative_eq!(wl[10], 1600e-9, max_relative = 1e-15);
        assert!(GridConfig::parse("1500:1600").is_err());
        assert!(GridConfig::parse("a:1600:3").is_err());
        assert_eq!(
            parse_lengths("100, 1000,1e4").unwrap(),
            vec![100.0, 1000.0, 1e4]
        );
        assert!(parse_lengths("100,x").is_err());
    }

    #[test]
    fn validation_collects_all_errors() {
        let mut c = RunConfig::default();
        c.geometry.lens_radius_m = -1.0;
        c.gas.pressure_pa = -2.0;
        c.misalignment.sigma_s_mm = -0.1;
        c.band.max_nm = 2000.0;
        let r = c.validate();
        assert!(!r.valid);
        assert_eq!(r.errors.len(), 4, "{:?}", r.errors);
        assert!(c.prepare().is_err());
    }

    #[test]
    fn unstable_geometry_is_reported() {
        let mut c = RunConfig::default();
        c.geometry.focal_length_m = 900.0;
        let r = c.validate();
        assert!(r.errors.iter().any(|e| e.starts_with("geometry")));
    }

    #[test]
    fn grid_minimum_ties_go_left() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let m = minimize_on_grid(&grid, |x| Ok(((x - 3.0) * (x - 7.0)).powi(2)), 1e-9).unwrap();
        assert_eq!(m.grid_index, 3);
        assert_eq!(m.x, 3.0);
    }

    #[test]
    fn refinement_finds_interior_minimum() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let m = minimize_on_grid(&grid, |x| Ok((x - 4.3).powi(2)), 1e-10).unwrap();
        assert_eq!(m.grid_index, 4);
        assert!((m.x - 4.3).abs() < 1e-8);
    }

    #[test]
    fn monotone_objectives_hit_the_ends() {
        let grid: Vec<f64> = (0..11).map(|i| 1.0 + i as f64).collect();
        let up = minimize_on_grid(&grid, Ok, 1e-10).unwrap();
        assert_eq!(up.x, 1.0);
        let down = minimize_on_grid(&grid, |x| Ok(1.0 / x), 1e-10).unwrap();
        assert_eq!(down.x, 11.0);
    }

    #[test]
    fn fiber_interpolation() {
        let rows = vec![(1500.0, 0.2), (1600.0, 0.3)];
        assert_relative_eq!(fiber_at(&rows, 1550.0).unwrap(), 0.25, max_relative = 1e-12);
        assert!(fiber_at(&rows, 1400.0).is_none());
    }
}
