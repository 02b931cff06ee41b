//! Attenuation aggregation and two-way quantum capacity of the pure-loss channel.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VbgError};
use crate::gas::SPEED_OF_LIGHT;

/// Below this total loss (dB) the transmissivity is treated as exactly 1.
pub const MIN_TOTAL_LOSS_DB: f64 = 1e-12;

/// One attenuation contribution (dB/km) on a wavelength grid (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpectrum {
    pub wavelengths_m: Vec<f64>,
    pub alpha_db_per_km: Vec<f64>,
}

impl ComponentSpectrum {
    pub fn new(wavelengths_m: Vec<f64>, alpha_db_per_km: Vec<f64>) -> Result<Self> {
        if wavelengths_m.len() != alpha_db_per_km.len() {
            return Err(VbgError::GridMismatch);
        }
        Ok(Self {
            wavelengths_m,
            alpha_db_per_km,
        })
    }

    pub fn constant(wavelengths_m: Vec<f64>, alpha_db_per_km: f64) -> Self {
        let alpha = vec![alpha_db_per_km; wavelengths_m.len()];
        Self {
            wavelengths_m,
            alpha_db_per_km: alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationSpectrum {
    pub wavelengths_m: Vec<f64>,
    pub alpha_lens: Vec<f64>,
    pub alpha_gas: Vec<f64>,
    pub alpha_align: Vec<f64>,
    pub alpha_tot: Vec<f64>,
}

impl AttenuationSpectrum {
    pub fn len(&self) -> usize {
        self.wavelengths_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths_m.is_empty()
    }
}

/// Pointwise sum of the lens, gas and alignment contributions.
pub fn total_attenuation(
    lens: &ComponentSpectrum,
    gas: &ComponentSpectrum,
    align: &ComponentSpectrum,
) -> Result<AttenuationSpectrum> {
    let grid = &lens.wavelengths_m;
    if gas.wavelengths_m != *grid || align.wavelengths_m != *grid {
        return Err(VbgError::GridMismatch);
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(VbgError::invalid(
            "wavelength grid",
            "must be strictly increasing",
        ));
    }
    for component in [lens, gas, align] {
        if component.alpha_db_per_km.len() != grid.len() {
            return Err(VbgError::GridMismatch);
        }
        if let Some(bad) = component
            .alpha_db_per_km
            .iter()
            .find(|a| !(a.is_finite() && **a >= 0.0))
        {
            return Err(VbgError::invalid(
                "alpha",
                format!("attenuation must be >= 0, got {bad}"),
            ));
        }
    }
    let alpha_tot = (0..grid.len())
        .map(|i| lens.alpha_db_per_km[i] + gas.alpha_db_per_km[i] + align.alpha_db_per_km[i])
        .collect();
    Ok(AttenuationSpectrum {
        wavelengths_m: grid.clone(),
        alpha_lens: lens.alpha_db_per_km.clone(),
        alpha_gas: gas.alpha_db_per_km.clone(),
        alpha_align: align.alpha_db_per_km.clone(),
        alpha_tot,
    })
}

/// Two-way capacity per mode, `-log2(1 - 10^(-0.1 alpha L))`.
pub fn q2(alpha_db_per_km: f64, length_km: f64) -> Result<f64> {
    if !(alpha_db_per_km.is_finite() && alpha_db_per_km >= 0.0) {
        return Err(VbgError::invalid(
            "alpha_db_per_km",
            format!("must be >= 0, got {alpha_db_per_km}"),
        ));
    }
    if !(length_km.is_finite() && length_km >= 0.0) {
        return Err(VbgError::invalid(
            "length_km",
            format!("must be >= 0, got {length_km}"),
        ));
    }
    let loss_db = alpha_db_per_km * length_km;
    if loss_db < MIN_TOTAL_LOSS_DB {
        return Err(VbgError::DivergentCapacity {
            total_loss_db: loss_db,
            context: format!(" (L = {length_km} km)"),
        });
    }
    // 1 - eta computed without cancellation
    let one_minus_eta = -(-0.1 * loss_db * LN_10).exp_m1();
    Ok(-one_minus_eta.log2())
}

/// Per-mode capacities across a band and their frequency integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// `q2` at every grid point of the spectrum.
    pub q2: Vec<f64>,
    pub band_min_m: f64,
    pub band_max_m: f64,
    pub nu_min_hz: f64,
    pub nu_max_hz: f64,
    /// Qubits per second.
    pub q2_integrated: f64,
    pub total_length_km: f64,
    /// Adjacent in-band `q2` values differ by more than 20 %.
    pub under_resolved: bool,
}

/// Integrates `q2` over optical frequency for `lambda in [band_min, band_max]`
/// with the trapezoid rule on the wavelength grid and the `c / lambda^2`
/// Jacobian. Band edges between grid points are linearly interpolated.
pub fn band_capacity(
    spectrum: &AttenuationSpectrum,
    total_length_km: f64,
    band_min_m: f64,
    band_max_m: f64,
) -> Result<CapacityResult> {
    let grid = &spectrum.wavelengths_m;
    if grid.is_empty() {
        return Err(VbgError::invalid("wavelength grid", "is empty"));
    }
    if band_min_m > band_max_m {
        return Err(VbgError::invalid(
            "band",
            format!("min {band_min_m} exceeds max {band_max_m}"),
        ));
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let slack = 1e-12 * hi;
    if band_min_m < lo - slack || band_max_m > hi + slack {
        return Err(VbgError::BandOutOfRange {
            min_m: band_min_m,
            max_m: band_max_m,
            grid_min_m: lo,
            grid_max_m: hi,
        });
    }
    let band_min_m = band_min_m.max(lo);
    let band_max_m = band_max_m.min(hi);

    let q2s = spectrum
        .alpha_tot
        .iter()
        .map(|&a| q2(a, total_length_km))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            VbgError::DivergentCapacity { total_loss_db, .. } => VbgError::DivergentCapacity {
                total_loss_db,
                context: format!(" at L = {total_length_km} km"),
            },
            other => other,
        })?;

    let integrand: Vec<f64> = grid
        .iter()
        .zip(&q2s)
        .map(|(&wl, &q)| q * SPEED_OF_LIGHT / (wl * wl))
        .collect();
    let integral = trapezoid_between(grid, &integrand, band_min_m, band_max_m);

    let first = grid.partition_point(|&x| x < band_min_m);
    let last = grid.partition_point(|&x| x <= band_max_m);
    let under_resolved = q2s[first.min(q2s.len())..last.max(first)]
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() > 0.2 * w[0].max(w[1]));
    if under_resolved {
        log::warn!(
            "wavelength grid under-resolves q2 (adjacent values differ by > 20 %); refine the grid"
        );
    }

    Ok(CapacityResult {
        q2: q2s,
        band_min_m,
        band_max_m,
        nu_min_hz: SPEED_OF_LIGHT / band_max_m,
        nu_max_hz: SPEED_OF_LIGHT / band_min_m,
        q2_integrated: integral,
        total_length_km,
        under_resolved,
    })
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[xs.len() - 1];
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Trapezoid integral of the piecewise-linear interpolant of `(xs, ys)` over `[a, b]`.
pub fn trapezoid_between(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut nodes = vec![(a, interpolate(xs, ys, a))];
    let start = xs.partition_point(|&x| x <= a);
    let end = xs.partition_point(|&x| x < b);
    for i in start..end {
        nodes.push((xs[i], ys[i]));
    }
    nodes.push((b, interpolate(xs, ys, b)));
    nodes
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}
