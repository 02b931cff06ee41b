//! Optical loss budget and quantum channel capacity of vacuum beam guides:
//! periodic arrays of thin lenses in an evacuated tube.
//!
//! The crate computes the three attenuation contributions of a guide
//! (lens loss, residual-gas absorption, misalignment), combines them into a
//! total attenuation spectrum, and turns that into the two-way quantum
//! capacity per mode and per second. A Laguerre-Gauss mode-expansion
//! propagator checks the analytic misalignment bounds by Monte Carlo.
//!
//! | module | contents |
//! |---|---|
//! | [`optics`] | guide geometry, equivalent confocal resonator, LG modes, dB/km conversion |
//! | [`lens`] | aperture diffraction and per-lens loss budget |
//! | [`gas`] | line-list parsing and Voigt line-by-line absorption |
//! | [`alignment`] | analytic misalignment losses and attenuation bound |
//! | [`modesim`] | mode-expansion propagator and Monte Carlo runs |
//! | [`capacity`] | attenuation aggregation, `q2` and band-integrated `Q2` |
//! | [`orchestrator`] | JSON run configuration, sweeps, optimisation, output files |

pub mod alignment;
pub mod capacity;
pub mod error;
pub mod gas;
pub mod lens;
pub mod modesim;
pub mod optics;
pub mod orchestrator;
pub mod quadrature;

pub use error::{Result, VbgError};
