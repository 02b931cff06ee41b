use thiserror::Error;

pub type Result<T> = std::result::Result<T, VbgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VbgError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unstable geometry: (1 - L0/(2f))^2 = {stability} is not < 1 (L0 = {lens_spacing_m} m, f = {focal_length_m} m)")]
    UnstableGeometry {
        lens_spacing_m: f64,
        focal_length_m: f64,
        stability: f64,
    },

    #[error("invalid loss ratio {0}: must lie in [0, 1)")]
    InvalidLoss(f64),

    #[error("parse error at line {line}, column `{column}`: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("unit error at line {line}: {message}")]
    Unit { line: usize, message: String },

    #[error("wavelength {wavelength_nm} nm outside table range [{min_nm}, {max_nm}] nm")]
    OutsideTable {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("misalignment bound violated: 1 - l_align = {remaining} <= 0")]
    BoundViolation { remaining: f64 },

    #[error("quadrature grid extent {extent_m} m is below 5 w(z) = {required_m} m")]
    Quadrature { extent_m: f64, required_m: f64 },

    #[error("attenuation spectra are defined on different wavelength grids")]
    GridMismatch,

    #[error("capacity diverges: total loss {total_loss_db} dB is below 1e-12 dB{context}")]
    DivergentCapacity { total_loss_db: f64, context: String },

    #[error("band [{min_m}, {max_m}] m lies outside the grid [{grid_min_m}, {grid_max_m}] m")]
    BandOutOfRange {
        min_m: f64,
        max_m: f64,
        grid_min_m: f64,
        grid_max_m: f64,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl VbgError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        VbgError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            VbgError::InvalidParameter { .. }
            | VbgError::UnstableGeometry { .. }
            | VbgError::Parse { .. }
            | VbgError::Unit { .. }
            | VbgError::OutsideTable { .. }
            | VbgError::GridMismatch
            | VbgError::BandOutOfRange { .. }
            | VbgError::Config { .. }
            | VbgError::Io { .. } => 1,
            VbgError::InvalidLoss(_)
            | VbgError::BoundViolation { .. }
            | VbgError::Quadrature { .. }
            | VbgError::DivergentCapacity { .. } => 3,
        }
    }
}
