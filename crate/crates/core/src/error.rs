use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid material parameters: {0}")]
    InvalidParams(String),

    #[error("integrator diverged at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    #[error("numerically singular matrix: {0}")]
    Singular(String),

    #[error("invalid contact geometry: {0}")]
    InvalidGeometry(String),

    #[error("indenter stiffer than measurement: reduced modulus {e_r} with indenter term {indenter_term}")]
    TipStifferThanMeasurement { e_r: f64, indenter_term: f64 },

    #[error("Ngan correction invalid: corrected stiffness inverse {inverse} is not positive")]
    CorrectionInvalid { inverse: f64 },

    #[error("nose detected in unloading branch: {0}")]
    NoseDetected(String),

    #[error("zero experimental displacement at sample {index}")]
    ZeroDisplacement { index: usize },

    #[error("ill-conditioned interpolation matrix (condition estimate {condition:.3e}); adjust the shape parameter")]
    IllConditioned { condition: f64 },

    #[error("forward model failed for columns {columns:?}: {message}")]
    SnapshotFailure { columns: Vec<usize>, message: String },

    #[error("unsupported orthogonal array '{requested}'; supported: {supported}")]
    UnsupportedArray { requested: String, supported: String },

    #[error("no feasible individual in the initial population")]
    InfeasiblePopulation,

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
