use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at mu = {mu}: {reason} (mu_max = {mu_max})")]
    Integrator {
        mu: Complex64,
        reason: String,
        mu_max: f64,
    },

    #[error("parameter {param} is too close to the spectrum (|det| = {det:.3e}, threshold {threshold:.3e})")]
    SingularParameter {
        param: Complex64,
        det: f64,
        threshold: f64,
    },

    #[error("function vanishes on the contour near {at} (min modulus {min_modulus:.3e})")]
    ZeroOnContour { at: Complex64, min_modulus: f64 },

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("residue radius selection failed at {center}: {reason}")]
    RadiusSelection { center: Complex64, reason: String },

    #[error("contour geometry: {0}")]
    Geometry(String),

    #[error("non-finite integrand value at node {index} (z = {z})")]
    NonFinite { index: usize, z: Complex64 },

    #[error("initial data violates the boundary conditions: {0}")]
    IncompatibleInitialData(String),

    #[error("contour placement: {0}")]
    ContourPlacement(String),

    #[error("singular boundary system: {0}")]
    SingularBoundary(String),

    #[error("grids do not overlap: {0}")]
    DisjointWindows(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Io(_)
            | Error::Syntax { .. }
            | Error::UnknownIdentifier { .. } => 3,
            Error::IncompatibleInitialData(_) | Error::InvalidInput(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
