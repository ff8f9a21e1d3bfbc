use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree/order: l = {l}, m = {m}")]
    InvalidDegree { l: i64, m: i64 },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("angular momentum l = {l} exceeds band {band} maximum {l_max}")]
    Range { band: u32, l: usize, l_max: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("symmetry table line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("symmetry coefficients for l = {l}, rep {rep}, substate {substate} have norm {norm} (expected 1)")]
    Normalization {
        l: usize,
        rep: String,
        substate: usize,
        norm: f64,
    },

    #[error("gradient requested at the coordinate origin")]
    SingularOrigin,

    #[error("rho_max is undefined for topological charge 0")]
    UndefinedForZeroCharge,

    #[error("propagation norm drifted by {drift:.3e} (limit {limit:.1e}); reduce the time step")]
    StepSize { drift: f64, limit: f64 },

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
