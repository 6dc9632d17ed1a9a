use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured maximum of {max}")]
    Capacity { dim: u128, max: u64 },

    #[error("invalid Fock state: {0}")]
    InvalidState(String),

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("unsupported sector: {0}")]
    UnsupportedSector(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("spectrum has {zero_spacings} zero level spacing(s)")]
    DegenerateSpectrum { zero_spacings: usize },

    #[error("energy range is degenerate (E_min == E_max)")]
    DegenerateRange,

    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },

    #[error("vector is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("variance is zero")]
    ZeroVariance,

    #[error("no DOS maximum available for eta = {eta}")]
    MissingDosMax { eta: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error stems from a size limit rather than bad input or numerics.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    /// Whether this error is a numerical failure (convergence, degeneracy, quadrature).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::DegenerateSpectrum { .. }
                | Error::DegenerateRange
                | Error::NotNormalized { .. }
                | Error::ZeroVariance
                | Error::Quadrature(_)
        )
    }
}
