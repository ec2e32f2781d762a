use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Probability mass outside the retained Fock levels exceeds the configured tolerance.
    #[error("truncation insufficient: tail mass {tail:e} exceeds tolerance {tol:e}")]
    TruncationInsufficient { tail: f64, tol: f64 },

    #[error("photon support overflow: {leak:e} of the two-mode weight lies above n_max = {n_max}")]
    SupportOverflow { leak: f64, n_max: usize },

    #[error("local operation is not invertible (|det| = {det:e})")]
    Singular { det: f64 },

    /// A sampled classical state has negative witness expectation, so the
    /// numerically obtained offset underestimates the true maximum.
    #[error("witness check failed: classical expectation {value:e} below -{tol:e}")]
    WitnessViolated { value: f64, tol: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors raised by truncation or overflow guards rather than malformed input.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            Error::TruncationInsufficient { .. }
                | Error::SupportOverflow { .. }
                | Error::WitnessViolated { .. }
        )
    }
}
