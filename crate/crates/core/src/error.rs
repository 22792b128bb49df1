use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("occupation {occupation} on mode {mode} violates cutoff {cutoff}")]
    CutoffViolation {
        mode: usize,
        occupation: usize,
        cutoff: usize,
    },

    #[error("mode {mode} out of range for a {modes}-mode space")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("mode {0} listed more than once")]
    DuplicateMode(usize),

    #[error("mode list must not be empty")]
    EmptyModeSet,

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),

    #[error("operands live on different Fock spaces")]
    SpaceMismatch,

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("density matrix trace is {0}, expected 1")]
    NotUnitTrace(f64),

    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("Kraus operators are not complete (max deviation {0:e})")]
    IncompleteKraus(f64),

    #[error("parameter `{name}` = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("truncation leakage: norm loss {0:e} exceeds tolerance")]
    Leakage(f64),

    #[error("loss on a pure state needs a random source")]
    MissingRandomSource,

    #[error("signal has weight {0:e} outside span{{|00>, |01>, |10>}}")]
    RepresentationViolation(f64),

    #[error("success probability is zero")]
    ZeroSuccess,
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
