use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimensions must be at least 1x1 (got {rows}x{cols})")]
    ZeroDimension { rows: usize, cols: usize },

    #[error("training too short: t_s = {t_s} < M = {m}; need at least one training symbol per transmit antenna")]
    TrainingTooShort { t_s: usize, m: usize },

    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("all channel gains are zero")]
    ZeroChannel,

    #[error("transmit power {p} W exceeds P_max = {p_max} W")]
    PowerAboveMax { p: f64, p_max: f64 },

    #[error("no closed-form success probability for a {m}x{n} link (needs min(M, N) = 1)")]
    ClosedFormUnavailable { m: usize, n: usize },

    #[error("no sign change in [{lo}, {hi}]: {detail}")]
    NoBracket { lo: f64, hi: f64, detail: String },

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
