use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter regime violated: {0}")]
    ParameterRegime(String),
    #[error("degenerate volatility: nu + sigma must be positive")]
    DegenerateVolatility,
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("theta must lie in [0, 1], got {0}")]
    ThetaRange(f64),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("outside the aggregator domain: {0}")]
    Domain(String),
    #[error("Bernoulli exponent must be non-zero")]
    ZeroExponent,
    #[error("Bernoulli bracket is non-positive at t = {t} (value {value})")]
    NonpositiveBase { t: f64, value: f64 },
    #[error("utility level violates (1 - gamma) V > 0: V = {0}")]
    SignError(f64),
    #[error("Monte Carlo oracle needs lambda = 1 (gamma = 1/delta), got lambda = {0}")]
    NotTimeAdditive(f64),
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),
    #[error("equilibrium denominator vanishes: {0}")]
    DenominatorZero(String),
    #[error("chi1 must be positive for agent {agent}, got {value}")]
    Chi1Nonpositive { agent: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Errors caused by the caller's parameters rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ParameterRegime(_)
                | Error::DegenerateVolatility
                | Error::NonPositive { .. }
                | Error::Negative { .. }
                | Error::ThetaRange(_)
                | Error::NonFinite { .. }
                | Error::DimensionMismatch(_)
                | Error::InvalidInput(_)
        )
    }
}
