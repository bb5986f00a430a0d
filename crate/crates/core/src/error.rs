use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot divide by non-monomial expression `{0}`")]
    NonMonomialDenominator(String),
    #[error("eps appears with a negative power")]
    EpsInDenominator,
    #[error("replacement for `{0}` refers to `{0}` or a higher derivative of it")]
    CircularSubstitution(String),
    #[error("no value supplied for symbol `{0}`")]
    MissingSymbol(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("trigonometric product of degree {0} in `{1}` is not reduced")]
    UnreducedTrigPower(u32, String),
    #[error("expression is not linear in the unknown constants: `{0}`")]
    NonlinearInConstants(String),
    #[error("unsupported power: {0}")]
    UnsupportedPower(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("invalid problem: {0}")]
    ValidationError(String),

    #[error("jet order {0} exceeds the configured maximum {1}")]
    MaxOrderExceeded(u32, u32),

    #[error("linear system is inconsistent: {0}")]
    Inconsistent(String),
    #[error("characteristic eta - xi*f0 vanishes")]
    ZeroCharacteristic,
    #[error("distinguished partial derivative of F0 vanishes")]
    ZeroGradient,
    #[error("generator is not an exact symmetry of the unperturbed equation")]
    NotASymmetry,

    #[error("integration produced a non-finite state at x = {0}")]
    NonFiniteState(f64),
    #[error("initial conditions disagree with the approximate solution: {0}")]
    InconsistentICs(String),
}

impl Error {
    /// True for failures that come from splitting a residual into
    /// independent atoms (the symbolic side could not canonicalize).
    pub fn is_split_failure(&self) -> bool {
        matches!(
            self,
            Error::NonMonomialDenominator(_)
                | Error::UnreducedTrigPower(..)
                | Error::NonlinearInConstants(_)
                | Error::EpsInDenominator
                | Error::UnsupportedPower(_)
                | Error::MaxOrderExceeded(..)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
