use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("invalid point `{0}`: {1}")]
    Point(String, String),
    #[error("invalid pseudo-orbit line {line}: {reason}")]
    Orbit { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShadowError {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pseudo-orbit jump of size {size} at index {index} is not below {bound}")]
    JumpTooLarge { index: i64, size: String, bound: String },

    /// A condition the gluing argument relies on failed when re-checked.
    #[error("constants violation in condition {condition} at depth {depth}: {detail}")]
    ConstantsViolation { condition: String, depth: usize, detail: String },

    #[error("tail of the {side} side could not be certified: {detail}")]
    TailUncertified { side: String, detail: String },

    #[error("linear-regime violation: {0}")]
    Regime(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = ShadowError> = std::result::Result<T, E>;
