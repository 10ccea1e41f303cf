use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet size {0} out of range (expected 1..=26)")]
    AlphabetSize(usize),

    #[error("letter {letter} out of range for {m} generators")]
    LetterOutOfRange { letter: i32, m: usize },

    #[error("cannot parse word {text:?}: {reason}")]
    ParseWord { text: String, reason: String },

    #[error("word {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),

    #[error("empty relator")]
    EmptyRelator,

    #[error("empty relator list")]
    EmptyRelators,

    #[error("enumeration of {requested} items exceeds budget of {limit}")]
    BudgetExceeded { requested: u128, limit: u64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("small-cancellation parameter {0} outside (0, 1/6]")]
    LambdaOutOfRange(String),

    #[error("relators fail C'({lambda}): piece {piece} of length {length}")]
    CPrimeViolated { lambda: String, piece: String, length: usize },

    #[error("presentation mode mismatch: expected {expected}")]
    ModeMismatch { expected: &'static str },

    #[error("exponent q = {0} must be at least 2")]
    ExponentTooSmall(u32),

    #[error("a occurs an odd number of times in {0}")]
    OddACount(String),

    #[error("cannot parse oracle sequence {text:?}: {reason}")]
    ParseOracle { text: String, reason: String },

    #[error("fingerprints live in different spaces ({0})")]
    Incomparable(String),

    #[error("fingerprint radius {have} does not match requested radius {want}")]
    RadiusMismatch { have: u32, want: u32 },

    #[error("malformed fingerprint data: {0}")]
    ParseFingerprint(String),

    #[error("empty input")]
    EmptyInput,

    #[error("exhaustive lattice enumeration refused for m = {m}; upper bound is {bound}")]
    ExhaustiveRefused { m: usize, bound: u128 },

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
}

impl Error {
    /// Resource refusals, as opposed to malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::ExhaustiveRefused { .. })
    }
}
