use thiserror::Error;

/// Errors raised by profile handling, rules and checkers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown alternative label `{0}`")]
    UnknownLabel(String),
    #[error("alternative `{0}` appears more than once in an order")]
    DuplicateAlternative(String),
    #[error("alternative `{0}` is missing from an order")]
    MissingAlternative(String),
    #[error("empty indifference class")]
    EmptyClass,
    #[error("alternative {0} is outside the universe")]
    NotInUniverse(usize),
    #[error("agent {0} is outside the electorate")]
    NoSuchAgent(usize),
    #[error("empty set of alternatives")]
    EmptySet,
    #[error("electorate would become empty")]
    EmptyElectorate,
    #[error("profile needs at least one agent and one alternative")]
    EmptyProfile,
    #[error("index {index} out of range for {m} alternatives")]
    IndexOutOfRange { index: u128, m: usize },
    #[error("negative probability for alternative {0}")]
    NegativeProbability(usize),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("universe mismatch: {0} vs {1} alternatives")]
    UniverseMismatch(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("scoring vector is not strictly decreasing")]
    NotDecreasing,
    #[error("agent {0} reports a tie; strict preferences required")]
    TiedPreference(usize),
    #[error("invalid permutation of {0} agents")]
    InvalidPermutation(usize),
    #[error("{what} = {value} exceeds the configured cap {cap}")]
    OverCap {
        what: &'static str,
        value: u128,
        cap: u128,
    },
    #[error("count overflow for {0} alternatives")]
    Overflow(usize),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
