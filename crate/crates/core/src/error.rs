use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("expression divides by the zero polynomial")]
    ZeroDenominator,

    #[error("expression has a pole at lambda = {lambda}")]
    PoleAtLambda { lambda: f64 },

    #[error("expression is eventually negative as lambda grows")]
    EventuallyNegative,

    #[error("format error: {0}")]
    Format(String),

    #[error("rate `{key}`: {source}")]
    Rate { key: String, source: Box<Error> },

    #[error("duplicate state `{0}`")]
    DuplicateState(String),

    #[error("rate key `{key}` names unknown state `{state}`")]
    UnknownStateInRateKey { key: String, state: String },

    #[error("rate {from}->{to} is negative ({value}) at lambda = {lambda}")]
    NegativeRate {
        from: String,
        to: String,
        lambda: f64,
        value: f64,
    },

    #[error("the slow state space is empty")]
    EmptySlowSpace,

    #[error("slow states with zero limiting exit rate: {0:?}")]
    ZeroSlowExitRate(Vec<String>),

    #[error("reduced chain undefined: fast states {0:?} cannot reach the slow state space")]
    ReducedChainUndefined(Vec<String>),

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("generator is not irreducible")]
    NotIrreducible,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("state labels do not match")]
    LabelMismatch,

    #[error("path {path} did not reach the slow state space within {budget} jumps")]
    PathBudgetExceeded { path: u64, budget: u64 },

    #[error("chain is not affine in lambda; offending rates: {keys:?}")]
    NotSingularlyPerturbed { keys: Vec<String> },

    #[error("fast states {states:?} form a recurrent class of the lambda-scaled generator")]
    FastRecurrentClass { states: Vec<String> },

    #[error("not a generator: {0}")]
    NotAGenerator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::PoleAtLambda { .. } => "PoleAtLambda",
            Error::EventuallyNegative => "EventuallyNegative",
            Error::Format(_) => "FormatError",
            Error::Rate { source, .. } => source.kind(),
            Error::DuplicateState(_) => "DuplicateState",
            Error::UnknownStateInRateKey { .. } => "UnknownStateInRateKey",
            Error::NegativeRate { .. } => "NegativeRate",
            Error::EmptySlowSpace => "EmptySlowSpace",
            Error::ZeroSlowExitRate(_) => "ZeroSlowExitRate",
            Error::ReducedChainUndefined(_) => "ReducedChainUndefined",
            Error::SingularSystem => "SingularSystem",
            Error::NotIrreducible => "NotIrreducible",
            Error::NonFinite(_) => "NonFinite",
            Error::LabelMismatch => "LabelMismatch",
            Error::PathBudgetExceeded { .. } => "PathBudgetExceeded",
            Error::NotSingularlyPerturbed { .. } => "NotSingularlyPerturbed",
            Error::FastRecurrentClass { .. } => "FastRecurrentClass",
            Error::NotAGenerator(_) => "NotAGenerator",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
