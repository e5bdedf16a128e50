use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands of different shape, e.g. matrix conditions over different index sets.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("schedule rejected at step {step}: {reason}")]
    ScheduleRejected { step: usize, reason: String },

    #[error("meet oracle of `{requirement}` failed at step {step}: {reason}")]
    MeetFailure {
        step: usize,
        requirement: String,
        reason: String,
    },

    #[error("payload exhausted: step {step} needs bit {index} but payload has {len} bits")]
    PayloadExhausted { step: usize, index: usize, len: usize },

    #[error("column set {0:?} contains no obstacle")]
    NotAnObstacle(Vec<usize>),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("malformed family: {0}")]
    MalformedFamily(String),

    #[error("resource bound exceeded: {0}")]
    Resource(String),

    #[error("syntax error at {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("undeclared variable `{name}` at {position}")]
    UndeclaredVariable { name: String, position: usize },

    #[error("evaluation undecided for k in {0:?}")]
    UndecidedEvaluation(Vec<usize>),

    #[error("construction invariant violated: {0}")]
    Construction(String),
}
