use thiserror::Error;

/// Typed failures surfaced by the toolkit.
///
/// Null-set events (ties, dyadic boundaries) are reported here rather than
/// looping forever; every sampler and enclosure routine is bounded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("divisor interval contains zero")]
    DivisorStraddlesZero,
    #[error("bit budget of {budget} exhausted before the result was decided")]
    BudgetExceeded { budget: u64 },
    #[error("enclosure still meets a dyadic boundary at digit {digit}")]
    DyadicBoundary { digit: u64 },
    #[error("measure does not support this query")]
    UnsupportedRepresentation,
    #[error("no admissible radius found within effort {effort}")]
    SearchBudgetExceeded { effort: u32 },
    #[error("conditioning event has no certified positive mass")]
    NullConditioningEvent,
    #[error("machine index {index} out of range for table of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("conditioning atom has zero marginal mass")]
    NullAtom,
    #[error("witness enclosure does not isolate an integer")]
    WitnessUnresolved,
    #[error("target accuracy not reached within the effort ceiling")]
    EffortExceeded,
    #[error("evidence could not be bounded away from zero")]
    VanishingEvidence,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DivisorStraddlesZero => "DivisorStraddlesZero",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DyadicBoundary { .. } => "DyadicBoundary",
            Error::UnsupportedRepresentation => "UnsupportedRepresentation",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::NullConditioningEvent => "NullConditioningEvent",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::NullAtom => "NullAtom",
            Error::WitnessUnresolved => "WitnessUnresolved",
            Error::EffortExceeded => "EffortExceeded",
            Error::VanishingEvidence => "VanishingEvidence",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
