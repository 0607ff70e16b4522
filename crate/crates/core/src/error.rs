use thiserror::Error;

/// Errors produced by code construction, file parsing and the codec.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Text parse failure; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("interleaver design infeasible: {0}")]
    Infeasible(Infeasibility),
}

/// Why an interleaver design could not be completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// Not enough non-sensitive output rows to host every sensitive source position.
    CountingBound { demand: usize, capacity: usize },
    /// The swap budget ran out.
    AttemptsExhausted { attempts: usize, remaining: usize },
    /// Every position was scanned and none could serve as a swap partner.
    NoLegalPartner { remaining: usize },
}

impl std::fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Infeasibility::CountingBound { demand, capacity } => write!(
                f,
                "counting bound violated ({demand} sensitive positions, {capacity} free slots)"
            ),
            Infeasibility::AttemptsExhausted { attempts, remaining } => write!(
                f,
                "swap budget of {attempts} exhausted with {remaining} bad mappings left"
            ),
            Infeasibility::NoLegalPartner { remaining } => write!(
                f,
                "no legal swap partner left, {remaining} bad mappings remain"
            ),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
