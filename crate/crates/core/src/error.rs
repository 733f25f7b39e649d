use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse in GF(2^8)")]
    ZeroInverse,

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("generation mismatch: decoder holds generation {expected}, packet carries {got}")]
    GenerationMismatch { expected: u64, got: u64 },

    #[error("insufficient rank: have {rank}, need {needed}")]
    InsufficientRank { rank: usize, needed: usize },

    #[error("no full-rank {h}x{h} matrix after {attempts} samples; random source looks broken")]
    SingularMatrix { h: usize, attempts: usize },

    #[error("incomplete generation: {have} of {need} packets")]
    IncompleteGeneration { have: usize, need: usize },

    #[error("invalid sync header {0:#04b}; expected 0b01 (data) or 0b10 (control)")]
    InvalidSyncHeader(u8),

    #[error("only {found} disjoint paths available, {needed} required")]
    Infeasible { found: usize, needed: usize },

    #[error("invalid {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
