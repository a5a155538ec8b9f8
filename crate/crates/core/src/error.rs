use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("occupation {value} at position {position} is not 0 or 1")]
    InvalidOccupation { position: usize, value: u8 },
    #[error("mode index {index} out of range for {n_modes} modes")]
    InvalidMode { index: usize, n_modes: usize },
    #[error("number of modes {0} outside the supported range 1..={max}", max = crate::fockstate::MAX_MODES)]
    ModeCount(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("no admissible partition for {n_modes} modes with at least {min_blocks} blocks")]
    NoAdmissiblePartition { n_modes: usize, min_blocks: usize },
    #[error("parameter `{name}` = {value} outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("empty sample list")]
    EmptySamples,
    #[error("fixture: {0}")]
    Fixture(String),
}
