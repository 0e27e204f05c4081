use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("game needs at least one proposer and one responder (got K={proposers}, L={responders})")]
    EmptyGame { proposers: usize, responders: usize },

    #[error("solver requires K >= 2 and L >= 2 (got K={proposers}, L={responders})")]
    TooFewPlayers { proposers: usize, responders: usize },

    #[error("expected {expected} offers, got {found}")]
    OfferCount { expected: usize, found: usize },

    #[error("offer {index} out of range: {value}")]
    OfferOutOfRange { index: usize, value: f64 },

    #[error("expected {expected} strategy rows, got {found}")]
    RowCount { expected: usize, found: usize },

    #[error("strategy row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },

    #[error("strategy row {row}, entry {index} is not a probability: {value}")]
    BadProbability { row: usize, index: usize, value: f64 },

    #[error("strategy row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },

    #[error("degenerate all-zero offers")]
    DegenerateOffers,

    #[error("enumeration of {combinations} outcomes exceeds the limit of {limit}")]
    InstanceTooLarge { combinations: f64, limit: f64 },

    #[error("parameters outside the valid region: {0}")]
    OutOfRegion(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stencil around offer {offer} crosses a regime boundary (active set changes)")]
    RegimeChange { offer: f64 },

    #[error("simplex drift {drift:e} at t={time} exceeds tolerance; reduce the step size")]
    SimplexDrift { drift: f64, time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
