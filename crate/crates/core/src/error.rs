use thiserror::Error;

use crate::numtheory::OrderError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("THE NUMBER YOU PICKED IS PRIME, PLEASE TRY AGAIN!!!")]
    PrimeInput(u64),
    #[error("{0} has more than 10 digits; the simulation supports N <= 9999999999")]
    InputTooLarge(u64),
    #[error("{0} is too small to factor; pick a composite N >= 4")]
    InputTooSmall(u64),
    #[error("{qubits} work-register qubits is out of range for N = {n} (allowed {min}..={max})")]
    InvalidQubits {
        n: u64,
        qubits: u32,
        min: u32,
        max: u32,
    },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("malformed transcript: {0}")]
    Transcript(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
