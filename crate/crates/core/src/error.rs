use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration too large: ell = {ell} exceeds the cap of {cap}")]
    EnumerationTooLarge { ell: usize, cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("subordination did not converge at z = {z}: {detail}")]
    Convergence { z: Complex64, detail: String },
    #[error("eigensolver failure: {0}")]
    Solver(String),
    #[error("graph is disconnected")]
    Disconnected,
}

pub type Result<T> = std::result::Result<T, Error>;
