use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid Gaussian law: {0}")]
    InvalidLaw(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("Hermite order {0} exceeds the supported maximum of 8")]
    HermiteOrder(usize),
    #[error("variance parameter {given} does not match sigma_N = {expected} of the field")]
    SigmaMismatch { given: f64, expected: f64 },
    #[error("unsupported interaction order k = {0}")]
    UnsupportedOrder(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("covariance check failed: {0}")]
    Covariance(String),
    #[error("ensemble format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
