use thiserror::Error;

/// Errors raised by the library. Natural process termination is not an error
/// and is reported through `Option`/`completed_steps` instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("log pn nonpositive: p*n = {pn} must exceed 1")]
    LogPnNonpositive { pn: f64 },

    #[error("degenerate process length: k = floor({raw}) < 1")]
    DegenerateProcess { raw: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("structurally invalid cover: {0}")]
    StructuralInvalid(String),

    #[error("no independent set of size {k} exists in the host")]
    NoIndependentSet { k: usize },

    #[error("rejection sampling gave up after {attempts} attempts; use exact mode")]
    RejectionInfeasible { attempts: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
