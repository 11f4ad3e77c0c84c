use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("transmission {name} = {value} outside {range}")]
    InvalidTransmission {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("mode index {index} invalid for a {modes}-mode state")]
    InvalidMode { index: usize, modes: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),
    #[error("matrix is singular")]
    Singular,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("both symplectic eigenvalues within {eps:.1e} of 1 while the covariance still depends on T; the Gaussian QFI formula needs a correction term here")]
    DegenerateSpectrum { eps: f64 },
    #[error("state kind {0} is not supported by this operation")]
    UnsupportedState(&'static str),
    #[error("truncation n_max = {n_max} too small: tail mass {tail:.3e}")]
    TruncationTooSmall { n_max: usize, tail: f64 },
    #[error("finite-difference QFI did not converge: F(dT) = {coarse:.10e}, F(dT/2) = {fine:.10e}")]
    StepTooLarge { coarse: f64, fine: f64 },
    #[error("sampler/regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
