use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("unsupported for this subordinator: {0}")]
    Unsupported(String),

    #[error(
        "quadrature did not converge on [{a:e}, {b:e}]: value {value:e}, error {abs_err:e} after {subdivisions} subdivisions"
    )]
    Quadrature {
        a: f64,
        b: f64,
        value: f64,
        abs_err: f64,
        subdivisions: usize,
    },

    #[error("no regime matches: {0}")]
    Dispatch(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn range<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Range(msg.into()))
}
