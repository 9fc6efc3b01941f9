use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Incompatible grids, representations or lengths.
    #[error("structural error: {0}")]
    Structural(String),

    /// Input data that cannot be used (NaN, Inf, wrong sign).
    #[error("data error: {0}")]
    Data(String),

    /// The request lies beyond what the implementation supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, extrapolation or stencil failed to reach its tolerance.
    #[error("accuracy error: {message} (last term magnitude {last_term:e})")]
    Accuracy { message: String, last_term: f64 },

    /// An integrand did not decay before the edge of the domain.
    #[error("truncation error: {message} (edge magnitude {edge_value:e})")]
    Truncation { message: String, edge_value: f64 },

    /// Invalid configuration (CFL violation, empty region, bad parameters).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Evaluation too close to a pole of a meromorphic family.
    #[error("pole proximity: E = {energy_re}{energy_im:+}i is within {distance:e} of a pole")]
    PoleProximity {
        energy_re: f64,
        energy_im: f64,
        distance: f64,
    },

    /// Rate fit impossible because every sample is below the floor.
    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    /// Optimum attained on the boundary of the search interval.
    #[error("search interval error: optimum {optimum} at boundary of [{lo}, {hi}]")]
    SearchInterval { optimum: f64, lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn accuracy(message: impl Into<String>, last_term: f64) -> Self {
        Error::Accuracy {
            message: message.into(),
            last_term,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
