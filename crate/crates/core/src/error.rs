use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input failed validation. `field` is a dotted path such as
    /// `pump.w_p`.
    #[error("{field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// `1/v_{g,p} - 1/v_{g,s}` vanishes, so the Fedorov parameter `A` and
    /// everything derived from it diverge.
    #[error("degenerate group velocities: 1/v_g,p - 1/v_g,s = 0")]
    DegenerateGroupVelocities,

    /// A paraxial or narrowband guard was violated.
    #[error("{bound} violated: |{value}| > {limit}")]
    Domain {
        bound: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Convergence(_))
    }
}
