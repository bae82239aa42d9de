use thiserror::Error;

use crate::geometry::Signature;
use crate::spherical::Evaluation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(Signature, Signature),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Refinement stopped before meeting its tolerance; `best` is the last iterate.
    #[error("no convergence: {message} (best estimate {}{:+}i, err_est {:e})", best.value.re, best.value.im, best.err_est)]
    Convergence { message: String, best: Evaluation },
}

impl Error {
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}
