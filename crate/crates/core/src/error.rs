use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The model violates (A1) positivity of the stiffness, (A2) nonnegativity
    /// of the damping, or is malformed.
    #[error("invalid model: {reason}")]
    InvalidModel { reason: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("eigenvector basis of the cluster at {re}{im:+}i is rank deficient")]
    IllConditionedCluster { re: f64, im: f64 },
    #[error("mixed-sign eigenvalue cluster at {re}{im:+}i blocks the invariant splitting")]
    MixedClusterObstruction { re: f64, im: f64 },
    #[error(
        "overdamping detectors disagree: margin {margin:e} but definiteness line search minimum {line_search_min:e}"
    )]
    OptimizerDisagreement { margin: f64, line_search_min: f64 },
    #[error("condition (iii) needs a declared essential-spectrum proxy for non-beam models")]
    MissingEssentialSpectrumProxy,
    #[error("λ = {re}{im:+}i lies within {distance:e} of the spectrum")]
    NearSpectrum { re: f64, im: f64, distance: f64 },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
}

impl Error {
    pub(crate) fn invalid_model(reason: impl Into<String>) -> Self {
        Self::InvalidModel {
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid_input(reason: impl Into<String>) -> Self {
        Self::InvalidInput {
            reason: reason.into(),
        }
    }

    /// True for failures of numerical kernels or cross-checks, as opposed to
    /// rejected inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Self::InvalidModel { .. } | Self::InvalidInput { .. } | Self::MissingEssentialSpectrumProxy
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
