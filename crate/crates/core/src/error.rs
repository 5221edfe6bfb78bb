//! Error type shared by all modules.

use alloc::string::String;
use thiserror::Error;

/// Errors produced while building scenarios or evaluating objectives.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A sample point coincides with a base station position; the pathloss
    /// is undefined there. Grids must not place samples on stations.
    #[error("sample point coincides with base station {bs_index} (zero 3D distance)")]
    CoLocatedSample { bs_index: usize },

    /// Signal, interference, and noise are all zero at some point.
    #[error("SINR undefined: zero signal, zero interference, and zero noise")]
    UndefinedSinr,

    /// The mean-RSS objective has no power gradient: without interference the
    /// optimum is always maximum transmit power.
    #[error("power gradient is not defined for the RSS objective")]
    RssPowerGradient,

    /// A configuration or scenario field violates its invariant.
    #[error("invalid {field}: {message}")]
    InvalidParameter { field: &'static str, message: String },

    /// A region produced no sample points after gridding.
    #[error("region `{region}` produced no sample points")]
    EmptyRegion { region: String },

    /// The whole sample grid is empty.
    #[error("sample grid is empty")]
    EmptySampleSet,

    /// Mismatched vector lengths between a deployment and its companions.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The objective evaluated to a non-finite value during optimization.
    #[error("objective became non-finite ({value}) during {context} (outer iteration {outer})")]
    NonFiniteObjective {
        value: f64,
        context: &'static str,
        outer: u32,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
