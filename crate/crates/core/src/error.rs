use crate::field::Site;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (must be between 1 and {max})", max = crate::field::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("rank comparison of a site with itself: {0}")]
    SameSite(Site),

    #[error("boundary condition assigns site {0} which lies inside the region")]
    BoundaryInsideRegion(Site),

    #[error("region is empty")]
    EmptyRegion,

    #[error("armour overflow: {} members found, search left the radius-{cap} box", partial.len())]
    ArmourOverflow { cap: u32, partial: Vec<Site> },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// Usage errors are caused by the caller's input; everything else is a
    /// runtime failure.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::DimensionMismatch { .. }
            | Error::UnsupportedDimension(_)
            | Error::SameSite(_)
            | Error::BoundaryInsideRegion(_)
            | Error::EmptyRegion
            | Error::InvalidArgument { .. } => true,
            Error::Replicate { source, .. } => source.is_usage(),
            _ => false,
        }
    }

    /// Strips replicate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root(),
            e => e,
        }
    }
}
