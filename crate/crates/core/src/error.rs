use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian: asymmetry {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("not positive: eigenvalue {eigenvalue:e} below -{tol:e}")]
    NotPositive { eigenvalue: f64, tol: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("frame has no elements")]
    EmptyFrame,

    #[error("not a frame: {0}")]
    NotAFrame(String),

    #[error("vector lies outside the module: residual {residual:e}")]
    VectorOutsideModule { residual: f64 },

    #[error("operator is not a partial isometry: residual {residual:e}")]
    NotPartialIsometry { residual: f64 },

    #[error("element counts differ: {0} vs {1}")]
    CountMismatch(usize, usize),

    #[error("Gram matrices differ: distance {distance:e} exceeds {tol:e}")]
    GramMismatch { distance: f64, tol: f64 },

    #[error("frame is not normalized tight (bounds {lower}, {upper})")]
    NotNormalizedTight { lower: f64, upper: f64 },

    #[error("frame element {0} is zero")]
    ZeroElement(usize),

    #[error("not a Riesz basis: {0}")]
    NotRieszBasis(String),

    #[error("not a basis: {elements} vectors span a {rank}-dimensional space")]
    NotABasis { elements: usize, rank: usize },

    #[error("expansion residual {residual:e} exceeds {tol:e}")]
    ExpansionResidualTooLarge { residual: f64, tol: f64 },

    #[error("resolution of the identity failed: {0}")]
    ResolutionFailed(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable variant name, used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositive { .. } => "NotPositive",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::EmptyFrame => "EmptyFrame",
            Error::NotAFrame(_) => "NotAFrame",
            Error::VectorOutsideModule { .. } => "VectorOutsideModule",
            Error::NotPartialIsometry { .. } => "NotPartialIsometry",
            Error::CountMismatch(..) => "CountMismatch",
            Error::GramMismatch { .. } => "GramMismatch",
            Error::NotNormalizedTight { .. } => "NotNormalizedTight",
            Error::ZeroElement(_) => "ZeroElement",
            Error::NotRieszBasis(_) => "NotRieszBasis",
            Error::NotABasis { .. } => "NotABasis",
            Error::ExpansionResidualTooLarge { .. } => "ExpansionResidualTooLarge",
            Error::ResolutionFailed(_) => "ResolutionFailed",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
