use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid flow scale {0}: must be a positive rational")]
    InvalidScale(String),

    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("element is not in the centralizer of A: {0}")]
    NotInCentralizer(String),

    #[error("cannot parse rational {input:?}: {reason}")]
    ParseRational { input: String, reason: String },

    #[error("enumeration budget of {budget} candidates exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    SearchCapExceeded { size: String, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("curve image lies in a proper affine subspace; required: not contained in a proper affine subspace")]
    DegenerateCurve,

    #[error("zero derivative at s = {0}")]
    ZeroDerivative(String),

    #[error("decomposition undefined: top-left entry is zero")]
    DecompositionUndefined,

    #[error("representation dimension {dim} exceeds the cap of {cap}")]
    RepresentationTooLarge { dim: usize, cap: usize },

    #[error("points do not form an affine basis of Q^{0}")]
    NotAffineBasis(usize),

    #[error("e.f = {0}, expected 1")]
    NotNormalized(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by an enumeration or search budget rather than
    /// by a violated precondition.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SearchCapExceeded { .. })
    }
}
