use thiserror::Error;

/// Errors produced by the library. Mathematical failures (an obstruction that does
/// not vanish, a morphism that is not invertible) and malformed input share one
/// enum; callers that need to tell them apart use [`Error::is_mathematical`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("{0} is not prime (or exceeds 2^31)")]
    NotPrime(u64),
    #[error("not a subspace: {0}")]
    NotASubspace(String),
    #[error("invalid scalar literal {0:?}")]
    BadScalar(String),

    #[error("invalid coalgebra: {0}")]
    InvalidCoalgebra(String),
    #[error("degree mismatch: expected {expected}, got {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("filtration stabilizes at dimension {reached} below {dim}")]
    NotExhaustive { reached: usize, dim: usize },
    #[error("unsupported search: {0}")]
    UnsupportedSearch(String),
    #[error("coalgebra is not graded")]
    NotGraded,

    #[error("invalid comodule: {0}")]
    InvalidComodule(String),
    #[error("cocycle violation: {0}")]
    CocycleViolation(String),
    #[error("not an extension: {0}")]
    NotAnExtension(String),
    #[error("retract is not normalized: {0}")]
    RetractNotNormalized(String),
    #[error("degree {0} layer is empty")]
    EmptyLayer(usize),
    #[error("coaction not supported on the span of the group-likes: {0}")]
    UnsupportedCoaction(String),

    #[error("coalgebra is not cocommutative")]
    NotCocommutative,
    #[error("coalgebra mismatch: {0}")]
    CoalgebraMismatch(String),
    #[error("no filtration available")]
    NoFiltration,
    #[error("morphism is not invertible: {0}")]
    NotInvertible(String),

    #[error("coface index {index} out of range for degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("multiplication is not of rank one (rank {0})")]
    NotRankOne(usize),
    #[error("comodule is not completely reducible over the given group-likes")]
    NotCompletelyReducible,

    #[error("multiplication is not associative: {0}")]
    NotAssociative(String),
    #[error("obstruction is not a cocycle")]
    ObstructionNotClosed,
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("not unital: {0}")]
    NotUnital(String),
    #[error("invalid cochain: {0}")]
    InvalidCochain(String),
    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),
}

impl Error {
    /// True for failures that are statements about the mathematics of valid input
    /// rather than about the input being malformed.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::NotInvertible(_)
                | Error::NotRankOne(_)
                | Error::NotCompletelyReducible
                | Error::NotUnital(_)
                | Error::NotExhaustive { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
