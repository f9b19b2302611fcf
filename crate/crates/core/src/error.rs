use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("negative factorial argument {0}")]
    NegativeArgument(i64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("series known only through grade {available}, grade {requested} requested")]
    InsufficientPrecision { requested: i64, available: i64 },

    #[error("projection needs a 0-form, found form degree {0}")]
    NonzeroFormDegree(usize),

    #[error("term {0} has no factor of hbar to divide by")]
    NotDivisibleByHbar(String),

    #[error("manifold dimension must be even and positive, got {0}")]
    OddDimension(usize),

    #[error("symplectic form is not antisymmetric at ({0}, {1})")]
    NonAntisymmetricOmega(usize, usize),

    #[error("symplectic form is degenerate")]
    DegenerateOmega,

    #[error("connection coefficients are not symmetric: conflicting entry for Gamma_{{{}{}{}}}", .indices[0] + 1, .indices[1] + 1, .indices[2] + 1)]
    AsymmetricConnection { indices: [usize; 3] },

    #[error("f({r},{j},{s},{k},{t}): t out of range")]
    FCoeffRange { r: u32, j: u32, s: u32, k: u32, t: u32 },

    #[error("(A, B) = ({a}, {b}) outside the admissible region for z = {z}")]
    InadmissibleGrade { z: u32, a: u32, b: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("pivot factor vanishes at (A, B) = ({a}, {b}) for b_{{{},{}}}", .var.0, .var.1)]
    ZeroPivot { a: u32, b: u32, var: (u32, u32) },

    #[error("cascade stalled with {remaining} coefficients left")]
    CascadeStuck { remaining: usize },

    #[error("commuting hypothesis violated: r[{0}]∘r[{1}] is nonzero")]
    CommutingHypothesis(u32, u32),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
