use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("constant term is zero; series is not invertible")]
    NonUnitConstantTerm,
    #[error("substitution image {0} has a nonzero constant term")]
    NonzeroConstantTermInImage(usize),
    #[error("valid order {0} is too low for evaluation at the origin")]
    InsufficientValidOrder(i32),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix size {0} exceeds the determinant limit of {limit}", limit = crate::jet::MAX_DET_SIZE)]
    SizeLimitExceeded(usize),
    #[error("ragged rows: expected length {expected}, found {found}")]
    RaggedRows { expected: usize, found: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("zero jet has no s-factor")]
    ZeroJet,

    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("{key} is not real-valued: conj({key}) differs from {key}")]
    RealityViolation { key: String },
    #[error("{key} violates the base-point normalization: {msg}")]
    BasePointViolation { key: String, msg: String },
    #[error("input has no [map] section")]
    MissingMapSection,
    #[error("io error: {0}")]
    Io(String),

    #[error("integrability violated: L_{j} b^{k}_{mu} != L_{k} b^{j}_{mu}")]
    IntegrabilityViolation { j: usize, k: usize, mu: usize },
    #[error("lambda antisymmetry violated at ({j}, {k}, {mu})")]
    AntisymmetryViolation { j: usize, k: usize, mu: usize },
    #[error("det of the s-Jacobian matrix vanishes at the origin")]
    NonUnitDeterminant,

    #[error("order budget exceeded: requires input order >= {required}, have {available}")]
    OrderBudgetExceeded { required: u32, available: u32 },

    #[error("no factored form (gamma exponents) given")]
    MissingFactoredForm,
    #[error("factored form invalid: {0}")]
    InvalidFactoredForm(String),
    #[error("gamma constraint violated: {0}")]
    GammaConstraintViolated(String),

    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient terms: need {needed}, have {available}")]
    InsufficientTerms { needed: usize, available: usize },
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("infimum search did not stabilise within {0} terms")]
    NoStopReached(usize),
    #[error("empty grid")]
    EmptyGrid,
}

impl Error {
    /// Resource errors (order budget) as opposed to input errors.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::OrderBudgetExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
