use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("unknown derivation: {0}")]
    UnknownDerivation(String),
    #[error("overlapping index sets")]
    Overlap,
    #[error("non-canonical Λ-polynomial: {0}")]
    NonCanonical(String),
    #[error("missing structure constant for [{0}_Λ {1}]")]
    MissingStructureConstant(String, String),
    #[error("unsupported N = {0}")]
    UnsupportedN(usize),
    #[error("not superconformal: residual {0}")]
    NotSuperconformal(String),
    #[error("singular 1-jet")]
    SingularJet,
    #[error("odd block is singular")]
    SingularOddBlock,
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("module family does not match: {0}")]
    FamilyMismatch(String),
    #[error("unknown module: {0}")]
    UnknownModule(String),
    #[error("no weight data for {0}")]
    NoWeightData(String),
    #[error("exponential does not terminate below truncation order")]
    NonNilpotentAtOrder,
    #[error("parity error: {0}")]
    Parity(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
