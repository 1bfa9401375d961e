use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fraction bits {0} outside supported range 96..=128")]
    InvalidBits(u32),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
    #[error("continued fraction of zero is undefined")]
    ZeroInput,
    #[error("triangle legs must satisfy 0 < x1 <= x2 <= 1")]
    InvalidTriangle,
    #[error("grid sizes must be positive")]
    InvalidGrid,
    #[error("polygon has zero area")]
    DegeneratePolygon,
    #[error("polygon is not convex")]
    NonConvexPolygon,
    #[error("index range of length {0} exceeds the enumeration guard")]
    RangeTooLarge(f64),
    #[error("both halves of the box are empty")]
    EmptyBox,
    #[error("continued fraction terminates at depth {available}, {requested} requested")]
    DepthUnavailable { requested: usize, available: usize },
    #[error("need at least 3 records, got {0}")]
    TooFewRecords(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
