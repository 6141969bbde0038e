use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Certified sign determination did not terminate below the precision cap.
    #[error("undecidable sign: {what} (precision cap {max_bits} bits)")]
    UndecidableSign { what: String, max_bits: u32 },

    #[error("identical factors: the two exponential factors agree modulo bounded terms")]
    IdenticalFactors,

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("point outside sector: {0}")]
    OutsideSector(String),

    #[error("forbidden matrix entry ({row}, {col}) on {context}: the corresponding hom vanishes")]
    ForbiddenEntry {
        row: usize,
        col: usize,
        context: String,
    },

    #[error("invalid sector cover: {0}")]
    InvalidCover(String),

    #[error("truncation leaves the generated object class: {0}")]
    NotRepresentable(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unresolved reference: {0}")]
    Reference(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::UndecidableSign { .. } => "UNDECIDABLE_SIGN",
            Error::IdenticalFactors => "IDENTICAL_FACTORS",
            Error::RegionMismatch(_) => "REGION_MISMATCH",
            Error::OutsideSector(_) => "OUTSIDE_SECTOR",
            Error::ForbiddenEntry { .. } => "FORBIDDEN_ENTRY",
            Error::InvalidCover(_) => "INVALID_COVER",
            Error::NotRepresentable(_) => "NOT_REPRESENTABLE",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Reference(_) => "REFERENCE_ERROR",
            Error::Io(_) => "IO_ERROR",
        }
    }

    /// Process exit code: 2 for parse/reference problems, 1 for domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Reference(_) | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
