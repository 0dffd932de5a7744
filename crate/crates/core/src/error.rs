use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus is not irreducible over F_{p}")]
    NotIrreducible { p: u32 },
    #[error("field of order {p}^{k} exceeds the supported size")]
    FieldTooLarge { p: u32, k: u32 },
    #[error("{p} is not prime")]
    NotPrime { p: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("operands belong to different field contexts")]
    ContextMismatch,
    #[error("F_{base} is not a subfield of F_{field}")]
    NotASubfield { base: u32, field: u32 },
    #[error("group PGL3(F_{q}) is too large to enumerate")]
    GroupTooLarge { q: u32 },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("degree {0} is too large for this operation")]
    DegreeTooLarge(u32),
    #[error("form is not smooth")]
    NotSmooth,
    #[error("form has a rational point")]
    NotPointless,
    #[error("curve has too few quadratic points for a pinned normal form")]
    NotEnoughQuadraticPoints,
    #[error("counts do not come from an integral real Weil polynomial")]
    NonIntegralReconstruction,
    #[error("unknown campaign `{0}`")]
    UnknownCampaign(String),
    #[error("tile {index} invalid for {bits} tile bits over free dimension {free}")]
    InvalidTile { bits: u32, index: u64, free: u32 },
    #[error("unsupported field order {0}")]
    UnsupportedField(u32),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
