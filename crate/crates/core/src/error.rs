use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid q: {0} is not an odd prime below 2^16")]
    InvalidModulus(u64),
    #[error("invalid d: {0} (need d >= 3)")]
    InvalidDimension(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value {value} out of range for field of order {q}")]
    OutOfField { value: u64, q: u32 },
    #[error("space too large to enumerate: q^d = {size} exceeds cap {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },
    #[error("empty configuration: |P| = {points}, |S| = {spheres}")]
    EmptyConfig { points: usize, spheres: usize },
    #[error("no nonzero overlaps to stratify")]
    EmptyOverlaps,
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("empty parallel class")]
    EmptyClass,
    #[error("empty hyperplane multiset")]
    EmptyMultiset,
    #[error("monomial basis too large: {size} monomials (cap {cap})")]
    BasisTooLarge { size: String, cap: usize },
    #[error("no direction lies in chart {0}")]
    EmptyChart(usize),
    #[error("chart index {chart} out of range 1..={d}")]
    BadChart { chart: usize, d: usize },
    #[error("pin is the zero vector")]
    ZeroPin,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
