use thiserror::Error;

/// Every failure mode reported by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("grid spacing {spacing} is not commensurate with the half-integer lattice (1/(2h) = {ratio} is not an integer)")]
    NonCommensurateSpacing { spacing: f64, ratio: f64 },
    #[error("bad grid sample count {0}: need a power of two >= 8")]
    BadCount(usize),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shift {shift} is not an integer multiple of the grid spacing {spacing}")]
    NonCommensurateShift { shift: f64, spacing: f64 },
    #[error("matrix is singular (det = {0})")]
    SingularMatrix(f64),
    #[error("windows do not form a partition of unity (max deviation {0:e})")]
    NotAPartition(f64),
    #[error("partition window takes the negative value {0}")]
    NegativeWindow(f64),
    #[error("bad envelope radius {delta}: must be a positive multiple of the spacing {spacing}")]
    BadDelta { delta: f64, spacing: f64 },
    #[error("bad axis: {0}")]
    BadAxis(String),
    #[error("tail too fat: {0}")]
    TailTooFat(String),
    #[error("phase of the chirp is not resolved by the grid: {0}")]
    PhaseUnresolved(String),
    #[error("bad kind: {0}")]
    BadKind(String),
    #[error("empty test battery")]
    EmptyBattery,
    #[error("no transition room: band edge {b} must lie below beta/2 = {half_beta}")]
    NoTransitionRoom { b: f64, half_beta: f64 },
    #[error("sampling rate too low: spectral mass {mass:e} outside (-{half_beta}, {half_beta})")]
    NyquistViolation { mass: f64, half_beta: f64 },
    #[error("time and frequency paths disagree: residual {residual:e} > tolerance {tolerance:e}")]
    PathDisagreement { residual: f64, tolerance: f64 },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown demo `{0}`")]
    UnknownDemo(String),
}

pub type Result<T> = std::result::Result<T, Error>;
