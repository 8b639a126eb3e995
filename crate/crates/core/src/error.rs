use std::fmt;

/// Every failure surfaced by the toolkit.
///
/// Variants are grouped by [`Error::class`] so front ends can map them to
/// exit codes without matching on every case.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("negative weight {weight} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, weight: f64 },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("self-loop at vertex {0} is not allowed in a Laplacian adjacency")]
    SelfLoop(usize),
    #[error("vertex {0} has zero out-degree")]
    ZeroDegreeVertex(usize),
    #[error("kernel vector is zero")]
    ZeroKernelVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix has no nonzero entries")]
    EmptyMatrix,
    #[error("patch deficits disagree: rows {rows}, columns {cols}")]
    DeficitMismatch { rows: f64, cols: f64 },
    #[error("sampled matrix exceeds its degree target at index {index} by {excess}")]
    TargetExceeded { index: usize, excess: f64 },
    #[error("sparsifier failed verification after {0} resamples")]
    OversampleExhausted(usize),
    #[error("vector norms differ: |x|_1 = {x}, |y|_1 = {y}")]
    NormMismatch { x: f64, y: f64 },
    #[error("row and column sums differ at {index} by {defect}")]
    RowColMismatch { index: usize, defect: f64 },
    #[error("Laplacian is not Eulerian: row {row} has defect {defect}")]
    NotEulerian { row: usize, defect: f64 },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("decomposition did not terminate within {rounds} rounds")]
    NonterminatingDecomposition { rounds: usize },
    #[error("vertex set is empty")]
    EmptySet,
    #[error("vertex set contains every vertex")]
    FullSet,
    #[error("chain level {level} kernel drifted by {drift}")]
    ChainKernelDrift { level: usize, drift: f64 },
    #[error("operator application budget exceeded: {used} > {cap}")]
    RecursionBudgetExceeded { used: u64, cap: u64 },
    #[error("spectral gap estimate failed: {0}")]
    LambdaEstimateFailed(String),
    #[error("iteration diverged: contraction estimate {0}")]
    Divergence(f64),
    #[error("inner solver failed: {0}")]
    InnerSolverFailure(String),
    #[error("dimension {n} exceeds dense cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("kernels of the compared matrices differ (residual {0})")]
    KernelMismatch(f64),
    #[error("symmetrization is not PSD (min eigenvalue {0})")]
    NotPsdSymmetrization(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification of an [`Error`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// The input or parameters were rejected.
    Validation,
    /// A numerical procedure did not meet its contract.
    Numerical,
    /// Reading or writing failed.
    Io,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorClass::Validation => "validation",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Io => "io",
        })
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            OversampleExhausted(_)
            | NonterminatingDecomposition { .. }
            | ChainKernelDrift { .. }
            | RecursionBudgetExceeded { .. }
            | LambdaEstimateFailed(_)
            | Divergence(_)
            | InnerSolverFailure(_)
            | DeficitMismatch { .. }
            | TargetExceeded { .. } => ErrorClass::Numerical,
            Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
