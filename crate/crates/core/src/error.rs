use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DwError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible slice: k = {k} outside [{lo}, {hi}]")]
    Infeasible { k: f64, lo: f64, hi: f64 },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("phase undefined: {0}")]
    UndefinedPhase(String),
    #[error("unstable component: spectral abscissa {0}")]
    Unstable(f64),
    #[error("ill-posed loop: |det(I + D_G D_H)| = {0:e}")]
    IllPosed(f64),
    #[error("frequency response evaluation failed at omega = {0}")]
    Evaluation(f64),
    #[error("frequency grid too coarse near omega = {0} (argument step exceeds pi/2)")]
    GridTooCoarse(f64),
    #[error("implication violated: {0}")]
    ImplicationViolation(String),
}

pub type Result<T> = std::result::Result<T, DwError>;
