use thiserror::Error;

/// Crate-wide error type. Variants carry the diagnostic residuals the
/// constructors measured, so callers can report *how far* an input was
/// from valid.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("not Hermitian: max |X - X†| entry = {residual:e} > tol {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eig:e} < -{tol:e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("trace is {trace} (|trace - {expected}| > tol {tol:e})")]
    BadTrace { trace: f64, expected: f64, tol: f64 },

    #[error("POVM does not resolve the identity: max residual {residual:e} > tol {tol:e}")]
    PovmIncomplete { residual: f64, tol: f64 },

    #[error("not a probability vector: {reason}")]
    BadDistribution { reason: String },

    #[error("subsystem index {index} out of range (state has {count} subsystems)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid permutation: {reason}")]
    BadPermutation { reason: String },

    #[error("register {index} is not classical: off-diagonal residual {residual:e} > tol {tol:e}")]
    NotClassical {
        index: usize,
        residual: f64,
        tol: f64,
    },

    #[error("conditional probability table violates non-signaling: residual {residual:e} > tol {tol:e}")]
    Signaling { residual: f64, tol: f64 },

    #[error("game is not free: question distribution deviates from a product by {residual:e}")]
    NonFreeGame { residual: f64 },

    #[error("payoff entry {value} at index {index} outside [0,1]")]
    BadPayoff { value: f64, index: usize },

    #[error("budget exceeded: {what} requires {required} > cap {cap}")]
    BudgetExceeded {
        what: String,
        required: f64,
        cap: f64,
    },

    #[error("iteration limit reached after {iterations} iterations (residual {residual:e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("bisection bracket invalid: lower end {lo} is not feasible")]
    BracketError { lo: f64 },

    #[error("linear program is infeasible (phase-1 objective {residual:e})")]
    LpInfeasible { residual: f64 },

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("extension violates required symmetry: residual {residual:e} > tol {tol:e}")]
    SymmetryViolation { residual: f64, tol: f64 },

    #[error("support violation: weight {residual:e} outside the symmetric subspace > tol {tol:e}")]
    SupportViolation { residual: f64, tol: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Machine-readable kind tag used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPsd { .. } => "not_psd",
            Error::BadTrace { .. } => "bad_trace",
            Error::PovmIncomplete { .. } => "povm_incomplete",
            Error::BadDistribution { .. } => "bad_distribution",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::BadPermutation { .. } => "bad_permutation",
            Error::NotClassical { .. } => "not_classical",
            Error::Signaling { .. } => "signaling",
            Error::NonFreeGame { .. } => "non_free_game",
            Error::BadPayoff { .. } => "bad_payoff",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::IterationLimit { .. } => "iteration_limit",
            Error::BracketError { .. } => "bracket_error",
            Error::LpInfeasible { .. } => "lp_infeasible",
            Error::LpUnbounded { .. } => "lp_unbounded",
            Error::SymmetryViolation { .. } => "symmetry_violation",
            Error::SupportViolation { .. } => "support_violation",
            Error::InvalidInput(_) => "invalid_input",
        }
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::IterationLimit { .. } => 4,
            _ => 2,
        }
    }
}
