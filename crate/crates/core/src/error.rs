use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} contains a non-finite entry")]
    NonFinite { what: &'static str },

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:.6e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("Jacobi eigensolver did not converge on {n}x{n} matrix after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    NoConvergence { n: usize, sweeps: usize, residual: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix exponential overflows (norm of A*t = {norm:.3e})")]
    ExpmOverflow { norm: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error evaluating `{node}` at t = {t}: {reason}")]
    Domain { node: String, t: f64, reason: &'static str },

    #[error("entry ({row}, {col}) of A(t){}: {source}", at_time(*t))]
    Entry {
        row: usize,
        col: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("step size underflow at t = {t} (h = {h:.3e}); the problem may be stiff, try a smaller horizon or finer grid")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps before reaching t = {t_target}")]
    TooManySteps { max_steps: usize, t_target: f64 },

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("system not UAS: {0}")]
    NotUas(String),

    #[error("unknown scenario `{id}`; available: {available}")]
    UnknownScenario { id: String, available: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

fn at_time(t: f64) -> String {
    if t.is_nan() {
        String::new()
    } else {
        format!(" at t = {t}")
    }
}
