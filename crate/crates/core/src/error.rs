use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(String),

    /// `line` is 1-based; 0 means the error did not come from a file line.
    #[error("config error{}: {msg}", if *line > 0 { format!(" at line {line}") } else { String::new() })]
    Config { line: usize, msg: String },

    #[error("angle {theta:e} rad is outside the dispersive map range of ±{range:e} rad")]
    OutOfRange { theta: f64, range: f64 },

    #[error("coupled-mode system is singular")]
    Singular,

    #[error("step constraint violated: {0}")]
    StepConstraint(String),

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("state became non-finite at t = {time:e} s")]
    NonFinite { time: f64 },

    #[error("grid is empty or not strictly monotone: {0}")]
    Grid(String),

    #[error("non-uniform sample stride at index {index}")]
    NonUniformStride { index: usize },

    #[error("fit did not converge after {iterations} iterations (best residual {residual:e})")]
    FitNonConvergence { iterations: usize, residual: f64 },

    #[error("oscillation amplitude reaches the map range ({range:e} rad) before energy balance")]
    MapRangeExceeded { range: f64 },

    #[error("no self-oscillation threshold in [{lo:e}, {hi:e}] W")]
    NoThreshold { lo: f64, hi: f64 },

    #[error("no steady oscillation cycles detected: {0}")]
    NoCycles(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line runner: 2 for bad input,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Config { .. }
            | Error::StepConstraint(_)
            | Error::Regime(_)
            | Error::Grid(_) => 2,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 3,
        }
    }
}
