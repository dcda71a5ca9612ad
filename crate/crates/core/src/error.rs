use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate pulse: {0}")]
    DegeneratePulse(String),

    #[error("degenerate dark state: normalization {norm:e} underflows")]
    DegenerateDarkState { norm: f64 },

    #[error("basis capacity exceeded: n_max = {n_max} (cap {cap})")]
    CapacityExceeded { n_max: usize, cap: usize },

    #[error("step too large: norm drift {drift:e} exceeds {limit:e} at dt = {dt}; rerun with a smaller step")]
    StepTooLarge { drift: f64, limit: f64, dt: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate gap at t = {time}: {detail}")]
    DegenerateGap { time: f64, detail: String },

    #[error("protocol order violated: {operation} requires {expected}, register is {found}")]
    ProtocolOrder {
        operation: &'static str,
        expected: &'static str,
        found: String,
    },

    #[error("protocol step {index} ({step}) failed: {source}")]
    Step {
        index: usize,
        step: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
