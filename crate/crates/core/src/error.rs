use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("parameter `{label}` must be positive (got {value})")]
    NonPositiveRate { label: String, value: f64 },
    #[error("parameter `{label}` must be finite (got {value})")]
    NonFiniteRate { label: String, value: f64 },
    #[error("unknown parameter `{0}` for this setup")]
    UnknownParameter(String),
    #[error("inputs must be strictly positive ({0})")]
    NonPositiveInput(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory or series is empty or too short")]
    EmptyTrajectory,
    #[error("state layout mismatch: expected {expected} entries, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("non-finite state at t = {time} ns")]
    NonFiniteState { time: f64 },
    #[error("invalid integration plan: {0}")]
    InvalidPlan(String),
    #[error("companion trajectory collapsed onto the fiducial one")]
    DegenerateSeparation,
    #[error("invalid Lyapunov options: {0}")]
    InvalidLyapunovOptions(String),
    #[error("signal is constant after detrending; phase undefined")]
    ConstantSignal,
    #[error("samples are not uniformly spaced")]
    NonUniformSampling,
    #[error("signal too short: need at least {need} samples, got {got}")]
    SignalTooShort { need: usize, got: usize },
    #[error("index {index} lies inside the edge margin of a {len}-sample series")]
    EdgeIndex { index: usize, len: usize },
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("time grids of the two signals differ")]
    GridMismatch,
    #[error("unwrapped phase never exceeds the ratio floor of {floor} rad")]
    PhaseTooSmall { floor: f64 },
    #[error("analysis window holds fewer than two samples")]
    WindowTooShort,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("bad parameter path `{0}`")]
    BadPath(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("nothing to plot")]
    EmptySeries,
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
