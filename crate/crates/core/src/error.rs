use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the simulator, controllers and analyzers can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("implicit diode equation did not converge after {iterations} iterations (v = {voltage} V)")]
    NonConvergence { voltage: f64, iterations: usize },

    #[error("irradiance is zero; open-circuit voltage and maximum power point are undefined")]
    NoLight,

    #[error("duty {duty} outside [0, {d_max}]")]
    DutyOutOfRange { duty: f64, d_max: f64 },

    #[error("target panel voltage {target} V exceeds bus voltage {bus} V")]
    TargetAboveBus { target: f64, bus: f64 },

    #[error("fractional constant {0} must lie strictly between 0 and 1")]
    InvalidK(f64),

    #[error("time {time} s is outside the profile range")]
    OutOfRange { time: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("ideal power is zero at record {index}")]
    ZeroIdeal { index: usize },

    #[error("trace never settles inside the band after the disturbance")]
    NotSettled,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("fundamental amplitude is negligible")]
    ZeroFundamental,

    #[error("config error{}: {message}", fmt_location(.line, .key))]
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("simulation failed at step {step}: {source}")]
    Simulation {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

fn fmt_location(line: &Option<usize>, key: &Option<String>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!(" at line {l}, key `{k}`"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(k)) => format!(" at key `{k}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// The innermost error, looking through `Simulation` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Simulation { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
