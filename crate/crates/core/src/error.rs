use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to produce
/// module-qualified messages at the command line.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mathcore: quaternion has non-zero k component ({0:e})")]
    NonMonogenicQuaternion(f64),
    #[error("mathcore: quaternion is zero")]
    ZeroQuaternion,
    #[error("{module}: domain error: {msg}")]
    Domain { module: &'static str, msg: String },
    #[error("wavelets: wavelet index {index} out of range for a family of {count}")]
    Index { index: usize, count: usize },
    #[error("transform: empty scale ladder (a_min = {a_min}, a_max = {a_max})")]
    EmptyLadder { a_min: f64, a_max: f64 },
    #[error("transform: input contains non-finite values")]
    NonFiniteInput,
    #[error("transform: {0}")]
    Grid(String),
    #[error("estimators: degenerate orientation (Riesz energy {0:e})")]
    DegenerateOrientation(f64),
    #[error("estimators: zero energy at evaluation point")]
    ZeroEnergy,
    #[error("estimators: off ridge, relative wavelet gain {0:e} below threshold")]
    OffRidge(f64),
    #[error("validator: quadrature failure, error estimate {estimate:e} on value {value:e}")]
    QuadratureFailure { estimate: f64, value: f64 },
    #[error("synth: frequency {f0} aliases on sample spacing {spacing}")]
    Alias { f0: f64, spacing: f64 },
    #[error("synth: Nyquist condition violated: {0}")]
    NyquistViolation(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            module,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
