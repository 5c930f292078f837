use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: at least 2 components are required")]
    InvalidDimension(usize),

    #[error("non-finite component at index {0}")]
    NonFinite(usize),

    /// The curve speed s' fell below the regularity threshold; the moving
    /// frame is undefined at this instant.
    #[error("curve is not regular at t = {t}: speed {speed:e} below threshold {threshold:e}")]
    Regularity { t: f64, speed: f64, threshold: f64 },

    #[error("derivative order {requested} exceeds model maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("t = {t} is outside the model domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("degenerate ellipse: vectors a and b are linearly dependent (|a^b| = {0:e})")]
    DegenerateEllipse(f64),

    #[error("frame size changed between neighbouring instants ({0} vs {1})")]
    Comparability(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("too few samples: {found} given, at least {required} required")]
    TooFewSamples { found: usize, required: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error on line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("data error on line {line}: {msg}")]
    Data { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
