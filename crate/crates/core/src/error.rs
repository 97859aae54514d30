use std::path::PathBuf;

/// Errors produced by every stage of the rendering pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient points for triangulation: need at least 3 non-collinear points, got {found} distinct")]
    InsufficientPoints { found: usize },

    #[error("no enclosing triangle for query (azimuth {azimuth:.4}, elevation {elevation:.4}) in any projection frame")]
    NoEnclosingTriangle { azimuth: f64, elevation: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("format error in {}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("import found no parsable files in {} (pattern {pattern:?})", dir.display())]
    EmptyImport { dir: PathBuf, pattern: String },

    #[error("unsupported layout {name:?}; supported layouts: {}", supported.join(", "))]
    UnsupportedLayout {
        name: String,
        supported: Vec<&'static str>,
    },

    #[error("channel count mismatch for layout {layout}: expected {expected}, got {actual}")]
    ChannelCount {
        layout: String,
        expected: usize,
        actual: usize,
    },

    #[error("sample rate mismatch in {context}: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch {
        context: String,
        expected: u32,
        actual: u32,
    },

    #[error("impulse response set mismatch: {0}")]
    SetMismatch(String),

    #[error("no discrete impulse response within {threshold_deg} deg of speaker {label} (azimuth {azimuth}, elevation {elevation}); nearest is {distance_deg:.3} deg away")]
    NoDiscreteIr {
        label: String,
        azimuth: f64,
        elevation: f64,
        distance_deg: f64,
        threshold_deg: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
