use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Precondition of an operation does not hold.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no admissible chart radius (largest tried r = {r_max:.6e})")]
    NoChartRadius { r_max: f64 },

    #[error("outside cone Γ: matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    OutsideCone { min_eigenvalue: f64 },

    #[error("left cone Γ at {nodes} node(s)")]
    LeftCone { nodes: usize },

    #[error("no admissible lower barrier: margin δ(f̂) = {margin:.6e}")]
    NoAdmissibleBarrier { margin: f64 },

    #[error("continuation stalled at t = {t:.6}: {diagnostics}")]
    ContinuationStalled { t: f64, diagnostics: String },

    #[error("kernel under-resolved: scale {scale:.3e} < 2 × spacing {spacing:.3e}")]
    KernelUnderResolved { scale: f64, spacing: f64 },

    #[error("critical point: level set not a graph here (|Df| = {gradient_norm:.3e})")]
    CriticalPoint { gradient_norm: f64 },

    #[error("smoothing window not found: {0}")]
    SmoothingWindow(String),

    #[error("hull undefined: antipodal obstruction")]
    AntipodalObstruction,

    #[error("excision rejected: {0}")]
    ExcisionRejected(String),

    #[error("monotonicity violated: volume increased from {before:.9e} to {after:.9e}")]
    MonotonicityViolated { before: f64, after: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
