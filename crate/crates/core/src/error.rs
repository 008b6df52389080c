use std::path::PathBuf;

/// Errors raised by the synthesis and simulation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Θ·L·Θ⁻¹ has a nonzero lower-left block (max |entry| = {residual:e}); input is not a Laplacian")]
    BlockStructureViolation { residual: f64 },

    #[error("spectral lower bound {bound} is not positive; the communication graph is not connected from its root")]
    NonPositiveBound { bound: f64 },

    #[error("duplicate reference frequency {0}")]
    DuplicateFrequency(f64),

    #[error("fixed-point iteration did not converge in {max_iter} iterations (last update {last_change:e})")]
    NoConvergence { max_iter: usize, last_change: f64 },

    #[error("grid mismatch: expected {expected} nodes, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("resonant spectrum: signal-model eigenvalue {eigenvalue} meets the target PDE eigenvalue {target} (σ_c ∩ σ(S) must be empty)")]
    ResonantSpectrum { eigenvalue: String, target: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("controllability certificates disagree: numerator margin {numerator_margin:e}, direct PBH margin {direct_margin:e}")]
    InconsistentCertificates {
        numerator_margin: f64,
        direct_margin: f64,
    },

    #[error("pair is not controllable; the Riccati equation has no stabilizing solution")]
    NotControllable,

    #[error("Newton–Kleinman iteration diverged: {0}")]
    NewtonDivergence(String),

    #[error("tridiagonal step is singular at row {row}; diffusion must stay positive")]
    SingularStep { row: usize },

    #[error("numerical blow-up at t = {time}: state norm {norm:e} exceeds {bound:e}")]
    NumericalBlowup { time: f64, norm: f64, bound: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error{}{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },

    #[error("scenario schema violations:\n  - {}", .0.join("\n  - "))]
    Schema(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the variant, used in certificates.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BlockStructureViolation { .. } => "BlockStructureViolation",
            Error::NonPositiveBound { .. } => "NonPositiveBound",
            Error::DuplicateFrequency(_) => "DuplicateFrequency",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::ResonantSpectrum { .. } => "ResonantSpectrum",
            Error::SingularSystem(_) => "SingularSystem",
            Error::InconsistentCertificates { .. } => "InconsistentCertificates",
            Error::NotControllable => "NotControllable",
            Error::NewtonDivergence(_) => "NewtonDivergence",
            Error::SingularStep { .. } => "SingularStep",
            Error::NumericalBlowup { .. } => "NumericalBlowup",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "ParseError",
            Error::Schema(_) => "SchemaError",
            Error::Io { .. } => "IoError",
        }
    }
}
