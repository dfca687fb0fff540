//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building parameters or evaluating the
/// response. Per-grid-point pole conditions are usually downgraded to flags
/// by the sweep layers; the variants here surface when a single evaluation
/// is requested directly.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("unknown config key `{key}`; accepted keys are: {accepted}")]
    UnknownKey { key: String, accepted: String },

    #[error("config line {line} is not `key = value`: `{text}`")]
    ConfigSyntax { line: usize, text: String },

    #[error("equal-component analytic path requires G1 == G2; use the numeric solver")]
    UnequalAmplitudes,

    #[error("steady-state system is numerically degenerate (condition estimate {cond:.3e})")]
    DegenerateSteadyState { cond: f64 },

    #[error("linear-response pole at omega_pc = {omega_pc} gamma (diagnostic {diagnostic:.3e})")]
    Pole { omega_pc: f64, diagnostic: f64 },

    #[error("pole inside the finite-difference stencil at delta = {delta} gamma; shift the evaluation point")]
    StencilPole { delta: f64 },

    #[error("pole inside the pulse band at offset {omega_gamma} gamma from the carrier")]
    BandPole { omega_gamma: f64 },

    #[error("grid must be strictly increasing")]
    GridNotIncreasing,

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed to serialize manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for the pole-type conditions that sweeps report as per-point
    /// flags instead of aborting.
    pub fn is_pole(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. } | Error::DegenerateSteadyState { .. }
        )
    }
}
