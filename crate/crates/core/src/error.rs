//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// An oscillator truncation is too small to faithfully hold the
    /// requested state (norm deficit above tolerance).
    #[error("Fock cutoff {cutoff} too small: {detail}")]
    CutoffTooSmall { cutoff: usize, detail: String },

    /// A physical decay/dephasing rate came out negative.
    #[error("negative rate: {0}")]
    NegativeRate(String),

    /// Adaptive integrator drove the step size below the resolvable limit.
    #[error("integrator step underflow at t={t}: h={h}")]
    StepUnderflow { t: f64, h: f64 },

    /// Input outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Exact single-transition pulse correction hit a vanishing denominator.
    #[error("singular correction denominator: {0}")]
    SingularDenominator(String),

    /// Two-transition pulse family requires distinct detunings.
    #[error("degenerate detunings: {0}")]
    DegenerateDeltas(String),

    /// An iterative procedure (calibration, fixed point, optimizer) failed
    /// to converge within its budget.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// Extracted channel has a significantly negative Pauli probability.
    #[error("non-physical channel: min diagonal {min_diag:.3e} (tolerance {tol:.1e})")]
    NonPhysicalChannel { min_diag: f64, tol: f64 },

    /// Circuit references a channel label that was never defined.
    #[error("missing channel definition: {0}")]
    MissingChannel(String),

    /// Code distance outside the supported range.
    #[error("invalid distance: {0}")]
    InvalidDistance(String),

    /// A correlated fault could not be decomposed into graphlike pieces.
    #[error("undecomposable fault: {0}")]
    UndecomposableFault(String),

    /// Matching instance has an odd number of defects but no boundary.
    #[error("odd number of defects with no boundary to absorb the parity")]
    OddDefectsWithoutBoundary,

    /// Too few samples/points to carry out the requested statistics or fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A fit produced non-finite or otherwise unusable parameters.
    #[error("fit diverged: {0}")]
    FitDiverged(String),

    /// Threshold estimation found no crossing between successive curves.
    #[error("no threshold crossing: {0}")]
    NoCrossing(String),

    /// Requested logical error target cannot be met within the search range.
    #[error("target unreachable: {0}")]
    TargetUnreachable(String),

    /// Malformed circuit / detector-error-model / shot-file text.
    #[error("format error: {0}")]
    Format(String),

    /// Invalid user configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
