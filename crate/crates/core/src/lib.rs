//! Numerical laboratory for a bosonic-cat / transmon quantum-computing
//! architecture with strongly biased noise.
//!
//! The crate covers the full pipeline from continuous-time gate dynamics to
//! logical-qubit resource estimates:
//!
//! * [`hilbert`] — truncated-oscillator and qudit Hilbert-space tooling
//!   (coherent states, cat states, displacement and rotation unitaries,
//!   tensor embeddings).
//! * [`dynamics`] — Lindblad master-equation and Schrödinger propagation
//!   with adaptive Runge–Kutta integrators, an exact diagonal
//!   interaction-picture mode, hardware noise models, and analytic /
//!   Monte-Carlo shot-noise dephasing models.
//! * [`pulses`] — derivative-based low-leakage pulse families with exact
//!   spectral nulls, universal phase/angle corrections, and calibration.
//! * [`gates`] — the dispersive-coupling gate set (CX via free evolution,
//!   CRX via a displacement/selective-rotation sequence), ideal-gate
//!   references, recovery maps, and Pauli-transfer-matrix tomography that
//!   reduces a gate's error to a logical Pauli channel.
//! * [`stabilization`] — pulsed vs. continuous dissipative stabilization
//!   studies (bit-flip scaling with duty cycle).
//! * [`code`] — surface-code patch builders (CSS and XZZX variants),
//!   syndrome-extraction circuit generation, and phenomenological /
//!   gate-derived noise binding.
//! * [`decode`] — Pauli-frame circuit sampling, detector-error-model
//!   extraction, and minimum-weight perfect-matching decoding.
//! * [`analysis`] — logical-error fits, threshold estimation, and
//!   qubit-overhead optimization.
//!
//! Everything is deterministic: randomness flows through a counter-based
//! RNG ([`rng::CounterRng`]) keyed by `(seed, shot, site)`, so results are
//! independent of thread count and iteration order.

pub mod analysis;
pub mod code;
pub mod decode;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod linalg;
pub mod pauli;
pub mod pulses;
pub mod rng;
pub mod stabilization;

pub use error::{Error, Result};
pub use linalg::{DenseOperator, SparseOp, C64};

/// Library version, recorded in experiment manifests for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
