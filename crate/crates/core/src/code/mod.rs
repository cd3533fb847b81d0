//! Surface-code patches and noisy syndrome-extraction circuits.
//!
//! [`patch`] builds rectangular rotated-CSS and unrotated-XZZX patches with
//! explicit entangling-gate schedules; [`circuit`] compiles a patch into a
//! flat Clifford + Pauli-channel instruction stream ready for Pauli-frame
//! sampling, including the bookkeeping that replaces each cat-controlled
//! entangling gate by a plain CX plus a phase correction that is either
//! cancelled against a time-adjacent partner or emitted as an explicit
//! compensating operation; [`tableau`] is a small stabilizer simulator used
//! to certify that every compiled detector and observable is deterministic
//! on the ideal circuit.

pub mod circuit;
pub mod patch;
pub mod tableau;

pub use circuit::{
    depolarizing_channels, simplified_channels, syndrome_circuit, CircuitNoise, Detector,
    Instruction, MemoryBasis, NamedChannel, SimplifiedNoise, StabilizerCircuit,
};
pub use patch::{
    build_patch, min_logical_weight, CodeFamily, CodePatch, StabKind, Stabilizer, N_STEPS,
};
pub use tableau::{detector_parities, ideal_measurements, Tableau};
