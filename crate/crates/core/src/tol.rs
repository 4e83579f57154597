//! Numerical tolerances shared across the crate.

/// Max absolute entry of `M - M†` accepted for a Hermitian matrix.
pub const HERMITIAN: f64 = 1e-10;
/// Smallest eigenvalue accepted for a positive semidefinite matrix.
pub const PSD: f64 = 1e-10;
/// Allowed deviation of a state trace from 1.
pub const TRACE: f64 = 1e-10;
/// Allowed deviation of a probability vector sum from 1.
pub const PROBABILITY: f64 = 1e-12;
/// Single-shot equality.
pub const EQUALITY: f64 = 1e-12;
/// Equality after error accumulates over protocol steps.
pub const ACCUMULATED: f64 = 1e-9;
/// Trace-preservation tolerance when constructing a channel.
pub const CONSTRUCT_TP: f64 = 1e-8;
/// Negative Choi eigenvalue tolerance when constructing from a Choi matrix.
pub const CONSTRUCT_CP: f64 = 1e-8;
/// Choi max-entry distance under which a channel counts as pinch invariant.
pub const G_CLASSICAL: f64 = 1e-9;
/// Negativity at or below this value means no entanglement detected.
pub const NEGATIVITY_ZERO: f64 = 1e-9;
/// Ensemble weights below this are dropped.
pub const MERGE_WEIGHT: f64 = 1e-12;
/// Factor distance under which ensemble factors are treated as identical.
pub const MERGE_FACTOR: f64 = 1e-12;
