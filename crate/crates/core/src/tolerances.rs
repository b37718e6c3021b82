//! Pinned thresholds for the verification suite.

/// Relative error allowed for exact multiplier identities (eigenmode decay,
/// semigroup law, Parseval, projector idempotence).
pub const SPECTRAL_IDENTITY: f64 = 1e-12;
/// Wall-clock bound for the spectral identity checks at `n = 2, M = 64`.
pub const SPECTRAL_RUNTIME_SECS: f64 = 10.0;

/// Minimum corpus size for empirical operator and equivalence constants.
pub const MIN_CORPUS: usize = 20;
/// Allowed relative drift of a corpus-max operator ratio between `M = 32`
/// and `M = 64`.
pub const OPERATOR_RATIO_DRIFT: f64 = 0.2;

/// Largest admissible `c₂ / c₁` for the Carleson/BMO equivalence bracket.
pub const EQUIVALENCE_BRACKET: f64 = 20.0;
/// Relative error allowed for positive homogeneity of every functional.
pub const HOMOGENEITY: f64 = 1e-12;

/// Sup error of the circle-reduction oracle.
pub const CIRCLE_ORACLE_ERROR: f64 = 5e-3;
/// The error ratio under halving `Δt` must lie in `2 · [1 - s, 1 + s]`.
pub const HALVING_SLACK: f64 = 0.2;

/// Sphere-constraint defect allowed without renormalization.
pub const CONSTRAINT_DEFECT: f64 = 1e-4;

/// Contraction factor bound at the smallest sweep amplitude.
pub const SMALL_DATA_THETA: f64 = 0.5;

/// Taylor–Green sup error.
pub const TAYLOR_GREEN_ERROR: f64 = 1e-3;
/// Below this an error is at the rounding floor and has no observable order.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Velocity left by gradient-only forcing.
pub const DECOUPLED_VELOCITY: f64 = 1e-8;

/// Minimum observed order of the interior PDE residual in `Δt`.
pub const RESIDUAL_ORDER: f64 = 0.9;

/// Order observed from errors at step `Δt` (`coarse`) and `Δt / 2` (`fine`).
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
