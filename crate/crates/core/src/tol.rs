//! Numerical tolerances shared across the crate.

/// Rows with Euclidean norm at or below this are treated as zero rows.
pub const ZERO_ROW: f64 = 1e-12;

/// Allowed deviation of a standardized row norm from 1.
pub const UNIT_NORM: f64 = 1e-12;

/// `sigma_min / sigma_max` at or below this marks a matrix rank deficient.
pub const RANK_RATIO: f64 = 1e-10;

/// Smallest `sigma_min / sigma_max` resolvable through the Gram matrix.
///
/// Forming `M^T M` squares the condition number, so eigenvalues below roughly
/// `eps * lambda_max` are noise. Ratios under this floor are reported as rank
/// deficient on the Gram route even when they exceed [`RANK_RATIO`].
pub const GRAM_RANK_RATIO: f64 = 1e-7;

/// Two rows whose difference has norm at or below this are identical.
pub const DUPLICATE_ROW: f64 = 1e-12;

/// A pair with `|mu| >= 1 - PARALLEL` is parallel and unusable for a
/// two-subspace step.
pub const PARALLEL: f64 = 1e-10;

/// `Delta >= 1 - DELTA_ONE` makes the noise threshold unbounded.
pub const DELTA_ONE: f64 = 1e-12;
