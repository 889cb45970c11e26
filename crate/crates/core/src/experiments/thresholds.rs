//! Verdict thresholds. The inequalities under test carry unspecified
//! constants, so verdicts compare fitted rates, not absolute sizes.

/// Allowed excess over a predicted decay exponent.
pub const SLOPE_MARGIN: f64 = 0.15;
/// Tolerance on the exact frequency-scaling slopes of `‖f_n‖_{B^σ}`.
pub const SCALING_SLOPE_TOL: f64 = 0.05;
/// Tolerance on the slope of `D(n, 0)` in `n`.
pub const DECAY_SLOPE_TOL: f64 = 0.1;
/// Relative spread allowed when a constant should stabilize in `n`.
pub const STABILIZATION: f64 = 0.10;
/// Relative residual allowed for the two-term model of `‖w_n‖`.
pub const TWO_TERM_RESIDUAL: f64 = 0.10;
/// Expected short-time exponent of `‖w_n‖` and its tolerance.
pub const SMALL_T_SLOPE: f64 = 2.0;
pub const SMALL_T_SLOPE_TOL: f64 = 0.1;
/// Off-block energy ratio for single-block data.
pub const OFF_BLOCK: f64 = 1e-10;
/// Single-block identity residual for `g_n ∂_x f_n`.
pub const SINGLE_BLOCK_IDENTITY: f64 = 1e-10;
/// `|D(n,0) - ‖g_n‖|`.
pub const INITIAL_DISTANCE: f64 = 1e-10;
/// Largest factor between constants measured on refined and base runs.
pub const REFINEMENT_FACTOR: f64 = 2.0;
/// Largest factor between `c₀` and the leading term `‖g_n ∂_x f_n‖`.
pub const LEADING_TERM_FACTOR: f64 = 2.0;
/// Relative tolerance of `M²` against `½‖φ²‖²` (p = 2, n ≥ 6).
pub const M_SQUARED_TOL: f64 = 0.05;
/// Smallest `n` at which `M²` is compared with `½‖φ²‖²`.
pub const M_SQUARED_MIN_N: u32 = 6;
