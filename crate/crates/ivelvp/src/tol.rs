//! Numeric tolerances shared across the crate.
//!
//! Centralized so tests and solvers agree on what "equal" means. These are
//! absolute tolerances; the problems this crate targets live at unit scale.

/// Slack allowed before an endpoint pair `lower > upper` is rejected as
/// inverted. Absorbs rounding when both endpoints are computed from the
/// same expression skeleton.
pub const ENDPOINT_ORDER: f64 = 1e-12;

/// Default comparison tolerance in tests and certificate checks.
pub const TEST: f64 = 1e-12;

/// Window for reporting tied argmin points on a grid.
pub const ARGMIN_TIE: f64 = 1e-9;

/// Convergence threshold for difference-quotient limits: consecutive
/// quotients must be this close in Hausdorff distance.
pub const GATEAUX_CONV: f64 = 1e-6;

/// Maximum allowed gap between the two one-sided quotients of a
/// generalized derivative before it is declared nonexistent.
pub const GATEAUX_MATCH: f64 = 1e-4;

/// Number of halvings in the step schedule `t_k = 1e-2 * 2^-k`.
pub const STEP_SCHEDULE_LEN: usize = 20;

/// Default zero-containment slack for critical point checks.
pub const ZERO_CONTAIN: f64 = 1e-9;

/// Iteration cap for descent loops; finite enumerations terminate long
/// before this, the cap guards against bugs.
pub const DESCENT_CAP: usize = 100_000;
