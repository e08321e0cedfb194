//! Interval-valued variational analysis toolkit.
//!
//! The crate works with functions whose values are closed real intervals
//! ordered componentwise, and provides:
//!
//! * interval arithmetic with the generalized Hukuhara difference and the
//!   Hausdorff metric ([`interval`]);
//! * a small expression language for problem files ([`expr`]);
//! * interval-valued functions on finite metric spaces and box grids, with
//!   componentwise infima, semicontinuity probes, and minimal-solution
//!   enumeration ([`ivfunc`]);
//! * directional derivatives, one-sided generalized derivatives of
//!   interval curves, and endpointwise integrals ([`calculus`]);
//! * approximate minimization by a verified descent: every solver output
//!   carries a certificate whose conditions are checked by brute force
//!   over the enumerated points ([`ekeland`]), including fixed-point and
//!   minimization corollaries, critical-point diagnostics, compactness
//!   probes, and a min-max path estimator;
//! * finite games with interval losses: approximate equilibrium search and
//!   verification ([`games`]);
//! * interval ODEs under the two differentiability conventions, with cost
//!   functionals and approximate-optimal control search over finite
//!   control families ([`control`]);
//! * serde-backed problem-file schemas shared by the CLI and tests
//!   ([`problem`]).
//!
//! Everything is deterministic: randomized pieces (restarts, sampling)
//! take explicit seeds.

pub mod calculus;
pub mod control;
pub mod ekeland;
pub mod expr;
pub mod games;
pub mod interval;
pub mod ivfunc;
pub mod problem;
pub mod tol;

pub use interval::{Interval, IntervalError, OrderVerdict};
