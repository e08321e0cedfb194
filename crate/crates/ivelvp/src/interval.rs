//! Closed bounded real intervals and their arithmetic.
//!
//! An [`Interval`] is a pair `[lo, hi]` with `lo <= hi`, both finite. The
//! algebra implemented here is the standard one: Minkowski addition, scalar
//! multiplication with endpoint swap for negative scalars, the generalized
//! Hukuhara difference, and the Hausdorff distance. Two partial orders are
//! exposed through [`Interval::compare`]: componentwise `<=` on both
//! endpoints (`le`) and strict `<` on both endpoints (`lt`). Neither is
//! total, and the negations `not le` / `not lt` are genuinely weaker than
//! the reversed relations, which is what most of the solver layer leans on.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntervalError {
    #[error("invalid interval endpoints: lo={lo} hi={hi} (need lo <= hi)")]
    Inverted { lo: f64, hi: f64 },
    #[error("interval endpoints must be finite: lo={lo} hi={hi}")]
    NonFinite { lo: f64, hi: f64 },
}

/// Closed interval `[lo, hi]`, `lo <= hi`, endpoints finite.
///
/// Serialized as a two element array `[lo, hi]`; deserialization rejects
/// inverted or non-finite pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = IntervalError;
    fn try_from(v: [f64; 2]) -> Result<Self, IntervalError> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(a: Interval) -> [f64; 2] {
        [a.lo, a.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Outcome of comparing two intervals under the componentwise orders.
///
/// `le` is `a.lo <= b.lo && a.hi <= b.hi`; `lt` is the same with strict
/// inequalities. `lt` implies `le`, but `!lt` does not imply the reverse
/// comparison holds: `[1,3]` vs `[2,3]` has `le` true and `lt` false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub le: bool,
    pub lt: bool,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NonFinite { lo, hi });
        }
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub fn singleton(x: f64) -> Result<Self, IntervalError> {
        Interval::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.width() <= tol
    }

    /// Minkowski sum: `[a.lo + b.lo, a.hi + b.hi]`.
    pub fn add(&self, b: &Interval) -> Interval {
        Interval {
            lo: self.lo + b.lo,
            hi: self.hi + b.hi,
        }
    }

    /// Scalar multiple; a negative scalar swaps the endpoints.
    pub fn scale(&self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval {
                lo: k * self.lo,
                hi: k * self.hi,
            }
        } else {
            Interval {
                lo: k * self.hi,
                hi: k * self.lo,
            }
        }
    }

    pub fn neg(&self) -> Interval {
        self.scale(-1.0)
    }

    /// Generalized Hukuhara difference:
    /// `[min(a.lo-b.lo, a.hi-b.hi), max(a.lo-b.lo, a.hi-b.hi)]`.
    ///
    /// Always exists. `gh_diff(a, a) == [0,0]` and
    /// `gh_diff(a, b).neg() == gh_diff(b, a)`.
    pub fn gh_diff(&self, b: &Interval) -> Interval {
        let d_lo = self.lo - b.lo;
        let d_hi = self.hi - b.hi;
        Interval {
            lo: d_lo.min(d_hi),
            hi: d_lo.max(d_hi),
        }
    }

    /// Classical Hukuhara difference: the `c` with `a = b + c`, which exists
    /// iff `width(a) >= width(b)`. Returns `None` otherwise.
    pub fn hukuhara_diff(&self, b: &Interval) -> Option<Interval> {
        let lo = self.lo - b.lo;
        let hi = self.hi - b.hi;
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// Hausdorff distance `max(|a.lo-b.lo|, |a.hi-b.hi|)`.
    pub fn hausdorff(&self, b: &Interval) -> f64 {
        (self.lo - b.lo).abs().max((self.hi - b.hi).abs())
    }

    pub fn compare(&self, b: &Interval) -> OrderVerdict {
        OrderVerdict {
            le: self.lo <= b.lo && self.hi <= b.hi,
            lt: self.lo < b.lo && self.hi < b.hi,
        }
    }

    pub fn le(&self, b: &Interval) -> bool {
        self.compare(b).le
    }

    pub fn lt(&self, b: &Interval) -> bool {
        self.compare(b).lt
    }

    /// Zero membership with symmetric slack: `lo - tol <= 0 <= hi + tol`.
    pub fn contains_zero(&self, tol: f64) -> bool {
        self.lo <= tol && self.hi >= -tol
    }
}

impl std::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::add(&self, &rhs)
    }
}

impl std::ops::Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(&self)
    }
}
