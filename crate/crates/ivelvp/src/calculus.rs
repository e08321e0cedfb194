//! Directional derivatives and integrals of interval-valued maps.
//!
//! [`gateaux`] estimates the one-sided directional derivative
//! `lim_{t -> 0+} (f(x + t h) gh- f(x)) / t` on a halving step schedule and
//! reports the achieved residual instead of pretending the limit is exact.
//! [`generalized_derivative`] does the same for curves of intervals under
//! the two classical difference-quotient conventions, which differ in which
//! Hukuhara differences must exist: mode (i) suits curves of growing width,
//! mode (ii) curves of shrinking width. [`aumann_integral`] integrates the
//! endpoint functions with composite Simpson quadrature.

use crate::interval::Interval;
use crate::ivfunc::{FnError, IntervalFn, ScalarFn};
use crate::tol;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalcError {
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("dimension mismatch: point has {np} coordinates, direction {nh}")]
    DimMismatch { np: usize, nh: usize },
    #[error("no usable step: every step in the schedule failed to evaluate")]
    NoUsableStep,
    #[error("empty integration range: [{a}, {b}]")]
    EmptyRange { a: f64, b: f64 },
    #[error("integrated endpoints inverted: [{lo}, {hi}]")]
    IntegralInverted { lo: f64, hi: f64 },
    #[error("curve parameter {t} outside range [{a}, {b}]")]
    OutsideRange { t: f64, a: f64, b: f64 },
}

/// Step schedule shared by the limit estimators: `t_k = 1e-2 * 2^-k`.
pub fn step_schedule() -> impl Iterator<Item = f64> {
    (0..=tol::STEP_SCHEDULE_LEN).map(|k| 1e-2 * 0.5f64.powi(k as i32))
}

#[derive(Debug, Clone, Serialize)]
pub struct GhDerivative {
    pub value: Interval,
    /// Steps actually evaluated, largest first.
    pub t_sequence: Vec<f64>,
    /// Hausdorff distance between the last two quotients.
    pub residual: f64,
    pub converged: bool,
}

/// Directional derivative of `f` at `x` along `h` via gH difference
/// quotients on the halving schedule.
///
/// Endpoint expressions are evaluated wherever `x + t h` lands, so the box
/// a function was sampled on does not constrain the probe; steps whose
/// evaluation fails (for example a domain error in `ln`) are skipped, and
/// the estimate converges when consecutive quotients agree to the
/// convergence tolerance.
pub fn gateaux(f: &IntervalFn, x: &[f64], h: &[f64]) -> Result<GhDerivative, CalcError> {
    if h.iter().all(|v| *v == 0.0) {
        return Err(CalcError::ZeroDirection);
    }
    if x.len() != h.len() {
        return Err(CalcError::DimMismatch {
            np: x.len(),
            nh: h.len(),
        });
    }
    let base = f.eval(x)?;
    let mut t_sequence = Vec::new();
    let mut prev: Option<Interval> = None;
    let mut residual = f64::INFINITY;
    let mut shifted = vec![0.0; x.len()];
    for t in step_schedule() {
        for (s, (xi, hi)) in shifted.iter_mut().zip(x.iter().zip(h)) {
            *s = xi + t * hi;
        }
        let q = match f.eval(&shifted) {
            Ok(v) => v.gh_diff(&base).scale(1.0 / t),
            Err(_) => continue, // step unusable, fall through to smaller t
        };
        t_sequence.push(t);
        if let Some(p) = prev {
            residual = q.hausdorff(&p);
            if residual <= tol::GATEAUX_CONV {
                return Ok(GhDerivative {
                    value: q,
                    t_sequence,
                    residual,
                    converged: true,
                });
            }
        }
        prev = Some(q);
    }
    match prev {
        Some(value) => Ok(GhDerivative {
            value,
            t_sequence,
            residual,
            converged: false,
        }),
        None => Err(CalcError::NoUsableStep),
    }
}

/// Curve of intervals over a parameter range.
#[derive(Clone)]
pub struct IntervalCurve {
    kind: CurveKind,
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Clone)]
enum CurveKind {
    Endpoints(IntervalFn),
    Native(Arc<dyn Fn(f64) -> Result<Interval, CalcError> + Send + Sync>),
}

impl IntervalCurve {
    pub fn parse(lower: &str, upper: &str, t_min: f64, t_max: f64) -> Result<Self, FnError> {
        Ok(IntervalCurve {
            kind: CurveKind::Endpoints(IntervalFn {
                lower: ScalarFn::parse(lower).map_err(FnError::Parse)?,
                upper: ScalarFn::parse(upper).map_err(FnError::Parse)?,
            }),
            t_min,
            t_max,
        })
    }

    pub fn native(
        f: impl Fn(f64) -> Result<Interval, CalcError> + Send + Sync + 'static,
        t_min: f64,
        t_max: f64,
    ) -> Self {
        IntervalCurve {
            kind: CurveKind::Native(Arc::new(f)),
            t_min,
            t_max,
        }
    }

    pub fn eval(&self, t: f64) -> Result<Interval, CalcError> {
        match &self.kind {
            CurveKind::Endpoints(f) => {
                // curves bind the parameter as `t` (and `x`/`x1` for reuse
                // of single-variable expressions)
                let mut env = crate::expr::Env::new();
                env.set("t", t);
                env.set("x", t);
                env.set("x1", t);
                let lo = match &f.lower {
                    ScalarFn::Expr(e) => e.eval(&env).map_err(|source| FnError::Eval {
                        at: vec![t],
                        source,
                    })?,
                    ScalarFn::Native(g) => g(&[t]),
                };
                let hi = match &f.upper {
                    ScalarFn::Expr(e) => e.eval(&env).map_err(|source| FnError::Eval {
                        at: vec![t],
                        source,
                    })?,
                    ScalarFn::Native(g) => g(&[t]),
                };
                if lo > hi + tol::ENDPOINT_ORDER {
                    return Err(CalcError::Fn(FnError::Inversion {
                        at: vec![t],
                        lo,
                        hi,
                    }));
                }
                Ok(Interval::new(lo, lo.max(hi)).expect("checked"))
            }
            CurveKind::Native(g) => g(t),
        }
    }
}

/// Differentiation convention for interval curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiffMode {
    /// Forward Hukuhara quotients; requires the width to be locally
    /// nondecreasing around the point.
    I,
    /// Reversed quotients with negative steps; requires locally
    /// nonincreasing width.
    Ii,
}

/// Result of a one-sided generalized derivative estimate.
#[derive(Debug, Clone, Serialize)]
pub enum DerivOutcome {
    Derivative {
        value: Interval,
        residual: f64,
        converged: bool,
    },
    /// The defining Hukuhara differences or their agreement failed; the
    /// condition string names what broke.
    NonExistent { condition: String },
}

/// Estimates the mode (i) or mode (ii) derivative of a curve at `t0`.
///
/// Both defining quotients are formed at every step: mode (i) uses
/// `(c(t0+s) H- c(t0))/s` and `(c(t0) H- c(t0-s))/s` with `s > 0`; mode
/// (ii) uses the same expressions with `s < 0`. Nonexistence of a Hukuhara
/// difference at the smallest usable step, or disagreement of the two
/// quotient limits, yields [`DerivOutcome::NonExistent`].
pub fn generalized_derivative(
    c: &IntervalCurve,
    t0: f64,
    mode: DiffMode,
) -> Result<DerivOutcome, CalcError> {
    if t0 < c.t_min || t0 > c.t_max {
        return Err(CalcError::OutsideRange {
            t: t0,
            a: c.t_min,
            b: c.t_max,
        });
    }
    let room = (t0 - c.t_min).min(c.t_max - t0);
    let base = c.eval(t0)?;
    let mut prev: Option<(Interval, Interval)> = None;
    let mut last_failure = String::new();
    let mut result: Option<(Interval, Interval, f64)> = None;
    let mut any_step = false;
    for t in step_schedule() {
        if t > room {
            continue; // keep both t0 +/- t inside the parameter range
        }
        let s = match mode {
            DiffMode::I => t,
            DiffMode::Ii => -t,
        };
        let fwd = c.eval(t0 + s)?;
        let bwd = c.eval(t0 - s)?;
        any_step = true;
        let q_fwd = match fwd.hukuhara_diff(&base) {
            Some(d) => d.scale(1.0 / s),
            None => {
                last_failure = format!(
                    "Hukuhara difference c(t0{}{:e}) H- c(t0) does not exist",
                    if s >= 0.0 { "+" } else { "-" },
                    s.abs()
                );
                prev = None;
                continue;
            }
        };
        let q_bwd = match base.hukuhara_diff(&bwd) {
            Some(d) => d.scale(1.0 / s),
            None => {
                last_failure = format!(
                    "Hukuhara difference c(t0) H- c(t0{}{:e}) does not exist",
                    if s >= 0.0 { "-" } else { "+" },
                    s.abs()
                );
                prev = None;
                continue;
            }
        };
        if let Some((pf, pb)) = prev {
            let residual = q_fwd.hausdorff(&pf).max(q_bwd.hausdorff(&pb));
            result = Some((q_fwd, q_bwd, residual));
            if residual <= tol::GATEAUX_CONV {
                break;
            }
        }
        prev = Some((q_fwd, q_bwd));
    }
    if !any_step {
        return Err(CalcError::NoUsableStep);
    }
    let (q_fwd, q_bwd, residual) = match (result, prev) {
        (Some(r), _) => r,
        // schedule exhausted with at most one surviving quotient pair
        (None, Some((qf, qb))) => (qf, qb, f64::INFINITY),
        (None, None) => {
            return Ok(DerivOutcome::NonExistent {
                condition: if last_failure.is_empty() {
                    "no quotient could be formed".to_string()
                } else {
                    last_failure
                },
            })
        }
    };
    let split = q_fwd.hausdorff(&q_bwd);
    if split > tol::GATEAUX_MATCH {
        return Ok(DerivOutcome::NonExistent {
            condition: format!(
                "one-sided quotients disagree: {} vs {} (gap {:e})",
                q_fwd, q_bwd, split
            ),
        });
    }
    Ok(DerivOutcome::Derivative {
        value: q_fwd,
        residual,
        converged: residual <= tol::GATEAUX_CONV,
    })
}

/// Endpointwise integral of a curve over `[a, b]` by composite Simpson
/// quadrature with `n_panels` panels (two subintervals each).
pub fn aumann_integral(
    c: &IntervalCurve,
    a: f64,
    b: f64,
    n_panels: usize,
) -> Result<Interval, CalcError> {
    if !(a < b) {
        return Err(CalcError::EmptyRange { a, b });
    }
    let n = n_panels.max(1);
    let m = 2 * n; // subintervals
    let h = (b - a) / m as f64;
    let mut sum_lo = 0.0;
    let mut sum_hi = 0.0;
    for i in 0..=m {
        let t = if i == m { b } else { a + i as f64 * h };
        let v = c.eval(t)?;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum_lo += w * v.lo();
        sum_hi += w * v.hi();
    }
    let lo = sum_lo * h / 3.0;
    let hi = sum_hi * h / 3.0;
    if lo > hi + tol::ENDPOINT_ORDER {
        return Err(CalcError::IntegralInverted { lo, hi });
    }
    Ok(Interval::new(lo, lo.max(hi)).expect("checked"))
}

pub const DEFAULT_PANELS: usize = 1024;

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn gateaux_of_symmetric_band_is_exact() {
        // frozen: f = [-x, x] at x=0.5, h=1 gives [-1, 1] (quotients are
        // constant in t, so the first two steps already agree)
        let f = IntervalFn::parse("-x", "x").unwrap();
        let d = gateaux(&f, &[0.5], &[1.0]).unwrap();
        assert!(d.converged);
        assert!(d.value.hausdorff(&iv(-1.0, 1.0)) < 1e-12);

        // frozen: f = [-x^2, x^2] at x=1, h=1 gives [-2, 2]
        let f = IntervalFn::parse("-x^2", "x^2").unwrap();
        let d = gateaux(&f, &[1.0], &[1.0]).unwrap();
        assert!(d.converged);
        assert!(d.value.hausdorff(&iv(-2.0, 2.0)) < 1e-5);
    }

    #[test]
    fn gateaux_of_reciprocal_band() {
        // frozen: f = [g, g+1], g = 1/(x^2+1): derivative is the degenerate
        // interval [g'(x) h, g'(x) h] with g'(x) = -2x/(x^2+1)^2.
        // At x=1, h=1: -2/4 = -0.5.
        let f = IntervalFn::parse("1/(x^2+1)", "1/(x^2+1)+1").unwrap();
        let d = gateaux(&f, &[1.0], &[1.0]).unwrap();
        assert!(d.converged);
        assert!(d.value.hausdorff(&iv(-0.5, -0.5)) < 1e-5);
        // negative direction flips the sign
        let d = gateaux(&f, &[1.0], &[-2.0]).unwrap();
        assert!(d.value.hausdorff(&iv(1.0, 1.0)) < 1e-5);
    }

    #[test]
    fn gateaux_rejects_zero_direction() {
        let f = IntervalFn::parse("x", "x+1").unwrap();
        assert!(matches!(
            gateaux(&f, &[0.0], &[0.0]),
            Err(CalcError::ZeroDirection)
        ));
    }

    #[test]
    fn generalized_derivative_mode_i_on_widening_curve() {
        // frozen: c(t) = [t, 2t] has mode (i) derivative [1, 2] wherever
        // the width grows; mode (ii) must report nonexistence.
        let c = IntervalCurve::parse("t", "2*t", 0.0, 2.0).unwrap();
        match generalized_derivative(&c, 0.5, DiffMode::I).unwrap() {
            DerivOutcome::Derivative { value, converged, .. } => {
                assert!(converged);
                assert!(value.hausdorff(&iv(1.0, 2.0)) < 1e-9);
            }
            other => panic!("expected derivative, got {:?}", other),
        }
        match generalized_derivative(&c, 0.5, DiffMode::Ii).unwrap() {
            DerivOutcome::NonExistent { condition } => {
                assert!(condition.contains("Hukuhara"));
            }
            other => panic!("expected nonexistence, got {:?}", other),
        }
    }

    #[test]
    fn generalized_derivative_mode_ii_on_shrinking_curve() {
        // frozen: c(t) = [-1+t, 1-t] shrinks; mode (ii) derivative [-1, 1]
        let c = IntervalCurve::parse("-1+t", "1-t", 0.0, 0.9).unwrap();
        match generalized_derivative(&c, 0.5, DiffMode::Ii).unwrap() {
            DerivOutcome::Derivative { value, converged, .. } => {
                assert!(converged);
                assert!(value.hausdorff(&iv(-1.0, 1.0)) < 1e-9);
            }
            other => panic!("expected derivative, got {:?}", other),
        }
        match generalized_derivative(&c, 0.5, DiffMode::I).unwrap() {
            DerivOutcome::NonExistent { .. } => {}
            other => panic!("expected nonexistence, got {:?}", other),
        }
    }

    #[test]
    fn generalized_derivative_degenerate_curve_both_modes() {
        // constant-width curve: both modes agree with the pointwise
        // derivative of the endpoints
        let c = IntervalCurve::parse("t^2", "t^2+1", 0.0, 2.0).unwrap();
        for mode in [DiffMode::I, DiffMode::Ii] {
            match generalized_derivative(&c, 1.0, mode).unwrap() {
                DerivOutcome::Derivative { value, .. } => {
                    assert!(value.hausdorff(&iv(2.0, 2.0)) < 1e-5);
                }
                other => panic!("expected derivative, got {:?}", other),
            }
        }
    }

    #[test]
    fn aumann_integral_frozen_values() {
        // frozen: integral of [t, t+1] over [0,1] is [0.5, 1.5]
        let c = IntervalCurve::parse("t", "t+1", 0.0, 1.0).unwrap();
        let v = aumann_integral(&c, 0.0, 1.0, 16).unwrap();
        assert!(v.hausdorff(&iv(0.5, 1.5)) < 1e-13);

        // frozen: integral of [0, 1] over [0, 3] is [0, 3]
        let c = IntervalCurve::parse("0", "1", 0.0, 3.0).unwrap();
        let v = aumann_integral(&c, 0.0, 3.0, 8).unwrap();
        assert!(v.hausdorff(&iv(0.0, 3.0)) < 1e-13);
    }

    #[test]
    fn aumann_integral_additive_over_split() {
        let c = IntervalCurve::parse("sin(t)+2", "sin(t)+3", 0.0, 2.0).unwrap();
        let whole = aumann_integral(&c, 0.0, 2.0, DEFAULT_PANELS).unwrap();
        let left = aumann_integral(&c, 0.0, 0.7, DEFAULT_PANELS).unwrap();
        let right = aumann_integral(&c, 0.7, 2.0, DEFAULT_PANELS).unwrap();
        assert!(whole.hausdorff(&(left + right)) < 1e-10);
    }

    #[test]
    fn aumann_integral_respects_width_sign() {
        let c = IntervalCurve::parse("t", "t+1", 0.0, 1.0).unwrap();
        assert!(matches!(
            aumann_integral(&c, 1.0, 1.0, 4),
            Err(CalcError::EmptyRange { .. })
        ));
    }

    #[test]
    fn fundamental_theorem_mode_i() {
        // F(t) = integral of [1, 2] from 0 to t equals [t, 2t]; its mode
        // (i) derivative recovers the integrand.
        let c = IntervalCurve::parse("1", "2", 0.0, 2.0).unwrap();
        let f = IntervalCurve::native(
            move |t| aumann_integral(&c, 0.0, t.max(1e-12), 64),
            0.0,
            2.0,
        );
        match generalized_derivative(&f, 1.0, DiffMode::I).unwrap() {
            DerivOutcome::Derivative { value, .. } => {
                assert!(value.hausdorff(&iv(1.0, 2.0)) < 1e-6);
            }
            other => panic!("expected derivative, got {:?}", other),
        }
    }
}
