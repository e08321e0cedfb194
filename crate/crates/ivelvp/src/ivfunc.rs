//! Interval-valued functions over finite metric spaces and box grids.
//!
//! A [`Domain`] is either an explicit finite metric space (labels plus a
//! distance matrix, validated as a metric at construction) or an
//! axis-aligned box sampled on a uniform grid. Functions are given by a
//! pair of endpoint maps ([`IntervalFn`]) or, on finite spaces, by a value
//! table. [`SampledSpace`] materializes the pair (points, values) that all
//! the solver layers enumerate over.
//!
//! The componentwise infimum here is taken endpoint by endpoint, so it is
//! not in general attained at a single point; [`infimum`] reports the
//! near-minimizing points of each endpoint separately.

use crate::expr::{Env, EvalError, Expr, ParseError};
use crate::interval::Interval;
use crate::tol;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("distance matrix must be {n}x{n}, row {row} has length {len}")]
    BadShape { n: usize, row: usize, len: usize },
    #[error("distance matrix asymmetric at ({i},{j}): {dij} vs {dji}")]
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("distance diagonal must be zero at {i}, got {d}")]
    NonZeroDiagonal { i: usize, d: f64 },
    #[error("distinct points {i},{j} at distance {d} (must be positive and finite)")]
    DegenerateDistance { i: usize, j: usize, d: f64 },
    #[error("triangle inequality fails: d({i},{k})={dik} > d({i},{j})+d({j},{k})={sum}")]
    Triangle { i: usize, j: usize, k: usize, dik: f64, sum: f64 },
    #[error("box needs lower < upper in every coordinate, dim {dim}: [{lo}, {hi}]")]
    EmptyBox { dim: usize, lo: f64, hi: f64 },
    #[error("box bounds must be finite")]
    NonFiniteBox,
    #[error("box dimension mismatch: lower has {nl} entries, upper has {nu}")]
    DimMismatch { nl: usize, nu: usize },
    #[error("grid_per_dim must be at least 2, got {0}")]
    GridTooCoarse(usize),
    #[error("grid would have {0} points (limit {1})")]
    GridTooLarge(u128, u64),
    #[error("value table has {got} entries for {want} points")]
    TableLength { got: usize, want: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FnError {
    #[error("expression parse: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation at {at:?}: {source}")]
    Eval { at: Vec<f64>, source: EvalError },
    #[error("endpoint inversion at {at:?}: lower={lo} > upper={hi}")]
    Inversion { at: Vec<f64>, lo: f64, hi: f64 },
    #[error("point {at:?} lies outside the domain box")]
    OutsideDomain { at: Vec<f64> },
    #[error("point index {index} out of range (space has {len} points)")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Finite metric space: labeled points with an explicit distance matrix.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    labels: Vec<String>,
    dist: Vec<f64>, // row-major n*n
}

impl FiniteSpace {
    /// Validates symmetry, a zero diagonal, positivity off the diagonal,
    /// and the triangle inequality (with a tiny slack for rounding).
    pub fn new(labels: Vec<String>, matrix: &[Vec<f64>]) -> Result<Self, DomainError> {
        let n = labels.len();
        if matrix.len() != n {
            return Err(DomainError::BadShape {
                n,
                row: 0,
                len: matrix.len(),
            });
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(DomainError::BadShape { n, row, len: r.len() });
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = matrix[i][j];
                if i == j {
                    if d != 0.0 {
                        return Err(DomainError::NonZeroDiagonal { i, d });
                    }
                } else if !(d.is_finite() && d > 0.0) {
                    return Err(DomainError::DegenerateDistance { i, j, d });
                }
                if matrix[j][i] != d {
                    return Err(DomainError::Asymmetric {
                        i,
                        j,
                        dij: d,
                        dji: matrix[j][i],
                    });
                }
                dist[i * n + j] = d;
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let dik = dist[i * n + k];
                    let sum = dist[i * n + j] + dist[j * n + k];
                    if dik > sum + 1e-12 {
                        return Err(DomainError::Triangle { i, j, k, dik, sum });
                    }
                }
            }
        }
        Ok(FiniteSpace { labels, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }
}

/// Axis-aligned box with a uniform sampling grid (`grid_per_dim` points per
/// coordinate, endpoints included). Grid indices are row-major with the
/// first coordinate most significant, which fixes the lexicographic
/// tie-break order used by the solvers.
#[derive(Debug, Clone)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    grid_per_dim: usize,
}

pub const MAX_GRID_POINTS: u64 = 2_000_000;

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, grid_per_dim: usize) -> Result<Self, DomainError> {
        if lower.len() != upper.len() {
            return Err(DomainError::DimMismatch {
                nl: lower.len(),
                nu: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(DomainError::DimMismatch { nl: 0, nu: 0 });
        }
        for (d, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(DomainError::NonFiniteBox);
            }
            if lo >= hi {
                return Err(DomainError::EmptyBox { dim: d, lo, hi });
            }
        }
        if grid_per_dim < 2 {
            return Err(DomainError::GridTooCoarse(grid_per_dim));
        }
        let total = (grid_per_dim as u128).pow(lower.len() as u32);
        if total > MAX_GRID_POINTS as u128 {
            return Err(DomainError::GridTooLarge(total, MAX_GRID_POINTS));
        }
        Ok(BoxDomain {
            lower,
            upper,
            grid_per_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn grid_per_dim(&self) -> usize {
        self.grid_per_dim
    }

    pub fn grid_len(&self) -> usize {
        self.grid_per_dim.pow(self.dim() as u32)
    }

    pub fn step(&self, d: usize) -> f64 {
        (self.upper[d] - self.lower[d]) / (self.grid_per_dim - 1) as f64
    }

    /// Largest grid spacing across coordinates; the natural resolution of
    /// any certificate produced on this grid.
    pub fn max_step(&self) -> f64 {
        (0..self.dim()).map(|d| self.step(d)).fold(0.0, f64::max)
    }

    pub fn grid_point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let g = self.grid_per_dim;
        let n = self.dim();
        let mut x = vec![0.0; n];
        for d in (0..n).rev() {
            let i = rem % g;
            rem /= g;
            x[d] = self.lower[d] + i as f64 * self.step(d);
        }
        x
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.lower).all(|(v, lo)| *v >= lo - 1e-12)
            && x.iter().zip(&self.upper).all(|(v, hi)| *v <= hi + 1e-12)
    }

    /// Index of the grid point nearest to `x` (coordinates clamped to the box).
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let g = self.grid_per_dim;
        let mut index = 0;
        for d in 0..self.dim() {
            let t = ((x[d] - self.lower[d]) / self.step(d)).round();
            let i = t.clamp(0.0, (g - 1) as f64) as usize;
            index = index * g + i;
        }
        index
    }
}

#[derive(Debug, Clone)]
pub enum Domain {
    Finite(FiniteSpace),
    Box(BoxDomain),
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Finite(s) => s.len(),
            Domain::Box(b) => b.grid_len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            Domain::Finite(s) => s.dist(i, j),
            Domain::Box(b) => euclid(&b.grid_point(i), &b.grid_point(j)),
        }
    }

    pub fn point_ref(&self, index: usize) -> PointRef {
        match self {
            Domain::Finite(s) => PointRef {
                index,
                label: Some(s.label(index).to_string()),
                coords: None,
            },
            Domain::Box(b) => PointRef {
                index,
                label: None,
                coords: Some(b.grid_point(index)),
            },
        }
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One endpoint map: a parsed expression or a native closure over the
/// coordinate vector.
#[derive(Clone)]
pub enum ScalarFn {
    Expr(Expr),
    Native(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarFn::Expr(e) => write!(f, "Expr({})", e),
            ScalarFn::Native(_) => write!(f, "Native(..)"),
        }
    }
}

impl ScalarFn {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        Ok(ScalarFn::Expr(crate::expr::parse(src)?))
    }

    pub fn native(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn::Native(Arc::new(f))
    }

    /// Evaluates at a coordinate vector. Expressions see `x1..xn`, plus the
    /// alias `x` in one dimension.
    pub fn eval(&self, x: &[f64]) -> Result<f64, FnError> {
        match self {
            ScalarFn::Native(f) => Ok(f(x)),
            ScalarFn::Expr(e) => {
                let mut env = Env::new();
                bind_coords(&mut env, x);
                e.eval(&env).map_err(|source| FnError::Eval {
                    at: x.to_vec(),
                    source,
                })
            }
        }
    }
}

pub(crate) fn bind_coords(env: &mut Env, x: &[f64]) {
    if x.len() == 1 {
        env.set("x", x[0]);
    }
    let mut name = String::new();
    for (d, v) in x.iter().enumerate() {
        name.clear();
        name.push('x');
        name.push_str(&(d + 1).to_string());
        env.set(&name, *v);
    }
}

/// Interval-valued function given by its endpoint maps.
#[derive(Debug, Clone)]
pub struct IntervalFn {
    pub lower: ScalarFn,
    pub upper: ScalarFn,
}

impl IntervalFn {
    pub fn parse(lower: &str, upper: &str) -> Result<Self, ParseError> {
        Ok(IntervalFn {
            lower: ScalarFn::parse(lower)?,
            upper: ScalarFn::parse(upper)?,
        })
    }

    /// Evaluates both endpoints; rejects an inverted pair beyond the shared
    /// ordering slack.
    pub fn eval(&self, x: &[f64]) -> Result<Interval, FnError> {
        let lo = self.lower.eval(x)?;
        let hi = self.upper.eval(x)?;
        if lo > hi + tol::ENDPOINT_ORDER {
            return Err(FnError::Inversion {
                at: x.to_vec(),
                lo,
                hi,
            });
        }
        Ok(Interval::new(lo, lo.max(hi)).expect("endpoints checked finite and ordered"))
    }
}

/// Point identity for reports: index into the enumeration plus either the
/// finite-space label or the grid coordinates.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PointRef {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

/// A domain together with the function values at every enumerated point.
#[derive(Debug, Clone)]
pub struct SampledSpace {
    pub domain: Domain,
    pub values: Vec<Interval>,
}

impl SampledSpace {
    pub fn from_table(space: FiniteSpace, values: Vec<Interval>) -> Result<Self, DomainError> {
        if values.len() != space.len() {
            return Err(DomainError::TableLength {
                got: values.len(),
                want: space.len(),
            });
        }
        Ok(SampledSpace {
            domain: Domain::Finite(space),
            values,
        })
    }

    pub fn from_fn(boxdom: BoxDomain, f: &IntervalFn) -> Result<Self, FnError> {
        let n = boxdom.grid_len();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            values.push(f.eval(&boxdom.grid_point(i))?);
        }
        Ok(SampledSpace {
            domain: Domain::Box(boxdom),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.domain.dist(i, j)
    }

    pub fn point_ref(&self, i: usize) -> PointRef {
        self.domain.point_ref(i)
    }

    /// Grid resolution to fold into distance-based certificate checks:
    /// zero on finite spaces, the largest grid step on boxes.
    pub fn resolution(&self) -> f64 {
        match &self.domain {
            Domain::Finite(_) => 0.0,
            Domain::Box(b) => b.max_step(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InfimumReport {
    pub value: Interval,
    /// Points whose lower endpoint is within the tie window of the minimum.
    pub argmin_lower: Vec<PointRef>,
    /// Same for the upper endpoint; need not meet `argmin_lower`.
    pub argmin_upper: Vec<PointRef>,
}

/// Componentwise infimum over the sampled points.
pub fn infimum(space: &SampledSpace) -> InfimumReport {
    assert!(!space.is_empty(), "infimum over an empty space");
    let min_lo = space.values.iter().map(|v| v.lo()).fold(f64::INFINITY, f64::min);
    let min_hi = space.values.iter().map(|v| v.hi()).fold(f64::INFINITY, f64::min);
    let mut argmin_lower = Vec::new();
    let mut argmin_upper = Vec::new();
    for (i, v) in space.values.iter().enumerate() {
        if v.lo() - min_lo <= tol::ARGMIN_TIE {
            argmin_lower.push(space.point_ref(i));
        }
        if v.hi() - min_hi <= tol::ARGMIN_TIE {
            argmin_upper.push(space.point_ref(i));
        }
    }
    InfimumReport {
        value: Interval::new(min_lo, min_hi).expect("componentwise minima are ordered"),
        argmin_lower,
        argmin_upper,
    }
}

/// Points not strictly dominated by any other sampled point (domination =
/// strictly smaller on both endpoints).
pub fn minimal_solutions(space: &SampledSpace) -> Vec<usize> {
    let mut out = Vec::new();
    'outer: for i in 0..space.len() {
        for j in 0..space.len() {
            if j != i && space.values[j].lt(&space.values[i]) {
                continue 'outer;
            }
        }
        out.push(i);
    }
    out
}

/// A point fed to the semicontinuity probe: an index into a finite space or
/// raw coordinates inside a box.
#[derive(Debug, Clone)]
pub enum SeqPoint {
    Index(usize),
    Coords(Vec<f64>),
}

/// A convergent sample sequence with its declared limit.
#[derive(Debug, Clone)]
pub struct SampleSequence {
    pub points: Vec<SeqPoint>,
    pub limit: SeqPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct LscSequenceReport {
    pub all_inside: bool,
    pub limit_value: Interval,
    pub limit_inside: bool,
    /// True when every sequence point sits in the sublevel set but the
    /// limit escapes it: a certified semicontinuity failure.
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LscReport {
    pub level: Interval,
    pub passed: bool,
    pub sequences: Vec<LscSequenceReport>,
}

fn le_tol(a: &Interval, b: &Interval, slack: f64) -> bool {
    a.lo() <= b.lo() + slack && a.hi() <= b.hi() + slack
}

/// Sequential closedness check for the sublevel set `{x : f(x) le level}`.
///
/// A falsifier, not a proof: passing only says none of the supplied
/// sequences witnesses a failure.
pub fn lsc_probe(
    domain: &Domain,
    f: &dyn Fn(&SeqPoint) -> Result<Interval, FnError>,
    level: Interval,
    sequences: &[SampleSequence],
) -> Result<LscReport, FnError> {
    let mut reports = Vec::with_capacity(sequences.len());
    let mut passed = true;
    for seq in sequences {
        check_point(domain, &seq.limit)?;
        let mut all_inside = true;
        for p in &seq.points {
            check_point(domain, p)?;
            let v = f(p)?;
            if !le_tol(&v, &level, tol::ARGMIN_TIE) {
                all_inside = false;
            }
        }
        let limit_value = f(&seq.limit)?;
        let limit_inside = le_tol(&limit_value, &level, tol::ARGMIN_TIE);
        let violation = all_inside && !limit_inside;
        if violation {
            passed = false;
        }
        reports.push(LscSequenceReport {
            all_inside,
            limit_value,
            limit_inside,
            violation,
        });
    }
    Ok(LscReport {
        level,
        passed,
        sequences: reports,
    })
}

fn check_point(domain: &Domain, p: &SeqPoint) -> Result<(), FnError> {
    match (domain, p) {
        (Domain::Finite(s), SeqPoint::Index(i)) => {
            if *i >= s.len() {
                Err(FnError::IndexOutOfRange {
                    index: *i,
                    len: s.len(),
                })
            } else {
                Ok(())
            }
        }
        (Domain::Box(b), SeqPoint::Coords(x)) => {
            if b.contains(x) {
                Ok(())
            } else {
                Err(FnError::OutsideDomain { at: x.clone() })
            }
        }
        (Domain::Finite(s), SeqPoint::Coords(x)) => Err(FnError::IndexOutOfRange {
            index: x.len(),
            len: s.len(),
        }),
        (Domain::Box(_), SeqPoint::Index(i)) => Err(FnError::IndexOutOfRange {
            index: *i,
            len: 0,
        }),
    }
}
