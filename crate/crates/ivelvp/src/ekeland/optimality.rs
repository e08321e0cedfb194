//! Consequences of the verified descent: fixed points of set-valued maps,
//! minimization under a domination hypothesis, and derivative-based
//! diagnostics for approximate minimizers.

use super::{ekeland_minimize, EkelandCertificate, EkelandError};
use crate::calculus::{gateaux, GhDerivative};
use crate::interval::Interval;
use crate::ivfunc::{euclid, infimum, minimal_solutions, IntervalFn, PointRef, SampledSpace};
use crate::tol;
use serde::Serialize;

/// Fixed point search for a set-valued map `T` on a finite space.
///
/// Requires every `y in T(x)` to satisfy `f(y) + [d(x,y), d(x,y)] le f(x)`
/// (checked up front; violations are rejected with the witness pair) and
/// every `T(x)` to be nonempty. A descent with unit epsilon then ends at a
/// point that `T` cannot move: if `x_bar` were not fixed, any
/// `y in T(x_bar)` would contradict the certificate's condition (c).
#[derive(Debug, Clone, Serialize)]
pub struct CaristiReport {
    pub fixed_point: usize,
    pub in_map_image: bool,
    pub certificate: EkelandCertificate,
}

pub fn caristi_fixed_point(
    space: &SampledSpace,
    map: &[Vec<usize>],
) -> Result<CaristiReport, EkelandError> {
    let n = space.len();
    assert_eq!(map.len(), n, "map must assign a value set to every point");
    for (x, targets) in map.iter().enumerate() {
        if targets.is_empty() {
            return Err(EkelandError::EmptyMapValue { x });
        }
        for &y in targets {
            if y >= n {
                return Err(EkelandError::MapTargetRange { x, y });
            }
            let d = space.dist(x, y);
            let fy = &space.values[y];
            let fx = &space.values[x];
            if !(fy.lo() + d <= fx.lo() && fy.hi() + d <= fx.hi()) {
                return Err(EkelandError::CaristiHypothesis { x, y });
            }
        }
    }
    let certificate = ekeland_minimize(space, 1.0, 0)?;
    let x_bar = certificate.x_bar;
    let in_map_image = map[x_bar].contains(&x_bar);
    if !in_map_image {
        return Err(EkelandError::Internal {
            context: "caristi".into(),
            message: format!(
                "descent endpoint {} is not fixed by the map despite the verified hypothesis",
                x_bar
            ),
        });
    }
    Ok(CaristiReport {
        fixed_point: x_bar,
        in_map_image,
        certificate,
    })
}

/// Minimization under the domination hypothesis: every non-minimal `x`
/// must admit some `y != x` with `f(y) + [d(x,y), d(x,y)] le f(x)`.
///
/// The hypothesis is checked for every non-minimal point (violations are
/// rejected with the stuck point); the unit-epsilon descent then provably
/// ends inside the minimal set, which is re-checked by enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct TakahashiReport {
    pub minimizer: usize,
    pub minimal_set: Vec<usize>,
    pub certificate: EkelandCertificate,
}

pub fn takahashi_minimize(space: &SampledSpace) -> Result<TakahashiReport, EkelandError> {
    let minimal_set = minimal_solutions(space);
    let n = space.len();
    for x in 0..n {
        if minimal_set.contains(&x) {
            continue;
        }
        let fx = &space.values[x];
        let dominated = (0..n).any(|y| {
            y != x && {
                let d = space.dist(x, y);
                let fy = &space.values[y];
                fy.lo() + d <= fx.lo() && fy.hi() + d <= fx.hi()
            }
        });
        if !dominated {
            return Err(EkelandError::TakahashiStuck { x });
        }
    }
    let certificate = ekeland_minimize(space, 1.0, 0)?;
    let minimizer = certificate.x_bar;
    if !minimal_set.contains(&minimizer) {
        return Err(EkelandError::Internal {
            context: "takahashi".into(),
            message: format!(
                "descent endpoint {} is outside the brute-force minimal set {:?}",
                minimizer, minimal_set
            ),
        });
    }
    Ok(TakahashiReport {
        minimizer,
        minimal_set,
        certificate,
    })
}

/// Verdict of a directional-derivative zero-containment check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalVerdict {
    Critical,
    NotCritical,
    /// Some quotient failed to converge and no converged direction
    /// excluded zero; deliberately distinct from `NotCritical`.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionReport {
    pub direction: Vec<f64>,
    pub derivative: GhDerivative,
    pub contains_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalReport {
    pub verdict: CriticalVerdict,
    pub directions: Vec<DirectionReport>,
}

/// Checks `0 in f'(x)(h)` for each supplied direction.
pub fn critical_point_check(
    f: &IntervalFn,
    x: &[f64],
    directions: &[Vec<f64>],
    zero_tol: f64,
) -> Result<CriticalReport, crate::calculus::CalcError> {
    let mut reports = Vec::with_capacity(directions.len());
    let mut any_unconverged = false;
    let mut any_excludes_zero = false;
    for h in directions {
        let derivative = gateaux(f, x, h)?;
        let contains_zero = derivative.value.contains_zero(zero_tol);
        if !derivative.converged {
            any_unconverged = true;
        } else if !contains_zero {
            any_excludes_zero = true;
        }
        reports.push(DirectionReport {
            direction: h.clone(),
            derivative,
            contains_zero,
        });
    }
    let verdict = if any_excludes_zero {
        CriticalVerdict::NotCritical
    } else if any_unconverged {
        CriticalVerdict::Inconclusive
    } else {
        CriticalVerdict::Critical
    };
    Ok(CriticalReport {
        verdict,
        directions: reports,
    })
}

/// Axis directions `+e_1, -e_1, ..., +e_n, -e_n`.
pub fn axis_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * dim);
    for d in 0..dim {
        for sign in [1.0, -1.0] {
            let mut h = vec![0.0; dim];
            h[d] = sign;
            out.push(h);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryStep {
    pub epsilon: f64,
    pub point: PointRef,
    pub value: Interval,
    /// Hausdorff distance from `value` to the componentwise infimum.
    pub dh_to_inf: f64,
    /// `value le inf + [eps, eps]` (the approximate-minimality conclusion).
    pub within_eps_of_inf: bool,
    pub directions: Vec<StationaryDirection>,
    /// All sampled directions satisfy the disjunction below.
    pub stationary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryDirection {
    pub direction: Vec<f64>,
    pub derivative: Interval,
    pub converged: bool,
    pub dh_to_zero: f64,
    pub contains_zero: bool,
    /// Near-zero derivative or zero containment: the per-direction
    /// stationarity disjunction.
    pub disjunction_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryReport {
    pub infimum: Interval,
    pub steps: Vec<StationaryStep>,
}

pub struct StationaryParams {
    /// `dh_to_zero` threshold for the "derivative tends to [0,0]" branch.
    pub deriv_tol: f64,
    pub zero_tol: f64,
}

impl Default for StationaryParams {
    fn default() -> Self {
        StationaryParams {
            deriv_tol: 1e-2,
            zero_tol: tol::ZERO_CONTAIN,
        }
    }
}

/// Drives the descent along a decreasing epsilon schedule, producing
/// iterates that approach the componentwise infimum with vanishing
/// directional derivatives (or zero-containing ones).
///
/// For each epsilon the descent restarts from the previous iterate when it
/// is an epsilon-minimizer of both endpoints, and otherwise from the
/// sampled point with the smallest endpoint defect, mirroring how an
/// approximate minimizer is chosen before applying the principle.
pub fn stationary_sequence(
    space: &SampledSpace,
    f: &IntervalFn,
    epsilons: &[f64],
    params: &StationaryParams,
) -> Result<StationaryReport, EkelandError> {
    if epsilons.is_empty()
        || epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite())
        || epsilons.windows(2).any(|w| w[1] > w[0])
    {
        return Err(EkelandError::BadEpsilons(epsilons.to_vec()));
    }
    let boxdom = match &space.domain {
        crate::ivfunc::Domain::Box(b) => b.clone(),
        crate::ivfunc::Domain::Finite(_) => {
            return Err(EkelandError::Internal {
                context: "stationary".into(),
                message: "stationary sequences need a box domain for derivative probes".into(),
            })
        }
    };
    let inf = infimum(space).value;
    // endpoint defect: the smallest eps for which a point passes the premise
    let defect = |i: usize| {
        let v = &space.values[i];
        (v.lo() - inf.lo()).max(v.hi() - inf.hi())
    };
    let best_start = (0..space.len())
        .min_by(|a, b| defect(*a).total_cmp(&defect(*b)))
        .expect("nonempty space");

    let directions = axis_directions(boxdom.dim());
    let mut steps = Vec::with_capacity(epsilons.len());
    let mut current = best_start;
    for &eps in epsilons {
        let start = if defect(current) <= eps + tol::TEST {
            current
        } else {
            best_start
        };
        let cert = ekeland_minimize(space, eps, start)?;
        current = cert.x_bar;
        let value = space.values[current];
        let coords = boxdom.grid_point(current);
        let mut dir_reports = Vec::with_capacity(directions.len());
        let mut stationary = true;
        for h in &directions {
            let d = gateaux(f, &coords, h).map_err(|e| EkelandError::Internal {
                context: "stationary".into(),
                message: format!("derivative probe failed: {}", e),
            })?;
            let dh_to_zero = d.value.hausdorff(&Interval::ZERO);
            let contains_zero = d.value.contains_zero(params.zero_tol);
            let disjunction_ok =
                d.converged && (dh_to_zero <= params.deriv_tol || contains_zero);
            if !disjunction_ok {
                stationary = false;
            }
            dir_reports.push(StationaryDirection {
                direction: h.clone(),
                derivative: d.value,
                converged: d.converged,
                dh_to_zero,
                contains_zero,
                disjunction_ok,
            });
        }
        steps.push(StationaryStep {
            epsilon: eps,
            point: space.point_ref(current),
            value,
            dh_to_inf: value.hausdorff(&inf),
            within_eps_of_inf: value.lo() <= inf.lo() + eps + tol::TEST
                && value.hi() <= inf.hi() + eps + tol::TEST,
            directions: dir_reports,
            stationary,
        });
    }
    Ok(StationaryReport {
        infimum: inf,
        steps,
    })
}

/// Status of one heuristically checked condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeuristicStatus {
    #[serde(rename = "HEURISTIC-PASS")]
    Pass,
    #[serde(rename = "HEURISTIC-FAIL")]
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct PalaisSmaleReport {
    /// Value behavior: boundedness of the observed values, or convergence
    /// to the supplied target on the tail when one is given.
    pub values: HeuristicStatus,
    pub value_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_gap: Option<f64>,
    /// Tail derivative smallness / zero containment in sampled directions.
    pub derivatives: HeuristicStatus,
    /// Existence of a pair of near points in the second half.
    pub cluster: HeuristicStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_pair: Option<(usize, usize)>,
    pub overall: HeuristicStatus,
}

/// Finite-prefix probe of the compactness condition behind minimizing
/// sequences: value behavior, vanishing derivatives, and clustering.
///
/// All three checks are heuristic; a sequence can only be judged on the
/// finite prefix supplied. The cluster check looks for a pair at distance
/// `<= tol` among the second half of the points, where a convergent
/// subsequence would have to show up.
pub fn palais_smale_probe(
    f: &IntervalFn,
    sequence: &[Vec<f64>],
    target: Option<Interval>,
    tol_cluster: f64,
) -> Result<PalaisSmaleReport, crate::calculus::CalcError> {
    assert!(
        sequence.len() >= 2,
        "probe needs at least two sequence points"
    );
    let dim = sequence[0].len();
    let tail_start = sequence.len() / 2;

    let mut value_bound = 0.0f64;
    let mut target_gap: Option<f64> = None;
    let mut values_ok = true;
    for (k, x) in sequence.iter().enumerate() {
        let v = f.eval(x)?;
        value_bound = value_bound.max(v.lo().abs()).max(v.hi().abs());
        if let Some(c) = target {
            if k >= tail_start {
                let gap = v.hausdorff(&c);
                target_gap = Some(target_gap.map_or(gap, |g: f64| g.max(gap)));
                if gap > tol_cluster {
                    values_ok = false;
                }
            }
        }
    }

    let directions = axis_directions(dim);
    let mut derivatives_ok = true;
    for x in &sequence[tail_start..] {
        for h in &directions {
            let d = gateaux(f, x, h)?;
            let small = d.value.hausdorff(&Interval::ZERO) <= tol_cluster;
            let zero_in = d.value.contains_zero(tol::ZERO_CONTAIN);
            if !d.converged || !(small || zero_in) {
                derivatives_ok = false;
            }
        }
    }

    let mut cluster_pair = None;
    'outer: for i in tail_start..sequence.len() {
        for j in (i + 1)..sequence.len() {
            if euclid(&sequence[i], &sequence[j]) <= tol_cluster {
                cluster_pair = Some((i, j));
                break 'outer;
            }
        }
    }

    let status = |ok: bool| {
        if ok {
            HeuristicStatus::Pass
        } else {
            HeuristicStatus::Fail
        }
    };
    let values = status(values_ok);
    let derivatives = status(derivatives_ok);
    let cluster = status(cluster_pair.is_some());
    let overall = status(values_ok && derivatives_ok && cluster_pair.is_some());
    Ok(PalaisSmaleReport {
        values,
        value_bound,
        target_gap,
        derivatives,
        cluster,
        cluster_pair,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivfunc::{BoxDomain, FiniteSpace};

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn line_space(n: usize) -> FiniteSpace {
        let labels = (0..n).map(|i| format!("p{}", i)).collect();
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        FiniteSpace::new(labels, &matrix).unwrap()
    }

    #[test]
    fn caristi_walks_to_the_target() {
        // potential 2|i - 3| on a 10-point line; T steps one place toward 3
        let n = 10;
        let target = 3usize;
        let phi = |i: usize| 2.0 * (i as f64 - target as f64).abs();
        let values: Vec<Interval> = (0..n).map(|i| iv(phi(i), phi(i) + 1.0)).collect();
        let space = SampledSpace::from_table(line_space(n), values).unwrap();
        let map: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                if i == target {
                    vec![i]
                } else if i < target {
                    vec![i + 1]
                } else {
                    vec![i - 1]
                }
            })
            .collect();
        let rep = caristi_fixed_point(&space, &map).unwrap();
        assert_eq!(rep.fixed_point, target);
        assert!(rep.in_map_image);
    }

    #[test]
    fn caristi_rejects_non_descending_map() {
        let n = 4;
        let values: Vec<Interval> = (0..n).map(|i| iv(i as f64, i as f64 + 1.0)).collect();
        let space = SampledSpace::from_table(line_space(n), values).unwrap();
        // moving up the chain violates the descent hypothesis
        let map: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1).min(n - 1)]).collect();
        match caristi_fixed_point(&space, &map) {
            Err(EkelandError::CaristiHypothesis { x, y }) => {
                assert_eq!((x, y), (0, 1));
            }
            other => panic!("expected hypothesis violation, got {:?}", other.map(|r| r.fixed_point)),
        }
    }

    #[test]
    fn caristi_rejects_empty_map_values() {
        let values = vec![iv(0.0, 1.0), iv(1.0, 2.0)];
        let space = SampledSpace::from_table(line_space(2), values).unwrap();
        let map = vec![vec![0], vec![]];
        assert!(matches!(
            caristi_fixed_point(&space, &map),
            Err(EkelandError::EmptyMapValue { x: 1 })
        ));
    }

    #[test]
    fn takahashi_reaches_the_minimal_set() {
        // strictly increasing chain f(i) = [2i, 2i+1]: minimal set {0},
        // and every non-minimal i is dominated by i-1 within distance 1
        let n = 10;
        let values: Vec<Interval> = (0..n).map(|i| iv(2.0 * i as f64, 2.0 * i as f64 + 1.0)).collect();
        let space = SampledSpace::from_table(line_space(n), values).unwrap();
        let rep = takahashi_minimize(&space).unwrap();
        assert_eq!(rep.minimal_set, vec![0]);
        assert_eq!(rep.minimizer, 0);
    }

    #[test]
    fn takahashi_rejects_stuck_instance() {
        // point 2 is non-minimal ([4,5] is strictly above [0,1]) but f
        // drops by less than the distance to any better point
        let s = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[
                vec![0.0, 1.0, 10.0],
                vec![1.0, 0.0, 10.0],
                vec![10.0, 10.0, 0.0],
            ],
        )
        .unwrap();
        let values = vec![iv(0.0, 1.0), iv(0.5, 1.5), iv(4.0, 5.0)];
        let space = SampledSpace::from_table(s, values).unwrap();
        assert!(matches!(
            takahashi_minimize(&space),
            Err(EkelandError::TakahashiStuck { x: 2 })
        ));
    }

    #[test]
    fn critical_point_verdicts() {
        // f = [-x, x]: derivative along any h is [-|h|, |h|], contains 0
        let f = IntervalFn::parse("-x", "x").unwrap();
        let rep = critical_point_check(&f, &[0.5], &axis_directions(1), tol::ZERO_CONTAIN).unwrap();
        assert_eq!(rep.verdict, CriticalVerdict::Critical);

        // f = [-x^2, x^2]: derivative [-2hx, 2hx] (h x >= 0 ordered),
        // always contains zero, so every point is critical
        let f = IntervalFn::parse("-x^2", "x^2").unwrap();
        for x in [0.25, 1.0, -1.5] {
            let rep =
                critical_point_check(&f, &[x], &axis_directions(1), tol::ZERO_CONTAIN).unwrap();
            assert_eq!(rep.verdict, CriticalVerdict::Critical, "x = {}", x);
        }

        // strictly sloped band is not critical
        let f = IntervalFn::parse("x", "x+1").unwrap();
        let rep = critical_point_check(&f, &[0.0], &axis_directions(1), tol::ZERO_CONTAIN).unwrap();
        assert_eq!(rep.verdict, CriticalVerdict::NotCritical);
    }

    #[test]
    fn stationary_sequence_drifts_to_the_infimum() {
        let b = BoxDomain::new(vec![-50.0], vec![50.0], 2001).unwrap();
        let f = IntervalFn::parse("1/(x^2+1)", "1/(x^2+1)+1").unwrap();
        let space = SampledSpace::from_fn(b, &f).unwrap();
        let eps = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01];
        let rep = stationary_sequence(&space, &f, &eps, &StationaryParams::default()).unwrap();
        assert_eq!(rep.steps.len(), eps.len());
        for step in &rep.steps {
            assert!(step.within_eps_of_inf, "eps = {}", step.epsilon);
        }
        let last = rep.steps.last().unwrap();
        assert!(last.dh_to_inf <= 1e-2);
        assert!(last.stationary);
    }

    #[test]
    fn stationary_sequence_validates_epsilons() {
        let b = BoxDomain::new(vec![-1.0], vec![1.0], 11).unwrap();
        let f = IntervalFn::parse("x^2", "x^2+1").unwrap();
        let space = SampledSpace::from_fn(b, &f).unwrap();
        for bad in [vec![], vec![0.0], vec![-1.0], vec![0.1, 0.5]] {
            assert!(matches!(
                stationary_sequence(&space, &f, &bad, &StationaryParams::default()),
                Err(EkelandError::BadEpsilons(_))
            ));
        }
    }

    #[test]
    fn palais_smale_fails_without_cluster() {
        // escaping sequence x_k = k: values tend to the infimum and
        // derivatives vanish, but no two tail points come close
        let f = IntervalFn::parse("1/(x^2+1)", "1/(x^2+1)+1").unwrap();
        let seq: Vec<Vec<f64>> = (1..=12).map(|k| vec![k as f64]).collect();
        let rep = palais_smale_probe(&f, &seq, None, 1e-3).unwrap();
        assert_eq!(rep.values, HeuristicStatus::Pass);
        assert_eq!(rep.derivatives, HeuristicStatus::Pass);
        assert_eq!(rep.cluster, HeuristicStatus::Fail);
        assert_eq!(rep.overall, HeuristicStatus::Fail);
    }

    #[test]
    fn palais_smale_passes_with_cluster() {
        // alternating sequence collapsing to 0 under f = [-x^2, x^2]
        let f = IntervalFn::parse("-x^2", "x^2").unwrap();
        let seq: Vec<Vec<f64>> = (1..=12)
            .map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 } / (1e4 * k as f64)])
            .collect();
        let rep = palais_smale_probe(&f, &seq, Some(Interval::ZERO), 1e-3).unwrap();
        assert_eq!(rep.values, HeuristicStatus::Pass);
        assert_eq!(rep.derivatives, HeuristicStatus::Pass);
        assert_eq!(rep.cluster, HeuristicStatus::Pass);
        assert_eq!(rep.overall, HeuristicStatus::Pass);
    }
}
