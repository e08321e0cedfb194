//! Min-max level estimation over piecewise-linear paths.
//!
//! Given two low points `p0` (inside an open box `omega`) and `p1`
//! (outside its closure) separated by a barrier, the estimator minimizes
//!
//! ```text
//! Phi(l) = [ max f_lo along l,  max f_hi along l ]
//! ```
//!
//! over piecewise-linear paths from `p0` to `p1` with a fixed number of
//! interior nodes, by coordinate descent on the node coordinates with
//! seeded random restarts. The barrier level `alpha` is the componentwise
//! minimum of `f` over a mesh of the boundary of `omega`; inputs are
//! rejected unless `f(p0)` and `f(p1)` are strictly below `alpha` on both
//! endpoints. Every path from `p0` to `p1` crosses the boundary, so
//! `alpha le Phi(l)` up to sampling error; the report records that
//! comparison for the returned path.
//!
//! This is a numerical estimate: the path family, the sampling density
//! along segments, and the sweep budget all bound what it can see. The
//! report says whether coordinate descent stabilized or merely ran out of
//! budget.

use super::EkelandError;
use crate::interval::Interval;
use crate::ivfunc::{BoxDomain, FnError, IntervalFn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub struct MountainPassInput<'a> {
    pub f: &'a IntervalFn,
    /// Box the path nodes live in (also the candidate grid for sweeps).
    pub domain: &'a BoxDomain,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub omega_lower: Vec<f64>,
    pub omega_upper: Vec<f64>,
    /// Number of interior path nodes.
    pub nodes: usize,
    pub samples_per_segment: usize,
    /// Coordinate sweep budget per restart (across refinement phases).
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl<'a> MountainPassInput<'a> {
    pub fn new(f: &'a IntervalFn, domain: &'a BoxDomain, p0: Vec<f64>, p1: Vec<f64>, omega_lower: Vec<f64>, omega_upper: Vec<f64>) -> Self {
        MountainPassInput {
            f,
            domain,
            p0,
            p1,
            omega_lower,
            omega_upper,
            nodes: 5,
            samples_per_segment: 16,
            sweeps: 30,
            restarts: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MountainPassReport {
    /// Componentwise minimum of `f` over the boundary mesh.
    pub alpha: Interval,
    /// `Phi` of the best path found.
    pub c: Interval,
    /// Componentwise minima of the two `Phi` endpoints over every path
    /// evaluated; a lower estimate than `c` when the endpoints prefer
    /// different paths.
    pub component_best: Interval,
    pub best_path: Vec<Vec<f64>>,
    /// Sample point on the best path attaining the `f_lo + f_hi` maximum.
    pub argmax: Vec<f64>,
    pub paths_evaluated: usize,
    /// Coordinate descent reached a fixed point in every restart (versus
    /// exhausting the sweep budget).
    pub stabilized: bool,
    /// `alpha le c` held (up to 1e-9) for the returned path.
    pub alpha_le_c: bool,
}

struct PathScore {
    max_lo: f64,
    max_hi: f64,
    argmax: Vec<f64>,
}

fn eval_path(
    f: &IntervalFn,
    vertices: &[Vec<f64>],
    samples_per_segment: usize,
) -> Result<PathScore, FnError> {
    let mut max_lo = f64::NEG_INFINITY;
    let mut max_hi = f64::NEG_INFINITY;
    let mut best_sum = f64::NEG_INFINITY;
    let mut argmax = vertices[0].clone();
    let dim = vertices[0].len();
    let mut point = vec![0.0; dim];
    let s = samples_per_segment.max(1);
    for w in vertices.windows(2) {
        for i in 0..s {
            let t = i as f64 / s as f64;
            for d in 0..dim {
                point[d] = w[0][d] + t * (w[1][d] - w[0][d]);
            }
            let v = f.eval(&point)?;
            max_lo = max_lo.max(v.lo());
            max_hi = max_hi.max(v.hi());
            if v.lo() + v.hi() > best_sum {
                best_sum = v.lo() + v.hi();
                argmax.clone_from_slice(&point);
            }
        }
    }
    let last = vertices.last().unwrap();
    let v = f.eval(last)?;
    max_lo = max_lo.max(v.lo());
    max_hi = max_hi.max(v.hi());
    if v.lo() + v.hi() > best_sum {
        argmax.clone_from_slice(last);
    }
    Ok(PathScore {
        max_lo,
        max_hi,
        argmax,
    })
}

/// Componentwise minimum of `f` over a mesh of the boundary of the box
/// `[omega_lower, omega_upper]`.
fn boundary_minimum(
    f: &IntervalFn,
    omega_lower: &[f64],
    omega_upper: &[f64],
    grid_per_dim: usize,
) -> Result<Interval, FnError> {
    let dim = omega_lower.len();
    let mut min_lo = f64::INFINITY;
    let mut min_hi = f64::INFINITY;
    if dim == 1 {
        for v in [omega_lower[0], omega_upper[0]] {
            let val = f.eval(&[v])?;
            min_lo = min_lo.min(val.lo());
            min_hi = min_hi.min(val.hi());
        }
        return Ok(Interval::new(min_lo, min_hi).expect("componentwise minima ordered"));
    }
    // per-face mesh resolution bounded so the total stays desk-sized
    let budget = 100_000usize / (2 * dim);
    let mut g = grid_per_dim.max(2);
    while (g as u128).pow((dim - 1) as u32) > budget as u128 && g > 2 {
        g -= 1;
    }
    let mut point = vec![0.0; dim];
    for face_dim in 0..dim {
        for face_val in [omega_lower[face_dim], omega_upper[face_dim]] {
            let rest: Vec<usize> = (0..dim).filter(|d| *d != face_dim).collect();
            let total = g.pow(rest.len() as u32);
            for flat in 0..total {
                let mut rem = flat;
                point[face_dim] = face_val;
                for &d in rest.iter().rev() {
                    let i = rem % g;
                    rem /= g;
                    point[d] =
                        omega_lower[d] + i as f64 * (omega_upper[d] - omega_lower[d]) / (g - 1) as f64;
                }
                let val = f.eval(&point)?;
                min_lo = min_lo.min(val.lo());
                min_hi = min_hi.min(val.hi());
            }
        }
    }
    Ok(Interval::new(min_lo, min_hi).expect("componentwise minima ordered"))
}

pub fn mountain_pass(input: &MountainPassInput<'_>) -> Result<MountainPassReport, EkelandError> {
    let dim = input.domain.dim();
    let geo = |msg: String| EkelandError::PathGeometry(msg);
    if input.p0.len() != dim || input.p1.len() != dim {
        return Err(geo(format!(
            "p0/p1 must have {} coordinates, got {} and {}",
            dim,
            input.p0.len(),
            input.p1.len()
        )));
    }
    if input.omega_lower.len() != dim || input.omega_upper.len() != dim {
        return Err(geo("omega bounds must match the domain dimension".into()));
    }
    for d in 0..dim {
        if !(input.omega_lower[d] < input.omega_upper[d]) {
            return Err(geo(format!("omega is empty in coordinate {}", d)));
        }
        if input.omega_lower[d] < input.domain.lower()[d]
            || input.omega_upper[d] > input.domain.upper()[d]
        {
            return Err(geo(format!("omega exceeds the domain box in coordinate {}", d)));
        }
    }
    if !input.domain.contains(&input.p0) || !input.domain.contains(&input.p1) {
        return Err(geo("p0 and p1 must lie in the domain box".into()));
    }
    let p0_interior = (0..dim)
        .all(|d| input.omega_lower[d] < input.p0[d] && input.p0[d] < input.omega_upper[d]);
    if !p0_interior {
        return Err(geo("p0 must lie strictly inside omega".into()));
    }
    let p1_outside = (0..dim)
        .any(|d| input.p1[d] < input.omega_lower[d] || input.p1[d] > input.omega_upper[d]);
    if !p1_outside {
        return Err(geo("p1 must lie outside the closure of omega".into()));
    }
    if input.nodes == 0 {
        return Err(geo("need at least one interior node".into()));
    }

    let wrap = |e: FnError| EkelandError::Internal {
        context: "mountain_pass".into(),
        message: format!("function evaluation failed: {}", e),
    };
    let alpha = boundary_minimum(
        input.f,
        &input.omega_lower,
        &input.omega_upper,
        input.domain.grid_per_dim(),
    )
    .map_err(wrap)?;
    for (which, p) in [("p0", &input.p0), ("p1", &input.p1)] {
        let v = input.f.eval(p).map_err(wrap)?;
        if !v.lt(&alpha) {
            return Err(EkelandError::BarrierCondition {
                which: which.to_string(),
                value: v,
                alpha,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let m = input.nodes;
    let mut paths_evaluated = 0usize;
    let mut component_lo = f64::INFINITY;
    let mut component_hi = f64::INFINITY;
    let mut best: Option<(f64, PathScore, Vec<Vec<f64>>)> = None;
    let mut all_stabilized = true;

    for restart in 0..input.restarts.max(1) {
        let mut nodes: Vec<Vec<f64>> = if restart == 0 {
            (1..=m)
                .map(|k| {
                    let t = k as f64 / (m + 1) as f64;
                    (0..dim)
                        .map(|d| input.p0[d] + t * (input.p1[d] - input.p0[d]))
                        .collect()
                })
                .collect()
        } else {
            (0..m)
                .map(|_| {
                    (0..dim)
                        .map(|d| rng.gen_range(input.domain.lower()[d]..=input.domain.upper()[d]))
                        .collect()
                })
                .collect()
        };

        let assemble = |nodes: &[Vec<f64>]| {
            let mut v = Vec::with_capacity(m + 2);
            v.push(input.p0.clone());
            v.extend(nodes.iter().cloned());
            v.push(input.p1.clone());
            v
        };
        let mut score = eval_path(input.f, &assemble(&nodes), input.samples_per_segment)
            .map_err(wrap)?;
        paths_evaluated += 1;
        component_lo = component_lo.min(score.max_lo);
        component_hi = component_hi.min(score.max_hi);

        // phase 0 scans the whole coordinate range; later phases shrink
        // the scan radius around the incumbent
        let phases: [Option<f64>; 3] = [None, Some(1.0 / 20.0), Some(1.0 / 400.0)];
        let mut phase = 0usize;
        let mut sweeps_used = 0usize;
        let mut stabilized = false;
        const CANDIDATES: usize = 21;
        while phase < phases.len() {
            if sweeps_used >= input.sweeps {
                break;
            }
            sweeps_used += 1;
            let mut improved = false;
            for k in 0..m {
                for d in 0..dim {
                    let lo_d = input.domain.lower()[d];
                    let hi_d = input.domain.upper()[d];
                    let (scan_lo, scan_hi) = match phases[phase] {
                        None => (lo_d, hi_d),
                        Some(frac) => {
                            let r = (hi_d - lo_d) * frac;
                            ((nodes[k][d] - r).max(lo_d), (nodes[k][d] + r).min(hi_d))
                        }
                    };
                    let original = nodes[k][d];
                    let mut best_here = score.max_lo + score.max_hi;
                    let mut best_val = original;
                    for c in 0..CANDIDATES {
                        let cand =
                            scan_lo + c as f64 * (scan_hi - scan_lo) / (CANDIDATES - 1) as f64;
                        if cand == original {
                            continue;
                        }
                        nodes[k][d] = cand;
                        let s = eval_path(input.f, &assemble(&nodes), input.samples_per_segment)
                            .map_err(wrap)?;
                        paths_evaluated += 1;
                        component_lo = component_lo.min(s.max_lo);
                        component_hi = component_hi.min(s.max_hi);
                        if s.max_lo + s.max_hi < best_here - 1e-15 {
                            best_here = s.max_lo + s.max_hi;
                            best_val = cand;
                        }
                    }
                    nodes[k][d] = best_val;
                    if best_val != original {
                        improved = true;
                        score = eval_path(input.f, &assemble(&nodes), input.samples_per_segment)
                            .map_err(wrap)?;
                        paths_evaluated += 1;
                    }
                }
            }
            if !improved {
                phase += 1;
                if phase == phases.len() {
                    stabilized = true;
                }
            }
        }
        all_stabilized &= stabilized;

        let total = score.max_lo + score.max_hi;
        let replace = match &best {
            Some((s, _, _)) => total < *s,
            None => true,
        };
        if replace {
            best = Some((total, score, assemble(&nodes)));
        }
    }

    let (_, best_score, best_path) = best.expect("at least one restart runs");
    let c = Interval::new(best_score.max_lo, best_score.max_hi)
        .expect("path maxima are ordered");
    let component_best =
        Interval::new(component_lo, component_hi).expect("componentwise maxima ordered");
    let alpha_le_c = alpha.lo() <= c.lo() + 1e-9 && alpha.hi() <= c.hi() + 1e-9;
    Ok(MountainPassReport {
        alpha,
        c,
        component_best,
        argmax: best_score.argmax,
        best_path,
        paths_evaluated,
        stabilized: all_stabilized,
        alpha_le_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn double_well_input<'a>(
        f: &'a IntervalFn,
        domain: &'a BoxDomain,
    ) -> MountainPassInput<'a> {
        MountainPassInput::new(
            f,
            domain,
            vec![-1.0],
            vec![1.0],
            vec![-1.25],
            vec![0.5],
        )
    }

    #[test]
    fn double_well_saddle_level() {
        // f = (x^2-1)^2 as a degenerate interval: wells at +/-1 with value
        // 0, barrier at 0 with value 1; any path from -1 to 1 crosses it.
        let f = IntervalFn::parse("(x^2-1)^2", "(x^2-1)^2").unwrap();
        let domain = BoxDomain::new(vec![-1.5], vec![1.5], 301).unwrap();
        let rep = mountain_pass(&double_well_input(&f, &domain)).unwrap();
        assert!(rep.c.hausdorff(&iv(1.0, 1.0)) <= 1e-2, "c = {}", rep.c);
        assert!(rep.argmax[0].abs() <= 0.1, "argmax = {:?}", rep.argmax);
        assert!(rep.alpha_le_c);
        assert!(rep.stabilized);
    }

    #[test]
    fn double_well_band_keeps_unit_width() {
        let f = IntervalFn::parse("(x^2-1)^2", "(x^2-1)^2+1").unwrap();
        let domain = BoxDomain::new(vec![-1.5], vec![1.5], 301).unwrap();
        let rep = mountain_pass(&double_well_input(&f, &domain)).unwrap();
        assert!(rep.c.hausdorff(&iv(1.0, 2.0)) <= 1e-2, "c = {}", rep.c);
        assert!(rep.alpha_le_c);
    }

    #[test]
    fn rejects_low_barrier() {
        // monotone slope: no barrier between the endpoints, condition fails
        let f = IntervalFn::parse("x", "x+1").unwrap();
        let domain = BoxDomain::new(vec![-1.5], vec![1.5], 101).unwrap();
        let input = double_well_input(&f, &domain);
        match mountain_pass(&input) {
            Err(EkelandError::BarrierCondition { which, .. }) => assert_eq!(which, "p0"),
            other => panic!("expected barrier rejection, got {:?}", other.map(|r| r.c)),
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let f = IntervalFn::parse("(x^2-1)^2", "(x^2-1)^2").unwrap();
        let domain = BoxDomain::new(vec![-1.5], vec![1.5], 101).unwrap();
        let mut input = double_well_input(&f, &domain);
        input.p1 = vec![0.0]; // inside omega
        assert!(matches!(
            mountain_pass(&input),
            Err(EkelandError::PathGeometry(_))
        ));
        let mut input = double_well_input(&f, &domain);
        input.p0 = vec![0.75]; // outside omega
        assert!(matches!(
            mountain_pass(&input),
            Err(EkelandError::PathGeometry(_))
        ));
    }

    #[test]
    fn two_dim_ridge() {
        // ridge along x1 = 0 with a pass at the origin: f = (x1^2-1)^2 +
        // x2^2 separates (-1,0) from (1,0); optimal path value 1 at (0,0).
        let f = IntervalFn::parse("(x1^2-1)^2+x2^2", "(x1^2-1)^2+x2^2").unwrap();
        let domain = BoxDomain::new(vec![-1.5, -1.0], vec![1.5, 1.0], 41).unwrap();
        let mut input = MountainPassInput::new(
            &f,
            &domain,
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![-1.25, -0.9],
            vec![0.5, 0.9],
        );
        input.nodes = 3;
        input.restarts = 3;
        let rep = mountain_pass(&input).unwrap();
        assert!(rep.c.hausdorff(&iv(1.0, 1.0)) <= 2e-2, "c = {}", rep.c);
        assert!(euclidish(&rep.argmax, &[0.0, 0.0]) < 0.15);
    }

    fn euclidish(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}
