//! Finite non-cooperative games with interval-valued losses.
//!
//! Each of `n` players picks from a finite strategy set carrying its own
//! metric; a profile is one strategy index per player. Player `i` pays the
//! interval loss `f_i(profile)`. A profile `x` is an approximate
//! equilibrium for slack `eps` when no player can strictly improve both
//! loss endpoints by more than `eps` times the distance moved:
//!
//! ```text
//! for all i, y_i:  not ( f_i(y_i, x_-i) + [eps d_i(x_i, y_i), ..] lt f_i(x) )
//! ```
//!
//! Search goes through the aggregated bifunction
//! `F(x, y) = sum_i ( f_i(y_i, x_-i) gh- f_i(x_i, x_-i) )` over the product
//! space with the sum metric: a descent point whose certificate rules out
//! `F(x_bar, y) + [eps d, eps d] le [0,0]` is an approximate equilibrium,
//! because for a unilateral deviation the aggregate collapses to a single
//! gh difference and the strict comparison against `[0,0]` is endpoint by
//! endpoint the same as the equilibrium condition. That implication is
//! only backed by the triangle property of `F`; when the property fails
//! the search still runs but labels its result heuristic and falls back to
//! exhaustive scanning if the candidate fails verification.

use crate::ekeland::{check_triangle, ekeland_bifunction, BifunctionCertificate, EkelandError, TriangleCheck};
use crate::interval::Interval;
use crate::ivfunc::{DomainError, FiniteSpace};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("game shape invalid: {0}")]
    Shape(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("profile {profile:?} invalid: {reason}")]
    BadProfile { profile: Vec<usize>, reason: String },
    #[error("no eps-equilibrium exists in this finite game ({checked} profiles checked exhaustively)")]
    NoEpsilonNash { checked: usize },
    #[error(transparent)]
    Solver(#[from] EkelandError),
}

pub struct IntervalGame {
    strategy_spaces: Vec<FiniteSpace>,
    /// Per player, loss at every profile; profiles are flattened with
    /// player 0 most significant.
    losses: Vec<Vec<Interval>>,
}

impl IntervalGame {
    pub fn new(
        strategy_spaces: Vec<FiniteSpace>,
        losses: Vec<Vec<Interval>>,
    ) -> Result<Self, GameError> {
        if strategy_spaces.is_empty() {
            return Err(GameError::Shape("need at least one player".into()));
        }
        if strategy_spaces.iter().any(|s| s.len() == 0) {
            return Err(GameError::Shape("every strategy set must be nonempty".into()));
        }
        let count: usize = strategy_spaces.iter().map(|s| s.len()).product();
        if losses.len() != strategy_spaces.len() {
            return Err(GameError::Shape(format!(
                "{} strategy sets but {} loss tables",
                strategy_spaces.len(),
                losses.len()
            )));
        }
        for (i, table) in losses.iter().enumerate() {
            if table.len() != count {
                return Err(GameError::Shape(format!(
                    "loss table for player {} has {} entries, need {} (one per profile)",
                    i,
                    table.len(),
                    count
                )));
            }
        }
        Ok(IntervalGame {
            strategy_spaces,
            losses,
        })
    }

    pub fn players(&self) -> usize {
        self.strategy_spaces.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.strategy_spaces.iter().map(|s| s.len()).collect()
    }

    pub fn profile_count(&self) -> usize {
        self.strategy_spaces.iter().map(|s| s.len()).product()
    }

    pub fn strategy_space(&self, player: usize) -> &FiniteSpace {
        &self.strategy_spaces[player]
    }

    pub fn flat_index(&self, profile: &[usize]) -> usize {
        let mut flat = 0;
        for (space, &s) in self.strategy_spaces.iter().zip(profile) {
            flat = flat * space.len() + s;
        }
        flat
    }

    pub fn profile(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.players()];
        for (slot, space) in self.strategy_spaces.iter().enumerate().rev() {
            out[slot] = flat % space.len();
            flat /= space.len();
        }
        out
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<(), GameError> {
        if profile.len() != self.players() {
            return Err(GameError::BadProfile {
                profile: profile.to_vec(),
                reason: format!("need {} entries", self.players()),
            });
        }
        for (i, (&s, space)) in profile.iter().zip(&self.strategy_spaces).enumerate() {
            if s >= space.len() {
                return Err(GameError::BadProfile {
                    profile: profile.to_vec(),
                    reason: format!("strategy {} out of range for player {}", s, i),
                });
            }
        }
        Ok(())
    }

    pub fn loss_flat(&self, player: usize, flat: usize) -> Interval {
        self.losses[player][flat]
    }

    pub fn loss(&self, player: usize, profile: &[usize]) -> Interval {
        self.losses[player][self.flat_index(profile)]
    }

    /// Sum metric over the product space.
    pub fn profile_dist(&self, a: usize, b: usize) -> f64 {
        let pa = self.profile(a);
        let pb = self.profile(b);
        self.strategy_spaces
            .iter()
            .zip(pa.iter().zip(&pb))
            .map(|(space, (&i, &j))| space.dist(i, j))
            .sum()
    }

    /// Aggregated deviation bifunction
    /// `F(x, y) = sum_i ( f_i(y_i, x_-i) gh- f_i(x_i, x_-i) )`.
    pub fn aggregate(&self, x_flat: usize, y_flat: usize) -> Interval {
        let x = self.profile(x_flat);
        let y = self.profile(y_flat);
        let mut acc = Interval::ZERO;
        let mut switched = x.clone();
        for i in 0..self.players() {
            if y[i] == x[i] {
                continue; // the term is identically [0,0]
            }
            switched[i] = y[i];
            let dev = self.loss(i, &switched);
            switched[i] = x[i];
            let base = self.losses[i][x_flat];
            acc = acc + dev.gh_diff(&base);
        }
        acc
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NashViolation {
    pub player: usize,
    pub deviation: usize,
    pub deviation_label: String,
    /// `f_player(deviation, x_-player) + [eps d, eps d]`.
    pub shifted_loss: Interval,
    /// `f_player(x)`.
    pub current_loss: Interval,
}

#[derive(Debug, Clone, Serialize)]
pub struct NashVerdict {
    pub epsilon: f64,
    pub is_epsilon_nash: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<NashViolation>,
}

/// Checks the approximate-equilibrium condition for every unilateral
/// deviation; reports the first violating (player, deviation).
pub fn verify_epsilon_nash(
    game: &IntervalGame,
    profile: &[usize],
    epsilon: f64,
) -> Result<NashVerdict, GameError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(GameError::BadEpsilon(epsilon));
    }
    game.check_profile(profile)?;
    let current: Vec<Interval> = (0..game.players())
        .map(|i| game.loss(i, profile))
        .collect();
    let mut switched = profile.to_vec();
    for i in 0..game.players() {
        let space = &game.strategy_spaces[i];
        for y in 0..space.len() {
            if y == profile[i] {
                continue;
            }
            switched[i] = y;
            let dev = game.loss(i, &switched);
            let d = space.dist(profile[i], y);
            let shifted = dev + Interval::new(epsilon * d, epsilon * d).expect("finite");
            if shifted.lt(&current[i]) {
                let violation = NashViolation {
                    player: i,
                    deviation: y,
                    deviation_label: space.label(y).to_string(),
                    shifted_loss: shifted,
                    current_loss: current[i],
                };
                return Ok(NashVerdict {
                    epsilon,
                    is_epsilon_nash: false,
                    violation: Some(violation),
                });
            }
        }
        switched[i] = profile[i];
    }
    Ok(NashVerdict {
        epsilon,
        is_epsilon_nash: true,
        violation: None,
    })
}

#[derive(Debug, Serialize)]
pub struct NashSearch {
    pub profile: Vec<usize>,
    pub profile_labels: Vec<String>,
    pub verdict: NashVerdict,
    /// "descent" when the bifunction run produced the profile,
    /// "exhaustive-fallback" when scanning had to take over.
    pub method: &'static str,
    /// "theorem" only when the triangle property was verified over all
    /// triples; otherwise "heuristic".
    pub guarantee: &'static str,
    pub triangle: TriangleCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BifunctionCertificate>,
}

/// Searches for an approximate equilibrium starting from `x0`.
///
/// The descent candidate is always re-verified against the definition.
/// With an exhaustively verified triangle property a failed verification
/// is an internal error; without it the search falls back to scanning all
/// profiles and errors only if none qualifies (which is decidable here).
pub fn find_epsilon_nash(
    game: &IntervalGame,
    epsilon: f64,
    x0: &[usize],
    seed: u64,
) -> Result<NashSearch, GameError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(GameError::BadEpsilon(epsilon));
    }
    game.check_profile(x0)?;
    let n = game.profile_count();
    let aggregate = |x: usize, y: usize| game.aggregate(x, y);
    let dist = |x: usize, y: usize| game.profile_dist(x, y);

    let cert = ekeland_bifunction(
        n,
        &aggregate,
        &dist,
        0.0,
        epsilon,
        game.flat_index(x0),
        seed,
        format!("all {} strategy profiles", n),
    )?;
    let candidate = game.profile(cert.inner.x_bar);
    let verdict = verify_epsilon_nash(game, &candidate, epsilon)?;
    let labels = |p: &[usize]| {
        p.iter()
            .enumerate()
            .map(|(i, &s)| game.strategy_spaces[i].label(s).to_string())
            .collect::<Vec<_>>()
    };
    if verdict.is_epsilon_nash {
        let guarantee = if cert.triangle.holds && cert.triangle.exhaustive {
            "theorem"
        } else {
            "heuristic"
        };
        return Ok(NashSearch {
            profile_labels: labels(&candidate),
            profile: candidate,
            verdict,
            method: "descent",
            guarantee,
            triangle: cert.triangle.clone(),
            certificate: Some(cert),
        });
    }
    if cert.triangle.holds && cert.triangle.exhaustive {
        return Err(GameError::Solver(EkelandError::Internal {
            context: "find_epsilon_nash".into(),
            message: format!(
                "triangle property verified but descent profile {:?} failed the equilibrium check",
                candidate
            ),
        }));
    }
    // no theorem backing: scan every profile for a verifiable equilibrium
    for flat in 0..n {
        let profile = game.profile(flat);
        let verdict = verify_epsilon_nash(game, &profile, epsilon)?;
        if verdict.is_epsilon_nash {
            return Ok(NashSearch {
                profile_labels: labels(&profile),
                profile,
                verdict,
                method: "exhaustive-fallback",
                guarantee: "heuristic",
                triangle: cert.triangle,
                certificate: None,
            });
        }
    }
    Err(GameError::NoEpsilonNash { checked: n })
}

/// Triangle check of the aggregated bifunction alone (diagnostic).
pub fn check_aggregate_triangle(game: &IntervalGame, seed: u64) -> TriangleCheck {
    check_triangle(game.profile_count(), &|x, y| game.aggregate(x, y), seed)
}
