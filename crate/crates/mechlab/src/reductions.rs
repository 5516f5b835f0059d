//! Reductions between input formats: lift a mechanism to a finer input kind
//! by extracting the coarser action, or project a location mechanism down
//! to ranking / voting inputs and certify the projection with an explicit
//! action map.
//!
//! A reduction is checked, not assumed: [`check_reduction`] replays truthful
//! profiles of the source kind through the map and compares lotteries
//! component by component.

use std::rc::Rc;

use itertools::Itertools;
use thiserror::Error;

use crate::evaluation::{truthful_action_profiles, EvaluationError};
use crate::geometry::{
    favorite_candidates, ranking_zones_line, true_rankings, GeometryError, Instance, Point,
};
use crate::mechanisms::{
    locations_of, rankings_of, votes_of, Action, CandidateView, InputKind, Lottery, Mechanism,
    MechanismError,
};

/// Per-component tolerance when comparing a source lottery against the
/// mapped target mixture.
pub const REDUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("cannot lift a {from} mechanism to {to} input")]
    LiftDirection { from: InputKind, to: InputKind },
    #[error("projection needs a location mechanism, got {got}")]
    WrongSourceKind { got: InputKind },
    #[error("two-candidate projection got {m} candidates")]
    TwoCandidatesOnly { m: usize },
    #[error("two-candidate projection needs line candidates")]
    LineOnlyProjection,
    #[error("border fraction must lie in [0, 1], got {0}")]
    BadGamma(f64),
    #[error("ranking {0:?} does not match any zone")]
    NoZoneForRanking(Vec<usize>),
    #[error("mechanism is inconsistent at the border: the endpoint reports agree (p2={p2}, p3={p3}) but the midpoint report differs (p1={p1})")]
    InconsistentBorderMix { p1: f64, p2: f64, p3: f64 },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

// ---------------------------------------------------------------------------
// Lifting to finer inputs
// ---------------------------------------------------------------------------

/// A mechanism re-exposed under a finer input kind: the coarser action is
/// extracted from each report (top of the ranking, favorite candidate, or
/// index-tie-broken true ranking) and fed to the inner mechanism.
pub struct Lifted {
    inner: Rc<dyn Mechanism>,
    to: InputKind,
}

/// Lift `voting -> ranking`, `voting -> location`, or `ranking -> location`.
pub fn lift(inner: Rc<dyn Mechanism>, to: InputKind) -> Result<Lifted, ReductionError> {
    let from = inner.input_kind();
    let valid = matches!(
        (from, to),
        (InputKind::Voting, InputKind::Ranking)
            | (InputKind::Voting, InputKind::Location)
            | (InputKind::Ranking, InputKind::Location)
    );
    if !valid {
        return Err(ReductionError::LiftDirection { from, to });
    }
    Ok(Lifted { inner, to })
}

impl Mechanism for Lifted {
    fn name(&self) -> String {
        format!("lift:{}:{}", self.to, self.inner.name())
    }

    fn input_kind(&self) -> InputKind {
        self.to
    }

    fn randomized(&self) -> bool {
        self.inner.randomized()
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        let m = view.m();
        let coarse: Vec<Action> = match (self.to, self.inner.input_kind()) {
            (InputKind::Ranking, InputKind::Voting) => rankings_of(profile, m)?
                .into_iter()
                .map(|r| Action::Vote(r[0]))
                .collect(),
            (InputKind::Location, InputKind::Voting) => locations_of(profile)?
                .iter()
                .map(|x| {
                    favorite_candidates(view.metric, view.candidates, x)
                        .map(|f| Action::Vote(f[0]))
                })
                .collect::<Result<_, _>>()?,
            (InputKind::Location, InputKind::Ranking) => locations_of(profile)?
                .iter()
                .map(|x| {
                    true_rankings(view.metric, view.candidates, x)
                        .map(|mut r| Action::Ranking(r.swap_remove(0)))
                })
                .collect::<Result<_, _>>()?,
            _ => unreachable!("validated at construction"),
        };
        self.inner.evaluate(view, &coarse)
    }
}

// ---------------------------------------------------------------------------
// Consistent action maps
// ---------------------------------------------------------------------------

/// How one agent's source action translates to (a mixture of) target
/// actions when replaying a reduction.
#[derive(Debug, Clone, PartialEq)]
pub enum ConsistentMap {
    /// Ranking -> vote for the top entry.
    TopOfRanking,
    /// Location -> vote for the nearest candidate, lowest index on ties.
    FavoriteVote,
    /// Location -> the distance ranking, ties broken by candidate index.
    TrueRanking,
    /// Ranking -> the representative point of its zone.
    ZoneRepresentative,
    /// Vote for candidate j -> report candidate j's location.
    VoteToLocation,
    /// Location -> vote; reports tied between both candidates split
    /// `q : 1 - q` between them (two-candidate line instances).
    BorderQMix { q: f64 },
}

impl ConsistentMap {
    /// Expand one source action into weighted target actions.
    pub fn apply(
        &self,
        view: &CandidateView,
        action: &Action,
    ) -> Result<Vec<(f64, Action)>, ReductionError> {
        let one = |a: Action| vec![(1.0, a)];
        match (self, action) {
            (ConsistentMap::TopOfRanking, Action::Ranking(r)) => Ok(one(Action::Vote(r[0]))),
            (ConsistentMap::FavoriteVote, Action::Location(x)) => {
                let favs = favorite_candidates(view.metric, view.candidates, x)?;
                Ok(one(Action::Vote(favs[0])))
            }
            (ConsistentMap::TrueRanking, Action::Location(x)) => {
                let mut rankings = true_rankings(view.metric, view.candidates, x)?;
                Ok(one(Action::Ranking(rankings.swap_remove(0))))
            }
            (ConsistentMap::ZoneRepresentative, Action::Ranking(r)) => {
                let zones = ranking_zones_line(view.candidates)?;
                let zone = zones
                    .zone_of_ranking(r)
                    .ok_or_else(|| ReductionError::NoZoneForRanking(r.clone()))?;
                Ok(one(Action::Location(Point::line(zone.representative))))
            }
            (ConsistentMap::VoteToLocation, Action::Vote(j)) => {
                Ok(one(Action::Location(view.candidates.point(*j).clone())))
            }
            (ConsistentMap::BorderQMix { q }, Action::Location(x)) => {
                let favs = favorite_candidates(view.metric, view.candidates, x)?;
                if favs.len() >= 2 {
                    Ok(vec![(*q, Action::Vote(0)), (1.0 - *q, Action::Vote(1))])
                } else {
                    Ok(one(Action::Vote(favs[0])))
                }
            }
            (_, other) => Err(ReductionError::Mechanism(MechanismError::WrongActionKind {
                index: 0,
                expected: self.source_kind(),
                got: other.kind(),
            })),
        }
    }

    /// The input kind of the source actions this map accepts.
    pub fn source_kind(&self) -> InputKind {
        match self {
            ConsistentMap::TopOfRanking | ConsistentMap::ZoneRepresentative => InputKind::Ranking,
            ConsistentMap::FavoriteVote
            | ConsistentMap::TrueRanking
            | ConsistentMap::BorderQMix { .. } => InputKind::Location,
            ConsistentMap::VoteToLocation => InputKind::Voting,
        }
    }
}

/// The result of a projection: the target mechanism plus the action map
/// that is claimed to make it consistent with the source.
pub struct ReducedMechanism {
    pub target: Box<dyn Mechanism>,
    pub map: ConsistentMap,
}

// ---------------------------------------------------------------------------
// Projections of location mechanisms
// ---------------------------------------------------------------------------

/// Accepts rankings and forwards each agent's zone representative to the
/// wrapped location mechanism.
pub struct RankingProjection {
    inner: Rc<dyn Mechanism>,
}

impl Mechanism for RankingProjection {
    fn name(&self) -> String {
        format!("ranking-projection({})", self.inner.name())
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Ranking
    }

    fn randomized(&self) -> bool {
        self.inner.randomized()
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        let rankings = rankings_of(profile, view.m())?;
        let zones = ranking_zones_line(view.candidates)?;
        let locations: Vec<Action> = rankings
            .into_iter()
            .map(|r| {
                zones
                    .zone_of_ranking(&r)
                    .map(|z| Action::Location(Point::line(z.representative)))
                    .ok_or(MechanismError::UnrecognizedRanking(r))
            })
            .collect::<Result<_, _>>()?;
        self.inner.evaluate(view, &locations)
    }
}

/// Project a location mechanism to ranking inputs via zone representatives.
/// The returned map replays a true location as its index-tie-broken true
/// ranking; [`check_reduction`] then certifies whether the mechanism is
/// actually constant on zones.
pub fn project_location_to_ranking(
    mech: Rc<dyn Mechanism>,
) -> Result<ReducedMechanism, ReductionError> {
    if mech.input_kind() != InputKind::Location {
        return Err(ReductionError::WrongSourceKind { got: mech.input_kind() });
    }
    Ok(ReducedMechanism {
        target: Box::new(RankingProjection { inner: mech }),
        map: ConsistentMap::TrueRanking,
    })
}

/// Accepts votes over two candidates and forwards the voted candidate's
/// location to the wrapped location mechanism.
pub struct VotingProjection {
    inner: Rc<dyn Mechanism>,
}

impl Mechanism for VotingProjection {
    fn name(&self) -> String {
        format!("voting-projection({})", self.inner.name())
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        self.inner.randomized()
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        if view.m() != 2 {
            return Err(MechanismError::UnsupportedCandidates {
                name: self.name(),
                reason: format!("needs exactly 2 candidates, got {}", view.m()),
            });
        }
        let votes = votes_of(profile, 2)?;
        let locations: Vec<Action> = votes
            .into_iter()
            .map(|v| Action::Location(view.candidates.point(v).clone()))
            .collect();
        self.inner.evaluate(view, &locations)
    }
}

/// Project a two-candidate location mechanism to voting inputs. The border
/// weight `q` is read off the mechanism itself by probing a single agent at
/// each candidate and at their midpoint: solving
/// `q p(y1) + (1 - q) p(y2) = p(mid)` in the first component. If the
/// endpoint probes agree but the midpoint disagrees no weight exists and
/// the mechanism is reported inconsistent.
pub fn project_location_to_voting_2cand(
    mech: Rc<dyn Mechanism>,
    view: &CandidateView,
) -> Result<ReducedMechanism, ReductionError> {
    if mech.input_kind() != InputKind::Location {
        return Err(ReductionError::WrongSourceKind { got: mech.input_kind() });
    }
    if view.m() != 2 {
        return Err(ReductionError::TwoCandidatesOnly { m: view.m() });
    }
    if !view.metric.is_line() {
        return Err(ReductionError::LineOnlyProjection);
    }
    let y1 = view.candidates.point(0).x();
    let y2 = view.candidates.point(1).x();
    let probe = |x: f64| -> Result<f64, ReductionError> {
        let lottery = mech.evaluate(view, &[Action::Location(Point::line(x))])?;
        Ok(lottery.prob(0))
    };
    let p2 = probe(y1)?;
    let p3 = probe(y2)?;
    let p1 = probe(0.5 * (y1 + y2))?;
    let q = if (p2 - p3).abs() <= REDUCTION_TOL {
        if (p1 - p2).abs() <= REDUCTION_TOL {
            0.5
        } else {
            return Err(ReductionError::InconsistentBorderMix { p1, p2, p3 });
        }
    } else {
        ((p1 - p3) / (p2 - p3)).clamp(0.0, 1.0)
    };
    Ok(ReducedMechanism {
        target: Box::new(VotingProjection { inner: mech }),
        map: ConsistentMap::BorderQMix { q },
    })
}

// ---------------------------------------------------------------------------
// Consistency checking
// ---------------------------------------------------------------------------

/// One truthful profile where the mapped target mixture disagrees with the
/// source lottery.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMismatch {
    pub instance: usize,
    pub profile: Vec<Action>,
    pub source_probs: Vec<f64>,
    pub target_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCheck {
    pub profiles_checked: u64,
    /// Largest per-component gap seen anywhere.
    pub max_gap: f64,
    pub mismatches: Vec<ReductionMismatch>,
}

impl ReductionCheck {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Replay every truthful source profile on every instance: the source
/// lottery must equal the map-weighted mixture of target lotteries within
/// [`REDUCTION_TOL`] per component.
pub fn check_reduction(
    source: &dyn Mechanism,
    reduced: &ReducedMechanism,
    instances: &[Instance],
) -> Result<ReductionCheck, ReductionError> {
    let mut profiles_checked = 0u64;
    let mut max_gap: f64 = 0.0;
    let mut mismatches = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let view = CandidateView::of(inst);
        for profile in truthful_action_profiles(inst, source.input_kind())? {
            let src = source.evaluate(&view, &profile)?;
            let per_agent: Vec<Vec<(f64, Action)>> = profile
                .iter()
                .map(|a| reduced.map.apply(&view, a))
                .collect::<Result<_, _>>()?;
            let mut mixed = vec![0.0; inst.m()];
            for combo in per_agent.iter().multi_cartesian_product() {
                let weight: f64 = combo.iter().map(|(w, _)| w).product();
                if weight == 0.0 {
                    continue;
                }
                let target_profile: Vec<Action> =
                    combo.iter().map(|(_, a)| a.clone()).collect();
                let lot = reduced.target.evaluate(&view, &target_profile)?;
                for (acc, j) in mixed.iter_mut().zip(0..inst.m()) {
                    *acc += weight * lot.prob(j);
                }
            }
            let gap = src
                .probs()
                .iter()
                .zip(&mixed)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            max_gap = max_gap.max(gap);
            profiles_checked += 1;
            if gap > REDUCTION_TOL {
                mismatches.push(ReductionMismatch {
                    instance: idx,
                    profile,
                    source_probs: src.probs().to_vec(),
                    target_probs: mixed,
                });
            }
        }
    }
    Ok(ReductionCheck { profiles_checked, max_gap, mismatches })
}

// ---------------------------------------------------------------------------
// A tunable two-candidate location family
// ---------------------------------------------------------------------------

/// Two-candidate location rule: candidate 1 gets probability
/// `(n1 + gamma * n2) / n` where `n1` counts reports strictly nearer
/// candidate 1 and `n2` the reports tied between both. The parameter is
/// exactly the border weight its voting projection recovers.
pub struct BorderFraction {
    gamma: f64,
}

impl BorderFraction {
    pub fn new(gamma: f64) -> Result<Self, ReductionError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(ReductionError::BadGamma(gamma));
        }
        Ok(BorderFraction { gamma })
    }
}

impl Mechanism for BorderFraction {
    fn name(&self) -> String {
        format!("border-fraction:{}", self.gamma)
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Location
    }

    fn randomized(&self) -> bool {
        true
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        if view.m() != 2 {
            return Err(MechanismError::UnsupportedCandidates {
                name: self.name(),
                reason: format!("needs exactly 2 candidates, got {}", view.m()),
            });
        }
        let locations = locations_of(profile)?;
        let n = locations.len() as f64;
        let (mut n1, mut n2) = (0.0, 0.0);
        for x in &locations {
            let favs = favorite_candidates(view.metric, view.candidates, x)?;
            if favs.len() >= 2 {
                n2 += 1.0;
            } else if favs[0] == 0 {
                n1 += 1.0;
            }
        }
        let p = (n1 + self.gamma * n2) / n;
        Lottery::new(vec![p, 1.0 - p])
    }
}
