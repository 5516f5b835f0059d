//! Mechanisms: pure maps from reported actions to lotteries over the fixed
//! candidate set.
//!
//! A mechanism sees only the public side of an instance — the metric and the
//! candidate locations — plus the reported action profile. It never reads
//! agent locations, which is what makes the incentive audits in
//! [`crate::truthfulness`] meaningful.

use std::fmt;

use crate::geometry::{
    ranking_zones_line, CandidateSet, GeometryError, Instance, MetricSpace, Point,
};
use thiserror::Error;

/// Slack allowed when validating that lottery entries sum to one.
pub const LOTTERY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MechanismError {
    #[error("action profile is empty")]
    EmptyProfile,
    #[error("mechanism expects exactly {expected} agents, profile has {got}")]
    WrongProfileLength { expected: usize, got: usize },
    #[error("action {index} has kind {got}, mechanism expects {expected}")]
    WrongActionKind { index: usize, expected: InputKind, got: InputKind },
    #[error("vote for candidate {vote} is out of range for {m} candidates")]
    VoteOutOfRange { vote: usize, m: usize },
    #[error("ranking {0:?} is not a permutation of the candidate indices")]
    NotAPermutation(Vec<usize>),
    #[error("ranking {0:?} does not match any ranking zone of the line")]
    UnrecognizedRanking(Vec<usize>),
    #[error("mechanism {name:?} requires the line metric")]
    LineOnly { name: String },
    #[error("mechanism {name:?} does not support this candidate set: {reason}")]
    UnsupportedCandidates { name: String, reason: String },
    #[error("positional weights must be nonnegative, nonempty, and sum to 1")]
    BadWeights,
    #[error("weight vector has {expected} positions but the profile has {got} votes")]
    WeightLengthMismatch { expected: usize, got: usize },
    #[error("percentile rank {k} exceeds the number of agents {n}")]
    PercentileOutOfRange { k: usize, n: usize },
    #[error("lottery entries must be nonnegative and sum to 1 (within {LOTTERY_TOL})")]
    NotALottery,
    #[error("unknown mechanism {0:?}")]
    UnknownMechanism(String),
    #[error("bad mechanism spec {spec:?}: {reason}")]
    BadMechanismSpec { spec: String, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// What a mechanism asks each agent to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// A single candidate index.
    Voting,
    /// A full preference order over the candidates.
    Ranking,
    /// A point of the metric space.
    Location,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Voting => "voting",
            InputKind::Ranking => "ranking",
            InputKind::Location => "location",
        })
    }
}

/// One agent's report.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Vote(usize),
    Ranking(Vec<usize>),
    Location(Point),
}

impl Action {
    pub fn kind(&self) -> InputKind {
        match self {
            Action::Vote(_) => InputKind::Voting,
            Action::Ranking(_) => InputKind::Ranking,
            Action::Location(_) => InputKind::Location,
        }
    }
}

/// The reports of all agents, in agent order.
pub type ActionProfile = Vec<Action>;

/// Build a voting profile from candidate indices.
pub fn vote_profile(votes: &[usize]) -> ActionProfile {
    votes.iter().map(|&v| Action::Vote(v)).collect()
}

/// Build a ranking profile from candidate-index orders.
pub fn ranking_profile(rankings: &[&[usize]]) -> ActionProfile {
    rankings.iter().map(|r| Action::Ranking(r.to_vec())).collect()
}

/// Build a location profile from line coordinates.
pub fn line_profile(xs: &[f64]) -> ActionProfile {
    xs.iter().map(|&x| Action::Location(Point::line(x))).collect()
}

/// A probability distribution over the candidate indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    probs: Vec<f64>,
}

impl Lottery {
    /// Validates nonnegativity and total mass 1 within [`LOTTERY_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self, MechanismError> {
        let sum: f64 = probs.iter().sum();
        let ok = !probs.is_empty()
            && probs.iter().all(|&p| p.is_finite() && p >= -LOTTERY_TOL)
            && (sum - 1.0).abs() <= LOTTERY_TOL;
        if !ok {
            return Err(MechanismError::NotALottery);
        }
        Ok(Lottery { probs })
    }

    /// All mass on candidate `j` out of `m`.
    pub fn point_mass(j: usize, m: usize) -> Self {
        let mut probs = vec![0.0; m];
        probs[j] = 1.0;
        Lottery { probs }
    }

    /// Uniform over `m` candidates.
    pub fn uniform(m: usize) -> Self {
        Lottery { probs: vec![1.0 / m as f64; m] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.probs[j]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of a maximum-probability candidate; ties broken toward the
    /// largest index.
    pub fn argmax_last(&self) -> usize {
        let mut best = 0;
        for j in 1..self.probs.len() {
            if self.probs[j] >= self.probs[best] {
                best = j;
            }
        }
        best
    }
}

/// The public data a mechanism may read: the metric and candidate locations,
/// but never the agents' true positions.
#[derive(Debug, Clone, Copy)]
pub struct CandidateView<'a> {
    pub metric: &'a MetricSpace,
    pub candidates: &'a CandidateSet,
}

impl<'a> CandidateView<'a> {
    pub fn new(metric: &'a MetricSpace, candidates: &'a CandidateSet) -> Self {
        CandidateView { metric, candidates }
    }

    pub fn of(inst: &'a Instance) -> Self {
        CandidateView { metric: &inst.metric, candidates: &inst.candidates }
    }

    pub fn m(&self) -> usize {
        self.candidates.len()
    }
}

/// A (possibly randomized) social choice rule over the candidate set.
///
/// `evaluate` must be a pure function of the view and the reported profile:
/// same inputs, same lottery.
pub trait Mechanism {
    /// Registry-style name, e.g. `"spike"` or `"percentile:3"`.
    fn name(&self) -> String;
    fn input_kind(&self) -> InputKind;
    /// Whether the output lottery can be non-degenerate.
    fn randomized(&self) -> bool;
    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError>;
}

// ---------------------------------------------------------------------------
// Profile validation helpers (shared with audits and reductions)
// ---------------------------------------------------------------------------

/// Extract votes, checking kind and range.
pub fn votes_of(profile: &[Action], m: usize) -> Result<Vec<usize>, MechanismError> {
    if profile.is_empty() {
        return Err(MechanismError::EmptyProfile);
    }
    profile
        .iter()
        .enumerate()
        .map(|(index, a)| match a {
            Action::Vote(v) if *v < m => Ok(*v),
            Action::Vote(v) => Err(MechanismError::VoteOutOfRange { vote: *v, m }),
            other => Err(MechanismError::WrongActionKind {
                index,
                expected: InputKind::Voting,
                got: other.kind(),
            }),
        })
        .collect()
}

/// Extract rankings, checking each is a permutation of `0..m`.
pub fn rankings_of(profile: &[Action], m: usize) -> Result<Vec<Vec<usize>>, MechanismError> {
    if profile.is_empty() {
        return Err(MechanismError::EmptyProfile);
    }
    profile
        .iter()
        .enumerate()
        .map(|(index, a)| match a {
            Action::Ranking(r) => {
                let mut seen = vec![false; m];
                let valid = r.len() == m
                    && r.iter().all(|&c| c < m && !std::mem::replace(&mut seen[c], true));
                if valid {
                    Ok(r.clone())
                } else {
                    Err(MechanismError::NotAPermutation(r.clone()))
                }
            }
            other => Err(MechanismError::WrongActionKind {
                index,
                expected: InputKind::Ranking,
                got: other.kind(),
            }),
        })
        .collect()
}

/// Extract reported locations, checking kind only (the metric validates
/// coordinates when distances are taken).
pub fn locations_of(profile: &[Action]) -> Result<Vec<Point>, MechanismError> {
    if profile.is_empty() {
        return Err(MechanismError::EmptyProfile);
    }
    profile
        .iter()
        .enumerate()
        .map(|(index, a)| match a {
            Action::Location(p) => Ok(p.clone()),
            other => Err(MechanismError::WrongActionKind {
                index,
                expected: InputKind::Location,
                got: other.kind(),
            }),
        })
        .collect()
}

fn require_line(metric: &MetricSpace, name: &str) -> Result<(), MechanismError> {
    if metric.is_line() {
        Ok(())
    } else {
        Err(MechanismError::LineOnly { name: name.to_string() })
    }
}

// ---------------------------------------------------------------------------
// The spike rule
// ---------------------------------------------------------------------------

/// Cumulative probability assigned to the leftmost candidates once `t` of
/// `n` votes lie at or to their left:
///
/// ```text
/// F(t) = t / (2 (n - t))   for t <= n/2,
///        3/2 - n / (2 t)   otherwise.
/// ```
///
/// The two arms agree at `t = n/2` (both give 1/2); the first arm is used
/// there. `F` is nondecreasing from `F(0) = 0` to `F(n) = 1` and symmetric:
/// `F(t) + F(n - t) = 1`.
pub fn spike_cdf(t: f64, n: f64) -> f64 {
    if t <= n / 2.0 {
        t / (2.0 * (n - t))
    } else {
        1.5 - n / (2.0 * t)
    }
}

/// Randomized voting rule on the line: candidate `i` receives
/// `F(t_i) - F(t_{i-1})` where `t_i` counts the votes for candidates
/// `1..=i` (left to right) and `F` is [`spike_cdf`]. Depends only on vote
/// counts and the candidates' order, so it is invariant under order- and
/// count-preserving changes of the geometry.
pub struct Spike;

impl Mechanism for Spike {
    fn name(&self) -> String {
        "spike".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        true
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        require_line(view.metric, "spike")?;
        let m = view.m();
        let votes = votes_of(profile, m)?;
        let n = votes.len() as f64;
        let mut counts = vec![0usize; m];
        for v in votes {
            counts[v] += 1;
        }
        let mut probs = Vec::with_capacity(m);
        let mut t = 0.0;
        let mut prev = 0.0;
        for c in counts {
            t += c as f64;
            let cur = spike_cdf(t, n);
            probs.push(cur - prev);
            prev = cur;
        }
        Lottery::new(probs)
    }
}

/// The fixed positional weights under which [`Wpv`] reproduces the spike
/// rule on every profile of `n` votes: position `i` (1-based, left to
/// right) gets `F(i) - F(i-1)`. Partial sums of positional weights
/// telescope to `F`, which is exactly the spike's cumulative rule.
pub fn spike_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..=n)
        .map(|i| spike_cdf(i as f64, nf) - spike_cdf(i as f64 - 1.0, nf))
        .collect()
}

/// [`Wpv`] loaded with [`spike_weights`] for `n` agents.
pub fn spike_as_wpv(n: usize) -> Wpv {
    Wpv::new(spike_weights(n)).expect("spike weights form a distribution")
}

// ---------------------------------------------------------------------------
// Positional voting rules
// ---------------------------------------------------------------------------

/// Weighted percentile voting on the line: sort the reported votes by
/// candidate position (stable in agent order) and give the vote in sorted
/// position `i` probability `weights[i]`. The weight vector fixes the number
/// of agents.
pub struct Wpv {
    weights: Vec<f64>,
}

impl Wpv {
    pub fn new(weights: Vec<f64>) -> Result<Self, MechanismError> {
        let sum: f64 = weights.iter().sum();
        let ok = !weights.is_empty()
            && weights.iter().all(|&w| w.is_finite() && w >= 0.0)
            && (sum - 1.0).abs() <= LOTTERY_TOL;
        if !ok {
            return Err(MechanismError::BadWeights);
        }
        Ok(Wpv { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Sort votes ascending by candidate index (= by candidate position on the
/// line), stable in agent order.
pub fn sorted_votes(votes: &[usize]) -> Vec<usize> {
    let mut sorted = votes.to_vec();
    sorted.sort();
    sorted
}

impl Mechanism for Wpv {
    fn name(&self) -> String {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        format!("wpv:{}", parts.join(","))
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        true
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        require_line(view.metric, "wpv")?;
        let votes = votes_of(profile, view.m())?;
        if votes.len() != self.weights.len() {
            return Err(MechanismError::WeightLengthMismatch {
                expected: self.weights.len(),
                got: votes.len(),
            });
        }
        let mut probs = vec![0.0; view.m()];
        for (pos, v) in sorted_votes(&votes).into_iter().enumerate() {
            probs[v] += self.weights[pos];
        }
        Lottery::new(probs)
    }
}

/// Deterministic rule: all mass on the vote in sorted position `k`
/// (1-based). Works for any number of agents `n >= k`.
pub struct Percentile {
    k: usize,
}

impl Percentile {
    pub fn new(k: usize) -> Result<Self, MechanismError> {
        if k == 0 {
            return Err(MechanismError::BadMechanismSpec {
                spec: "percentile:0".into(),
                reason: "percentile ranks are 1-based".into(),
            });
        }
        Ok(Percentile { k })
    }
}

impl Mechanism for Percentile {
    fn name(&self) -> String {
        format!("percentile:{}", self.k)
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        false
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        require_line(view.metric, "percentile")?;
        let votes = votes_of(profile, view.m())?;
        if self.k > votes.len() {
            return Err(MechanismError::PercentileOutOfRange { k: self.k, n: votes.len() });
        }
        let winner = sorted_votes(&votes)[self.k - 1];
        Ok(Lottery::point_mass(winner, view.m()))
    }
}

/// Deterministic median voting: all mass on the vote in sorted position
/// `ceil(n/2)` (the lower median).
pub struct Median;

impl Mechanism for Median {
    fn name(&self) -> String {
        "median".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        false
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        require_line(view.metric, "median")?;
        let votes = votes_of(profile, view.m())?;
        let k = votes.len().div_ceil(2);
        let winner = sorted_votes(&votes)[k - 1];
        Ok(Lottery::point_mass(winner, view.m()))
    }
}

/// Each agent's vote receives probability `1/n`; equivalently a uniformly
/// random agent dictates the outcome. Metric-agnostic.
pub struct RandomDictator;

impl Mechanism for RandomDictator {
    fn name(&self) -> String {
        "random-dictator".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
    }

    fn randomized(&self) -> bool {
        true
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        let votes = votes_of(profile, view.m())?;
        let share = 1.0 / votes.len() as f64;
        let mut probs = vec![0.0; view.m()];
        for v in votes {
            probs[v] += share;
        }
        Lottery::new(probs)
    }
}

/// Accepts full rankings and ignores them: uniform over the candidates.
/// The canonical example of a ranking mechanism with no useful guarantee.
pub struct UniformRanking;

impl Mechanism for UniformRanking {
    fn name(&self) -> String {
        "uniform-ranking".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Ranking
    }

    fn randomized(&self) -> bool {
        true
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        rankings_of(profile, view.m())?;
        Ok(Lottery::uniform(view.m()))
    }
}

// ---------------------------------------------------------------------------
// Counterexample rules
// ---------------------------------------------------------------------------

/// Deterministic ranking rule for two agents and three line candidates.
/// Each report must equal the shared ranking of one of the four ranking
/// zones (left to right). If both reports come from the two leftmost zones
/// the outcome is candidate 1, otherwise candidate 3.
///
/// Truthful — yet its outcome is not a function of the agents' favorite
/// candidates alone: zones 2 and 3 share the favorite, but moving one report
/// between them flips the outcome.
pub struct Claim1;

impl Mechanism for Claim1 {
    fn name(&self) -> String {
        "claim1".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Ranking
    }

    fn randomized(&self) -> bool {
        false
    }

    fn evaluate(
        &self,
        view: &CandidateView,
        profile: &[Action],
    ) -> Result<Lottery, MechanismError> {
        require_line(view.metric, "claim1")?;
        if view.m() != 3 {
            return Err(MechanismError::UnsupportedCandidates {
                name: "claim1".into(),
                reason: format!("needs exactly 3 candidates, got {}", view.m()),
            });
        }
        if profile.len() != 2 {
            return Err(MechanismError::WrongProfileLength { expected: 2, got: profile.len() });
        }
        let rankings = rankings_of(profile, 3)?;
        // Three distinct candidates always produce three distinct pair
        // midpoints, hence exactly four zones.
        let zones = ranking_zones_line(view.candidates)?;
        let mut zone_ids = [0usize; 2];
        for (i, r) in rankings.iter().enumerate() {
            zone_ids[i] = zones
                .zones
                .iter()
                .position(|z| &z.ranking == r)
                .ok_or_else(|| MechanismError::UnrecognizedRanking(r.clone()))?;
        }
        let winner = if zone_ids[0] <= 1 && zone_ids[1] <= 1 { 0 } else { 2 };
        Ok(Lottery::point_mass(winner, 3))
    }
}

/// Randomized location rule fixed to line candidates (0, 3, 4). Each agent
/// contributes, with weight `1/n`, the uniform lottery if their report is at
/// most 1 and (1/4, 1/2, 1/4) otherwise.
///
/// Truthful in expectation: an agent's expected distance is continuous and
/// minimized at their true location on either side of the trigger point 1,
/// where both branch costs coincide.
pub struct Claim4;

impl Claim4 {
    const CANDIDATES: [f64; 3] = [0.0, 3.0, 4.0];
    const LOW: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
    const HIGH: [f64; 3] = [0.25, 0.5, 0.25];
}

impl Mechanism for Claim4 {
    fn name(&self) -> String {
        "claim4".into()
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
        require_line(view.metric, "claim4")?;
        if view.candidates.line_coords() != Self::CANDIDATES {
            return Err(MechanismError::UnsupportedCandidates {
                name: "claim4".into(),
                reason: "defined only for candidates at 0, 3, 4".into(),
            });
        }
        let locations = locations_of(profile)?;
        let share = 1.0 / locations.len() as f64;
        let mut probs = [0.0; 3];
        for p in &locations {
            let branch = if p.x() <= 1.0 { &Self::LOW } else { &Self::HIGH };
            for (acc, b) in probs.iter_mut().zip(branch) {
                *acc += share * b;
            }
        }
        Lottery::new(probs.to_vec())
    }
}

/// Randomized voting rule for two candidates: each agent contributes, with
/// weight `1/n`, probability 0.9 on their own vote and 0.1 on the other.
///
/// Truthful in expectation, but no decomposition into deterministic rules
/// can make every realized draw truthful: any such decomposition spends 10%
/// of the mass on anti-dictators.
pub struct Claim5;

impl Mechanism for Claim5 {
    fn name(&self) -> String {
        "claim5".into()
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Voting
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
                name: "claim5".into(),
                reason: format!("needs exactly 2 candidates, got {}", view.m()),
            });
        }
        let votes = votes_of(profile, 2)?;
        let share = 1.0 / votes.len() as f64;
        let mut probs = [0.0; 2];
        for v in votes {
            probs[v] += 0.9 * share;
            probs[1 - v] += 0.1 * share;
        }
        Lottery::new(probs.to_vec())
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Build a mechanism from its registry name. Recognized:
/// `spike`, `median`, `random-dictator`, `uniform-ranking`, `claim1`,
/// `claim4`, `claim5`, `percentile:<k>` (1-based), and
/// `wpv:<w1>,<w2>,...` (one weight per agent, summing to 1).
pub fn mechanism_from_name(spec: &str) -> Result<Box<dyn Mechanism>, MechanismError> {
    match spec {
        "spike" => return Ok(Box::new(Spike)),
        "median" => return Ok(Box::new(Median)),
        "random-dictator" => return Ok(Box::new(RandomDictator)),
        "uniform-ranking" => return Ok(Box::new(UniformRanking)),
        "claim1" => return Ok(Box::new(Claim1)),
        "claim4" => return Ok(Box::new(Claim4)),
        "claim5" => return Ok(Box::new(Claim5)),
        _ => {}
    }
    if let Some(arg) = spec.strip_prefix("percentile:") {
        let k: usize = arg.parse().map_err(|_| MechanismError::BadMechanismSpec {
            spec: spec.to_string(),
            reason: format!("{arg:?} is not a positive integer"),
        })?;
        return Ok(Box::new(Percentile::new(k)?));
    }
    if let Some(arg) = spec.strip_prefix("wpv:") {
        let weights: Result<Vec<f64>, _> = arg.split(',').map(str::parse::<f64>).collect();
        let weights = weights.map_err(|_| MechanismError::BadMechanismSpec {
            spec: spec.to_string(),
            reason: "weights must be comma-separated numbers".into(),
        })?;
        return Ok(Box::new(Wpv::new(weights)?));
    }
    Err(MechanismError::UnknownMechanism(spec.to_string()))
}
