//! Incentive audits: exhaustive unilateral-deviation checks, universal
//! truthfulness of positional voting via its percentile decomposition,
//! coalition (group) deviations, and boundary-indifference probes.
//!
//! All audits compare an agent's *expected* distance under the truthful
//! report against every deviation in a finite deviation space, flagging any
//! strict improvement beyond the margin. Deviation spaces are exhaustive
//! for voting and ranking inputs and a grid for location inputs.

use itertools::Itertools;
use thiserror::Error;

use crate::evaluation::{
    agent_expected_cost, truthful_action_profiles, EvaluationError,
};
use crate::geometry::{
    favorite_candidates, true_rankings, GeometryError, Instance, MetricSpace, Point,
};
use crate::mechanisms::{
    sorted_votes, votes_of, Action, ActionProfile, CandidateView, InputKind, Mechanism,
    MechanismError, Wpv,
};

#[derive(Debug, Error, PartialEq)]
pub enum TruthfulnessError {
    #[error("audit would perform {checks} checks, limit is {limit}")]
    AuditOverflow { checks: u128, limit: u64 },
    #[error("ranking deviation space is {m}! permutations; audits support at most 6 candidates")]
    TooManyCandidatesForRankings { m: usize },
    #[error("group audits enumerate all coalitions; supported for at most 6 agents, got {n}")]
    GroupAuditTooLarge { n: usize },
    #[error("group audits are defined for voting mechanisms")]
    GroupAuditNeedsVoting,
    #[error("location deviations need a line or explicit metric")]
    LocationAuditUnsupported,
    #[error("agent {agent} is not on a border: no tied actions to probe")]
    NotOnBorder { agent: usize },
    #[error("weight vector has {weights} positions but the instance has {agents} agents")]
    WeightCountMismatch { weights: usize, agents: usize },
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Knobs shared by the audits.
#[derive(Debug, Clone)]
pub struct AuditOptions {
    /// Spacing of the location deviation grid.
    pub grid_step: f64,
    /// A deviation counts as a violation only if it improves the agent's
    /// expected cost by more than this.
    pub margin: f64,
    /// Upper bound on (profiles x agents x deviations) before the audit
    /// refuses to run.
    pub max_checks: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { grid_step: 0.05, margin: 1e-9, max_checks: 1_000_000 }
    }
}

/// One profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub agent: usize,
    pub truthful: ActionProfile,
    pub deviation: Action,
    pub cost_truthful: f64,
    pub cost_deviating: f64,
}

/// Outcome of a unilateral audit: every (truthful profile, agent,
/// deviation) triple checked, and the violations found.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub mechanism: String,
    pub checks: u64,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ranking_permutations(m: usize) -> Result<Vec<Vec<usize>>, TruthfulnessError> {
    if m > 6 {
        return Err(TruthfulnessError::TooManyCandidatesForRankings { m });
    }
    Ok((0..m).permutations(m).collect())
}

/// The full deviation space for one agent; identical across agents.
fn deviation_actions(
    kind: InputKind,
    inst: &Instance,
    opts: &AuditOptions,
) -> Result<Vec<Action>, TruthfulnessError> {
    match kind {
        InputKind::Voting => Ok((0..inst.m()).map(Action::Vote).collect()),
        InputKind::Ranking => {
            Ok(ranking_permutations(inst.m())?.into_iter().map(Action::Ranking).collect())
        }
        InputKind::Location => match &inst.metric {
            MetricSpace::Line => {
                let ys = inst.candidates.line_coords();
                let lo = ys.first().copied().unwrap() - 2.0;
                let hi = ys.last().copied().unwrap() + 2.0;
                let mut points = Vec::new();
                let mut k = 0usize;
                loop {
                    let x = lo + k as f64 * opts.grid_step;
                    if x > hi + 1e-12 {
                        break;
                    }
                    points.push(Action::Location(Point::line(x)));
                    k += 1;
                }
                Ok(points)
            }
            MetricSpace::Explicit(em) => {
                Ok((0..em.len()).map(|i| Action::Location(Point::Index(i))).collect())
            }
            MetricSpace::Euclidean(_) => Err(TruthfulnessError::LocationAuditUnsupported),
        },
    }
}

/// Check every unilateral deviation from every truthful profile. A
/// violation is a deviation that lowers the deviating agent's expected
/// distance by more than the margin.
pub fn audit_unilateral(
    mech: &dyn Mechanism,
    inst: &Instance,
    opts: &AuditOptions,
) -> Result<AuditReport, TruthfulnessError> {
    let view = CandidateView::of(inst);
    let truthful = truthful_action_profiles(inst, mech.input_kind())?;
    let deviations = deviation_actions(mech.input_kind(), inst, opts)?;
    let total = truthful.len() as u128 * inst.n() as u128 * deviations.len() as u128;
    if total > opts.max_checks as u128 {
        return Err(TruthfulnessError::AuditOverflow { checks: total, limit: opts.max_checks });
    }

    let mut checks = 0u64;
    let mut violations = Vec::new();
    for profile in &truthful {
        let lottery = mech.evaluate(&view, profile)?;
        for agent in 0..inst.n() {
            let cost_truthful = agent_expected_cost(inst, &lottery, agent)?;
            for deviation in &deviations {
                if *deviation == profile[agent] {
                    continue;
                }
                let mut deviated = profile.clone();
                deviated[agent] = deviation.clone();
                // A report the mechanism rejects outright is not an
                // available deviation (e.g. rankings outside every zone).
                let lot = match mech.evaluate(&view, &deviated) {
                    Ok(lot) => lot,
                    Err(MechanismError::UnrecognizedRanking(_)) => continue,
                    Err(e) => return Err(e.into()),
                };
                let cost_deviating = agent_expected_cost(inst, &lot, agent)?;
                checks += 1;
                if cost_deviating < cost_truthful - opts.margin {
                    violations.push(AuditViolation {
                        agent,
                        truthful: profile.clone(),
                        deviation: deviation.clone(),
                        cost_truthful,
                        cost_deviating,
                    });
                }
            }
        }
    }
    Ok(AuditReport { mechanism: mech.name(), checks, violations })
}

/// Audit every percentile rule (`percentile:1` through `percentile:n`) on
/// one instance in a single pass: each deviation is sorted once and the
/// outcome at every position is compared at once.
pub fn audit_all_percentiles(
    inst: &Instance,
    opts: &AuditOptions,
) -> Result<Vec<AuditReport>, TruthfulnessError> {
    let n = inst.n();
    let m = inst.m();
    let truthful = truthful_action_profiles(inst, InputKind::Voting)?;
    let total = truthful.len() as u128 * n as u128 * m as u128;
    if total > opts.max_checks as u128 {
        return Err(TruthfulnessError::AuditOverflow { checks: total, limit: opts.max_checks });
    }

    // Agent-to-candidate distances, reused across all positions.
    let mut dist = vec![vec![0.0; m]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        for (j, d) in row.iter_mut().enumerate() {
            *d = crate::geometry::distance(
                &inst.metric,
                &inst.agents[i],
                inst.candidates.point(j),
            )?;
        }
    }

    let mut reports: Vec<AuditReport> = (1..=n)
        .map(|k| AuditReport {
            mechanism: format!("percentile:{k}"),
            checks: 0,
            violations: Vec::new(),
        })
        .collect();

    for profile in &truthful {
        let votes = votes_of(profile, m)?;
        let sorted_true = sorted_votes(&votes);
        for agent in 0..n {
            for dev in 0..m {
                if dev == votes[agent] {
                    continue;
                }
                let mut deviated_votes = votes.clone();
                deviated_votes[agent] = dev;
                let sorted_dev = sorted_votes(&deviated_votes);
                for k in 0..n {
                    let report = &mut reports[k];
                    report.checks += 1;
                    let before = dist[agent][sorted_true[k]];
                    let after = dist[agent][sorted_dev[k]];
                    if after < before - opts.margin {
                        report.violations.push(AuditViolation {
                            agent,
                            truthful: profile.clone(),
                            deviation: Action::Vote(dev),
                            cost_truthful: before,
                            cost_deviating: after,
                        });
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// Universal-truthfulness audit for weighted percentile voting: the rule is
/// a fixed mixture of the percentile rules, so it is a mixture of truthful
/// deterministic rules exactly when every positive-weight percentile passes
/// its own audit. The per-position verdicts do not depend on the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalWpvReport {
    pub weights: Vec<f64>,
    /// Unilateral audit of `percentile:k` at each position `k = 1..=n`.
    pub positions: Vec<AuditReport>,
}

impl UniversalWpvReport {
    /// Passes iff every percentile carrying positive weight is truthful.
    pub fn passed(&self) -> bool {
        self.weights
            .iter()
            .zip(&self.positions)
            .all(|(&w, report)| w == 0.0 || report.passed())
    }
}

pub fn audit_universal_wpv(
    weights: &[f64],
    inst: &Instance,
    opts: &AuditOptions,
) -> Result<UniversalWpvReport, TruthfulnessError> {
    Wpv::new(weights.to_vec())?;
    if weights.len() != inst.n() {
        return Err(TruthfulnessError::WeightCountMismatch {
            weights: weights.len(),
            agents: inst.n(),
        });
    }
    let positions = audit_all_percentiles(inst, opts)?;
    Ok(UniversalWpvReport { weights: weights.to_vec(), positions })
}

/// A coalition deviation in which every member strictly gains.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupViolation {
    pub coalition: Vec<usize>,
    pub truthful: ActionProfile,
    pub deviated: ActionProfile,
    /// Expected costs of the coalition members before the deviation.
    pub costs_truthful: Vec<f64>,
    /// ... and after it, in the same member order.
    pub costs_deviating: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GspReport {
    pub mechanism: String,
    pub checks: u64,
    pub violations: Vec<GroupViolation>,
}

impl GspReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Group-strategyproofness audit for voting mechanisms: every nonempty
/// coalition, every joint vote deviation, flagged when all members gain
/// more than the margin. Exhaustive, hence capped at 6 agents.
pub fn audit_gsp(
    mech: &dyn Mechanism,
    inst: &Instance,
    opts: &AuditOptions,
) -> Result<GspReport, TruthfulnessError> {
    if mech.input_kind() != InputKind::Voting {
        return Err(TruthfulnessError::GroupAuditNeedsVoting);
    }
    let n = inst.n();
    if n > 6 {
        return Err(TruthfulnessError::GroupAuditTooLarge { n });
    }
    let m = inst.m();
    let view = CandidateView::of(inst);
    let truthful = truthful_action_profiles(inst, InputKind::Voting)?;

    let per_coalition: u128 =
        (1..1u32 << n).map(|mask| (m as u128).pow(mask.count_ones())).sum();
    let total = truthful.len() as u128 * per_coalition;
    if total > opts.max_checks as u128 {
        return Err(TruthfulnessError::AuditOverflow { checks: total, limit: opts.max_checks });
    }

    let mut checks = 0u64;
    let mut violations = Vec::new();
    for profile in &truthful {
        let lottery = mech.evaluate(&view, profile)?;
        let mut base_costs = Vec::with_capacity(n);
        for agent in 0..n {
            base_costs.push(agent_expected_cost(inst, &lottery, agent)?);
        }
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            for joint in members.iter().map(|_| 0..m).multi_cartesian_product() {
                let mut deviated = profile.clone();
                for (&agent, &vote) in members.iter().zip(&joint) {
                    deviated[agent] = Action::Vote(vote);
                }
                if deviated == *profile {
                    continue;
                }
                checks += 1;
                let lot = mech.evaluate(&view, &deviated)?;
                let mut all_gain = true;
                let mut costs_deviating = Vec::with_capacity(members.len());
                for &agent in &members {
                    let c = agent_expected_cost(inst, &lot, agent)?;
                    if c >= base_costs[agent] - opts.margin {
                        all_gain = false;
                        break;
                    }
                    costs_deviating.push(c);
                }
                if all_gain {
                    violations.push(GroupViolation {
                        coalition: members.clone(),
                        truthful: profile.clone(),
                        deviated,
                        costs_truthful: members.iter().map(|&a| base_costs[a]).collect(),
                        costs_deviating,
                    });
                }
            }
        }
    }
    Ok(GspReport { mechanism: mech.name(), checks, violations })
}

/// The two tied (or adjacent) reports probed at a boundary, with the
/// probing agent's expected cost under each.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderProbe {
    pub action_a: Action,
    pub action_b: Action,
    pub cost_a: f64,
    pub cost_b: f64,
}

impl BorderProbe {
    pub fn equal_within(&self, tol: f64) -> bool {
        (self.cost_a - self.cost_b).abs() <= tol
    }
}

/// Probe indifference at a boundary for one agent, holding everyone else
/// truthful. For voting and ranking inputs the agent must be exactly on a
/// border (two tied actions exist); for location inputs the probe compares
/// reporting the true position against nudging it by `1e-6`, which detects
/// discontinuities at branch points of location rules.
pub fn border_equal_probe(
    mech: &dyn Mechanism,
    inst: &Instance,
    agent: usize,
) -> Result<BorderProbe, TruthfulnessError> {
    let view = CandidateView::of(inst);
    let x = &inst.agents[agent];
    let (action_a, action_b) = match mech.input_kind() {
        InputKind::Voting => {
            let favs = favorite_candidates(&inst.metric, &inst.candidates, x)?;
            if favs.len() < 2 {
                return Err(TruthfulnessError::NotOnBorder { agent });
            }
            (Action::Vote(favs[0]), Action::Vote(favs[1]))
        }
        InputKind::Ranking => {
            let mut rankings = true_rankings(&inst.metric, &inst.candidates, x)?;
            if rankings.len() < 2 {
                return Err(TruthfulnessError::NotOnBorder { agent });
            }
            let b = rankings.swap_remove(1);
            let a = rankings.swap_remove(0);
            (Action::Ranking(a), Action::Ranking(b))
        }
        InputKind::Location => {
            if !inst.metric.is_line() {
                return Err(TruthfulnessError::LocationAuditUnsupported);
            }
            (
                Action::Location(x.clone()),
                Action::Location(Point::line(x.x() + 1e-6)),
            )
        }
    };

    // Everyone else reports their first truthful action.
    let mut profile = Vec::with_capacity(inst.n());
    for (i, pos) in inst.agents.iter().enumerate() {
        let action = match mech.input_kind() {
            InputKind::Voting => {
                Action::Vote(favorite_candidates(&inst.metric, &inst.candidates, pos)?[0])
            }
            InputKind::Ranking => Action::Ranking(
                true_rankings(&inst.metric, &inst.candidates, pos)?.swap_remove(0),
            ),
            InputKind::Location => Action::Location(pos.clone()),
        };
        profile.push(action);
        let _ = i;
    }

    let mut with = |action: &Action| -> Result<f64, TruthfulnessError> {
        profile[agent] = action.clone();
        let lottery = mech.evaluate(&view, &profile)?;
        Ok(agent_expected_cost(inst, &lottery, agent)?)
    };
    let cost_a = with(&action_a)?;
    let cost_b = with(&action_b)?;
    Ok(BorderProbe { action_a, action_b, cost_a, cost_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{
        Claim1, Claim4, Claim5, Lottery, Median, RandomDictator, Spike,
    };

    /// Deliberately manipulable: all mass on the mirror image of the first
    /// agent's vote.
    struct FirstVoteInverted;

    impl Mechanism for FirstVoteInverted {
        fn name(&self) -> String {
            "first-vote-inverted".into()
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
            let votes = votes_of(profile, view.m())?;
            Ok(Lottery::point_mass(view.m() - 1 - votes[0], view.m()))
        }
    }

    #[test]
    fn manipulable_rule_is_caught() {
        let inst = Instance::line(&[0.0, 1.0], &[0.0]).unwrap();
        let report =
            audit_unilateral(&FirstVoteInverted, &inst, &AuditOptions::default()).unwrap();
        assert!(!report.passed());
        let v = &report.violations[0];
        assert_eq!(v.agent, 0);
        assert_eq!(v.deviation, Action::Vote(1));
        assert_eq!((v.cost_truthful, v.cost_deviating), (1.0, 0.0));
    }

    #[test]
    fn spike_and_median_survive_unilateral_audits() {
        let opts = AuditOptions::default();
        for agents in [&[-1.0, 0.001][..], &[0.3, 0.5, 1.7][..], &[0.0, 1.0, 2.0][..]] {
            let inst = Instance::line(&[0.0, 1.0, 2.0], agents).unwrap();
            assert!(audit_unilateral(&Spike, &inst, &opts).unwrap().passed());
            assert!(audit_unilateral(&Median, &inst, &opts).unwrap().passed());
            assert!(audit_unilateral(&RandomDictator, &inst, &opts).unwrap().passed());
        }
    }

    #[test]
    fn claim_rules_are_truthful_in_expectation() {
        let opts = AuditOptions::default();

        let inst = Instance::line(&[0.0, 1.0, 2.0], &[0.2, 1.6]).unwrap();
        assert!(audit_unilateral(&Claim1, &inst, &opts).unwrap().passed());

        let inst = Instance::line(&[0.0, 3.0, 4.0], &[0.0, 2.0, 3.5]).unwrap();
        assert!(audit_unilateral(&Claim4, &inst, &opts).unwrap().passed());

        let inst = Instance::line(&[0.0, 1.0], &[0.2, 0.9]).unwrap();
        assert!(audit_unilateral(&Claim5, &inst, &opts).unwrap().passed());
    }

    #[test]
    fn percentile_audits_share_one_pass() {
        let inst = Instance::line(&[0.0, 1.0, 2.0], &[0.5, 1.0, 1.5]).unwrap();
        let reports = audit_all_percentiles(&inst, &AuditOptions::default()).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.passed(), "{} failed", r.mechanism);
            assert!(r.checks > 0);
        }

        let wpv = audit_universal_wpv(&[0.2, 0.5, 0.3], &inst, &AuditOptions::default()).unwrap();
        assert!(wpv.passed());
    }

    #[test]
    fn random_dictator_fails_group_audit() {
        // Two agents just right of the flank candidates' midpoints: jointly
        // voting the center drops both costs from 1.0 to 0.51.
        let inst = Instance::line(&[-1.0, 0.0, 1.0], &[-0.51, 0.51]).unwrap();
        let opts = AuditOptions::default();

        assert!(audit_unilateral(&RandomDictator, &inst, &opts).unwrap().passed());

        let gsp = audit_gsp(&RandomDictator, &inst, &opts).unwrap();
        assert!(!gsp.passed());
        let v = gsp
            .violations
            .iter()
            .find(|v| v.coalition == vec![0, 1])
            .expect("the full coalition gains");
        assert!((v.costs_truthful[0] - 1.0).abs() < 1e-12);
        assert!((v.costs_truthful[1] - 1.0).abs() < 1e-12);
        assert!((v.costs_deviating[0] - 0.51).abs() < 1e-12);
        assert!((v.costs_deviating[1] - 0.51).abs() < 1e-12);

        // Median is immune on the same instance.
        assert!(audit_gsp(&Median, &inst, &opts).unwrap().passed());
    }

    #[test]
    fn border_probe_sees_equal_costs_at_boundaries() {
        // Voting: an agent on the midpoint of two candidates is indifferent
        // under the spike rule.
        let inst = Instance::line(&[-1.0, 1.0], &[0.0]).unwrap();
        let probe = border_equal_probe(&Spike, &inst, 0).unwrap();
        assert!(probe.equal_within(1e-9), "{probe:?}");

        // Location: the branch point of the claim4 rule costs 2 on both sides.
        let inst = Instance::line(&[0.0, 3.0, 4.0], &[1.0]).unwrap();
        let probe = border_equal_probe(&Claim4, &inst, 0).unwrap();
        assert_eq!((probe.cost_a, probe.cost_b), (2.0, 2.0));

        // Off-border agents have nothing to probe for voting inputs.
        let inst = Instance::line(&[-1.0, 1.0], &[0.4]).unwrap();
        assert!(matches!(
            border_equal_probe(&Spike, &inst, 0),
            Err(TruthfulnessError::NotOnBorder { agent: 0 })
        ));
    }

    #[test]
    fn overflow_guard_trips_on_huge_grids() {
        let inst = Instance::line(&[0.0, 3.0, 4.0], &[0.5, 1.5]).unwrap();
        let opts = AuditOptions { grid_step: 1e-6, ..AuditOptions::default() };
        assert!(matches!(
            audit_unilateral(&Claim4, &inst, &opts),
            Err(TruthfulnessError::AuditOverflow { .. })
        ));
    }
}
