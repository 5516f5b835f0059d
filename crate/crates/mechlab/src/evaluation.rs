//! Social-cost evaluation: what a mechanism's lottery costs on an instance,
//! maximized over every action profile the agents could truthfully submit.
//!
//! Randomized mechanisms are scored by expected social cost; the worst case
//! ranges over all truthful profiles (agents tied between candidates may
//! break ties either way), and the benchmark is the best single candidate.

use itertools::Itertools;
use thiserror::Error;

use crate::geometry::{
    distance, distances_tied, favorite_candidates, true_rankings, GeometryError, Instance,
};
use crate::mechanisms::{
    Action, ActionProfile, CandidateView, InputKind, Lottery, Mechanism, MechanismError,
};

/// Hard cap on the number of truthful profiles enumerated per instance.
pub const ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("instance admits {profiles} truthful profiles, enumeration cap is {ENUMERATION_CAP}")]
    EnumerationOverflow { profiles: u128 },
    #[error("lottery has {got} entries for {m} candidates")]
    LotteryLengthMismatch { m: usize, got: usize },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Total distance from candidate `j` to all agents.
pub fn candidate_cost(inst: &Instance, j: usize) -> Result<f64, GeometryError> {
    let y = inst.candidates.point(j);
    inst.agents.iter().map(|x| distance(&inst.metric, y, x)).sum()
}

/// Expected social cost of a lottery: the probability-weighted candidate
/// costs.
pub fn lottery_cost(inst: &Instance, lottery: &Lottery) -> Result<f64, EvaluationError> {
    if lottery.len() != inst.m() {
        return Err(EvaluationError::LotteryLengthMismatch { m: inst.m(), got: lottery.len() });
    }
    let mut total = 0.0;
    for j in 0..inst.m() {
        let p = lottery.prob(j);
        if p != 0.0 {
            total += p * candidate_cost(inst, j)?;
        }
    }
    Ok(total)
}

/// Expected distance from agent `i` to the lottery outcome.
pub fn agent_expected_cost(
    inst: &Instance,
    lottery: &Lottery,
    i: usize,
) -> Result<f64, EvaluationError> {
    if lottery.len() != inst.m() {
        return Err(EvaluationError::LotteryLengthMismatch { m: inst.m(), got: lottery.len() });
    }
    let x = &inst.agents[i];
    let mut total = 0.0;
    for j in 0..inst.m() {
        let p = lottery.prob(j);
        if p != 0.0 {
            total += p * distance(&inst.metric, inst.candidates.point(j), x)?;
        }
    }
    Ok(total)
}

/// The cheapest candidate and its cost. Cost ties go to the lowest index,
/// which on the line is the leftmost tied candidate. Ties are judged with the
/// shared relative tolerance, so a tie that is exact in real arithmetic but
/// perturbed by an ulp of rounding still resolves to the lowest index; this
/// keeps the choice stable across cost-preserving instance rewrites.
pub fn optimal_candidate(inst: &Instance) -> Result<(usize, f64), GeometryError> {
    let mut best = (0usize, f64::INFINITY);
    for j in 0..inst.m() {
        let c = candidate_cost(inst, j)?;
        if c < best.1 && !(best.1.is_finite() && distances_tied(c, best.1)) {
            best = (j, c);
        }
    }
    Ok(best)
}

/// Every action profile consistent with the agents' true locations:
/// the cartesian product of per-agent favorite sets (voting), of per-agent
/// true-ranking sets (ranking), or the single profile of true locations.
/// Fails once the product exceeds [`ENUMERATION_CAP`].
pub fn truthful_action_profiles(
    inst: &Instance,
    kind: InputKind,
) -> Result<Vec<ActionProfile>, EvaluationError> {
    let per_agent: Vec<Vec<Action>> = match kind {
        InputKind::Location => {
            return Ok(vec![inst.agents.iter().cloned().map(Action::Location).collect()])
        }
        InputKind::Voting => inst
            .agents
            .iter()
            .map(|x| {
                favorite_candidates(&inst.metric, &inst.candidates, x)
                    .map(|f| f.into_iter().map(Action::Vote).collect())
            })
            .collect::<Result<_, _>>()?,
        InputKind::Ranking => inst
            .agents
            .iter()
            .map(|x| {
                true_rankings(&inst.metric, &inst.candidates, x)
                    .map(|r| r.into_iter().map(Action::Ranking).collect())
            })
            .collect::<Result<_, _>>()?,
    };
    let total: u128 = per_agent.iter().map(|opts| opts.len() as u128).product();
    if total > ENUMERATION_CAP {
        return Err(EvaluationError::EnumerationOverflow { profiles: total });
    }
    Ok(per_agent.into_iter().multi_cartesian_product().collect())
}

/// A worst truthful profile and what it costs.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub cost: f64,
    pub witness: ActionProfile,
    pub lottery: Lottery,
}

/// Maximize expected social cost over all truthful profiles of the
/// mechanism's input kind. Ties keep the first profile in enumeration
/// order, so the witness is deterministic.
pub fn worst_truthful_social_cost(
    mech: &dyn Mechanism,
    inst: &Instance,
) -> Result<WorstCase, EvaluationError> {
    let view = CandidateView::of(inst);
    let mut worst: Option<WorstCase> = None;
    for witness in truthful_action_profiles(inst, mech.input_kind())? {
        let lottery = mech.evaluate(&view, &witness)?;
        let cost = lottery_cost(inst, &lottery)?;
        if worst.as_ref().is_none_or(|w| cost > w.cost) {
            worst = Some(WorstCase { cost, witness, lottery });
        }
    }
    Ok(worst.expect("at least one truthful profile exists"))
}

/// Worst-case truthful social cost relative to the best candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub mechanism: String,
    pub worst_cost: f64,
    pub opt_cost: f64,
    /// 0-based index of the optimal candidate.
    pub opt_candidate: usize,
    /// `worst_cost / opt_cost`; 1 when both are zero, infinite when only
    /// the optimum is zero.
    pub ratio: f64,
    pub witness: ActionProfile,
}

/// Score a mechanism on one instance: worst truthful cost, the optimal
/// candidate benchmark, and their ratio.
pub fn approximation_ratio(
    mech: &dyn Mechanism,
    inst: &Instance,
) -> Result<RatioReport, EvaluationError> {
    let worst = worst_truthful_social_cost(mech, inst)?;
    let (opt_candidate, opt_cost) = optimal_candidate(inst)?;
    let ratio = if opt_cost > 0.0 {
        worst.cost / opt_cost
    } else if worst.cost > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(RatioReport {
        mechanism: mech.name(),
        worst_cost: worst.cost,
        opt_cost,
        opt_candidate,
        ratio,
        witness: worst.witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::{Claim5, Median, RandomDictator, Spike};

    const EPS: f64 = 1e-3;

    fn gap_instance() -> Instance {
        Instance::line(&[-1.0, 1.0], &[-1.0, EPS]).unwrap()
    }

    #[test]
    fn candidate_costs_on_the_gap_instance() {
        let inst = gap_instance();
        assert!((candidate_cost(&inst, 0).unwrap() - (1.0 + EPS)).abs() < 1e-15);
        assert!((candidate_cost(&inst, 1).unwrap() - (3.0 - EPS)).abs() < 1e-15);
        let (j, c) = optimal_candidate(&inst).unwrap();
        assert_eq!(j, 0);
        assert!((c - (1.0 + EPS)).abs() < 1e-15);
    }

    #[test]
    fn optimal_ties_go_left() {
        let inst = Instance::line(&[0.0, 2.0], &[1.0]).unwrap();
        assert_eq!(optimal_candidate(&inst).unwrap(), (0, 1.0));
    }

    #[test]
    fn truthful_profiles_branch_on_ties() {
        let inst = Instance::line(&[-1.0, 1.0], &[0.0, 0.5]).unwrap();
        let profiles = truthful_action_profiles(&inst, InputKind::Voting).unwrap();
        // Agent 1 is tied, agent 2 favors candidate 2.
        assert_eq!(
            profiles,
            vec![
                vec![Action::Vote(0), Action::Vote(1)],
                vec![Action::Vote(1), Action::Vote(1)],
            ]
        );
        let single = truthful_action_profiles(&inst, InputKind::Location).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let agents = vec![0.0; 21];
        let inst = Instance::line(&[-1.0, 1.0], &agents).unwrap();
        let err = truthful_action_profiles(&inst, InputKind::Voting).unwrap_err();
        assert_eq!(err, EvaluationError::EnumerationOverflow { profiles: 1 << 21 });
    }

    #[test]
    fn spike_ratio_on_the_gap_instance() {
        let inst = gap_instance();
        let report = approximation_ratio(&Spike, &inst).unwrap();
        // Votes split across the two candidates: the lottery is (1/2, 1/2),
        // costing 2 against an optimum of 1 + eps.
        assert!((report.worst_cost - 2.0).abs() < 1e-12);
        assert!((report.ratio - 2.0 / (1.0 + EPS)).abs() < 1e-12);
        assert_eq!(report.opt_candidate, 0);

        let rd = approximation_ratio(&RandomDictator, &inst).unwrap();
        assert!((rd.ratio - 2.0 / (1.0 + EPS)).abs() < 1e-12);

        let med = approximation_ratio(&Median, &inst).unwrap();
        assert!((med.ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_optimum_yields_infinite_or_unit_ratio() {
        // Single agent sitting on candidate 1: the optimum is free, claim5
        // still spills 0.1 mass on the far candidate.
        let inst = Instance::line(&[0.0, 1.0], &[0.0]).unwrap();
        let report = approximation_ratio(&Claim5, &inst).unwrap();
        assert!((report.worst_cost - 0.1).abs() < 1e-15);
        assert!(report.ratio.is_infinite());

        // A deterministic rule that picks that same candidate is exact.
        let report = approximation_ratio(&Median, &inst).unwrap();
        assert_eq!(report.ratio, 1.0);
        assert_eq!(report.worst_cost, 0.0);
    }

    #[test]
    fn worst_case_prefers_the_expensive_tie_break() {
        // One agent tied between both candidates, one agent at candidate 1.
        // Under random dictatorship the tied agent voting right costs
        // 0.5 * 1 + 0.5 * 3 = 2 instead of 1, and the worst case finds it.
        let inst = Instance::line(&[-1.0, 1.0], &[0.0, -1.0]).unwrap();
        let worst = worst_truthful_social_cost(&RandomDictator, &inst).unwrap();
        assert_eq!(worst.witness, vec![Action::Vote(1), Action::Vote(0)]);
        assert!((worst.cost - 2.0).abs() < 1e-15);
    }
}
