//! Profile compression on the line: cost-preserving reductions that push
//! any agent profile into a canonical three-block form.
//!
//! The pipeline is `tight_profile` (snap every agent to a voting border or
//! to the optimal candidate) followed by repeated `left_compress` /
//! `right_compress` steps (merge the outermost border group one border
//! inward) until only three positions remain: the border left of the
//! optimal candidate, the optimal candidate itself, and the border to its
//! right. Each step can only worsen positional voting rules relative to the
//! optimum, so the three-block ratio bounds the original instance's ratio.

use thiserror::Error;

use crate::evaluation::optimal_candidate;
use crate::geometry::{
    favorite_candidates, voting_borders, GeometryError, Instance,
};
use crate::mechanisms::{spike_cdf, Action, ActionProfile, MechanismError};

#[derive(Debug, Error, PartialEq)]
pub enum CompressionError {
    #[error("compression is defined on the line metric only")]
    NotLine,
    #[error("agent {agent} at {position} is neither on a voting border nor at the optimal candidate; compress steps need a tight profile")]
    NotTight { agent: usize, position: f64 },
    #[error("bad three-block profile: {reason}")]
    BadThreeBlock { reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Coordinate equality under the same relative tolerance used for distance
/// ties.
fn coords_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * f64::max(1.0, a.abs() + b.abs())
}

fn require_line(inst: &Instance) -> Result<(), CompressionError> {
    if inst.metric.is_line() {
        Ok(())
    } else {
        Err(CompressionError::NotLine)
    }
}

/// Snap every agent to the worst point of its own voting zone: agents in
/// the optimal candidate's zone move onto that candidate, agents elsewhere
/// move to their zone border nearest the optimal candidate, and agents
/// already sitting on a border stay put. Vote sets are unchanged, the
/// optimal candidate only gets cheaper, and positional rules get relatively
/// worse.
pub fn tight_profile(inst: &Instance) -> Result<Instance, CompressionError> {
    require_line(inst)?;
    let ys = inst.candidates.line_coords();
    let borders = voting_borders(&inst.candidates);
    let (opt, _) = optimal_candidate(inst)?;
    let y_opt = ys[opt];
    let moved: Vec<f64> = inst
        .agent_coords()
        .into_iter()
        .map(|x| {
            if borders.iter().any(|&b| coords_tied(x, b)) {
                x
            } else {
                // Strictly inside voting zone `zone`.
                let zone = borders.partition_point(|&b| b < x);
                if zone == opt {
                    y_opt
                } else if zone < opt {
                    borders[zone]
                } else {
                    borders[zone - 1]
                }
            }
        })
        .collect();
    Ok(Instance::line(&ys, &moved)?)
}

fn check_tight(
    xs: &[f64],
    borders: &[f64],
    y_opt: f64,
) -> Result<(), CompressionError> {
    for (agent, &x) in xs.iter().enumerate() {
        let placed = coords_tied(x, y_opt) || borders.iter().any(|&b| coords_tied(x, b));
        if !placed {
            return Err(CompressionError::NotTight { agent, position: x });
        }
    }
    Ok(())
}

/// Merge the leftmost border group one border to the right, provided the
/// target border is still left of the optimal candidate. Returns `None`
/// once every left-side agent sits on the border adjacent to the optimal
/// zone. Input must be tight.
pub fn left_compress(inst: &Instance) -> Result<Option<Instance>, CompressionError> {
    require_line(inst)?;
    let ys = inst.candidates.line_coords();
    let borders = voting_borders(&inst.candidates);
    let (opt, _) = optimal_candidate(inst)?;
    let y_opt = ys[opt];
    let xs = inst.agent_coords();
    check_tight(&xs, &borders, y_opt)?;

    let lo = xs
        .iter()
        .copied()
        .filter(|&x| x < y_opt && !coords_tied(x, y_opt))
        .fold(f64::INFINITY, f64::min);
    if lo == f64::INFINITY {
        return Ok(None);
    }
    let j = borders
        .iter()
        .position(|&b| coords_tied(lo, b))
        .expect("tight profiles keep off-optimum agents on borders");
    if j + 1 >= opt {
        // Already on the border adjacent to the optimal zone.
        return Ok(None);
    }
    let target = borders[j + 1];
    let moved: Vec<f64> =
        xs.into_iter().map(|x| if coords_tied(x, borders[j]) { target } else { x }).collect();
    Ok(Some(Instance::line(&ys, &moved)?))
}

/// Mirror image of [`left_compress`]: merge the rightmost border group one
/// border to the left.
pub fn right_compress(inst: &Instance) -> Result<Option<Instance>, CompressionError> {
    require_line(inst)?;
    let ys = inst.candidates.line_coords();
    let borders = voting_borders(&inst.candidates);
    let (opt, _) = optimal_candidate(inst)?;
    let y_opt = ys[opt];
    let xs = inst.agent_coords();
    check_tight(&xs, &borders, y_opt)?;

    let hi = xs
        .iter()
        .copied()
        .filter(|&x| x > y_opt && !coords_tied(x, y_opt))
        .fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return Ok(None);
    }
    let j = borders
        .iter()
        .position(|&b| coords_tied(hi, b))
        .expect("tight profiles keep off-optimum agents on borders");
    if j <= opt {
        return Ok(None);
    }
    let target = borders[j - 1];
    let moved: Vec<f64> =
        xs.into_iter().map(|x| if coords_tied(x, borders[j]) { target } else { x }).collect();
    Ok(Some(Instance::line(&ys, &moved)?))
}

/// The canonical compressed profile: `left` agents on the border one step
/// left of the optimal candidate, `center` agents on the candidate, `right`
/// agents on the border one step right. Distances are normalized so the
/// right border sits at distance 1 from the candidate and the left border
/// at distance `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBlock {
    pub left: usize,
    pub center: usize,
    pub right: usize,
    pub beta: f64,
}

/// Run the whole pipeline: tighten, then compress both flanks to fixpoint,
/// and read off the three-block form. Also returns the compressed instance
/// itself (same candidates as the input).
pub fn compress_fully(inst: &Instance) -> Result<(Instance, ThreeBlock), CompressionError> {
    let mut cur = tight_profile(inst)?;
    loop {
        if let Some(next) = left_compress(&cur)? {
            cur = next;
            continue;
        }
        if let Some(next) = right_compress(&cur)? {
            cur = next;
            continue;
        }
        break;
    }

    let ys = cur.candidates.line_coords();
    let borders = voting_borders(&cur.candidates);
    let (opt, _) = optimal_candidate(&cur)?;
    let y_opt = ys[opt];
    let b_left = if opt > 0 { Some(borders[opt - 1]) } else { None };
    let b_right = if opt < ys.len() - 1 { Some(borders[opt]) } else { None };

    let (mut left, mut center, mut right) = (0usize, 0usize, 0usize);
    for (agent, &x) in cur.agent_coords().iter().enumerate() {
        if coords_tied(x, y_opt) {
            center += 1;
        } else if b_left.is_some_and(|b| coords_tied(x, b)) {
            left += 1;
        } else if b_right.is_some_and(|b| coords_tied(x, b)) {
            right += 1;
        } else {
            return Err(CompressionError::NotTight { agent, position: x });
        }
    }
    let beta = match (left > 0, b_left, b_right) {
        // Without left mass the value never enters any cost term.
        (false, _, _) => 1.0,
        (true, Some(bl), Some(br)) => (y_opt - bl) / (br - y_opt),
        // No right border to normalize against; the ratio is scale-free
        // whenever the right block is empty, so any positive value works.
        (true, _, None) => 1.0,
        (true, None, Some(_)) => unreachable!("left mass requires a left border"),
    };
    Ok((cur, ThreeBlock { left, center, right, beta }))
}

fn validate_three_block(tb: &ThreeBlock) -> Result<(), CompressionError> {
    if tb.left + tb.center + tb.right == 0 {
        return Err(CompressionError::BadThreeBlock { reason: "no agents".into() });
    }
    if !(tb.beta.is_finite() && tb.beta > 0.0) {
        return Err(CompressionError::BadThreeBlock {
            reason: format!("beta must be positive and finite, got {}", tb.beta),
        });
    }
    Ok(())
}

/// Worst-case spike ratio of a three-block profile, in closed form.
///
/// With `n = L + C + R` votes split outward (left block votes the left
/// candidate, right block the right one), the spike rule plays
/// `p_L = F(L)`, `p_C = F(L+C) - F(L)`, `p_R = 1 - F(L+C)`, and the block
/// costs are
///
/// ```text
/// SC(left)   = beta (L + 2C + 2R) + R
/// SC(center) = beta L + R          (the optimum)
/// SC(right)  = beta L + 2L + 2C + R
/// ```
///
/// Whenever `L < C + R` and `R < L + C` the ratio collapses to exactly 2;
/// it degrades to 1 for a pure center block.
pub fn spike_three_block_ratio(tb: &ThreeBlock) -> Result<f64, CompressionError> {
    validate_three_block(tb)?;
    let (l, c, r) = (tb.left as f64, tb.center as f64, tb.right as f64);
    let n = l + c + r;
    let beta = tb.beta;
    let p_l = spike_cdf(l, n);
    let p_lc = spike_cdf(l + c, n);
    let sc_left = beta * (l + 2.0 * c + 2.0 * r) + r;
    let sc_center = beta * l + r;
    let sc_right = beta * l + 2.0 * l + 2.0 * c + r;
    let worst = p_l * sc_left + (p_lc - p_l) * sc_center + (1.0 - p_lc) * sc_right;
    if sc_center > 0.0 {
        Ok(worst / sc_center)
    } else if worst.abs() <= 1e-12 {
        Ok(1.0)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Embed a three-block profile as a concrete line instance: candidates at
/// `(-2 beta, 0, 2)` put the borders at `-beta` and `1`, where the blocks
/// sit. The middle candidate is optimal.
pub fn three_block_instance(tb: &ThreeBlock) -> Result<Instance, CompressionError> {
    validate_three_block(tb)?;
    let mut agents = Vec::with_capacity(tb.left + tb.center + tb.right);
    agents.extend(std::iter::repeat(-tb.beta).take(tb.left));
    agents.extend(std::iter::repeat(0.0).take(tb.center));
    agents.extend(std::iter::repeat(1.0).take(tb.right));
    Ok(Instance::line(&[-2.0 * tb.beta, 0.0, 2.0], &agents)?)
}

/// The outward truthful vote profile: border agents vote for the zone
/// neighbor farther from the optimal candidate, agents at the optimal
/// candidate vote for it, everyone else votes their unique favorite. For
/// positional rules this tie-break maximizes cost among truthful profiles,
/// so compressed instances can be scored without enumerating `2^borders`
/// branches.
pub fn outward_votes(inst: &Instance) -> Result<ActionProfile, CompressionError> {
    require_line(inst)?;
    let ys = inst.candidates.line_coords();
    let borders = voting_borders(&inst.candidates);
    let (opt, _) = optimal_candidate(inst)?;
    let y_opt = ys[opt];
    let mut votes = Vec::with_capacity(inst.n());
    for &x in &inst.agent_coords() {
        let vote = if let Some(j) = borders.iter().position(|&b| coords_tied(x, b)) {
            // Border j separates candidates j and j+1; borders never
            // coincide with candidates, so the side of y_opt is strict.
            if borders[j] < y_opt {
                j
            } else {
                j + 1
            }
        } else if coords_tied(x, y_opt) {
            opt
        } else {
            favorite_candidates(&inst.metric, &inst.candidates, &crate::geometry::Point::line(x))?
                [0]
        };
        votes.push(Action::Vote(vote));
    }
    Ok(votes)
}
