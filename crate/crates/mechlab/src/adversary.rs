//! Adversarial tooling: constructions that force any mechanism's hand and a
//! randomized search for high-ratio instances.
//!
//! The bound audits query a mechanism on a short, fixed action chain and
//! convert the observed probabilities into a lower bound on its worst-case
//! ratio, together with the witness instance realizing the bound. Every
//! report can be replayed: re-running the stored chain must reproduce the
//! stored bound.

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compression::{compress_fully, outward_votes, tight_profile, CompressionError};
use crate::evaluation::{
    approximation_ratio, lottery_cost, optimal_candidate, EvaluationError, RatioReport,
};
use crate::geometry::{
    CandidateSet, ExplicitMetric, GeometryError, Instance, MetricSpace, Point,
};
use crate::mechanisms::{
    Action, ActionProfile, CandidateView, InputKind, Mechanism, MechanismError,
};

#[derive(Debug, Error, PartialEq)]
pub enum AdversaryError {
    #[error("bad search configuration: {0}")]
    BadConfig(String),
    #[error("simplex audits need dimension >= 1")]
    BadDimension,
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Compression(#[from] CompressionError),
}

// ---------------------------------------------------------------------------
// The two-instance gap pair
// ---------------------------------------------------------------------------

/// Two line instances with candidates `(-1, 1)` that produce identical
/// truthful votes yet want opposite candidates: agents `(-1, eps)` and
/// `(-eps, 1)`.
pub fn gap_instances(eps: f64) -> (Instance, Instance) {
    let a = Instance::line(&[-1.0, 1.0], &[-1.0, eps]).expect("valid instance");
    let b = Instance::line(&[-1.0, 1.0], &[-eps, 1.0]).expect("valid instance");
    (a, b)
}

/// The ratio any deterministic voting rule must concede on the gap pair.
pub fn gap_deterministic_bound(eps: f64) -> f64 {
    (3.0 - eps) / (1.0 + eps)
}

/// The ratio conceded on the gap pair by an even coin over the candidates.
pub fn gap_randomized_bound(eps: f64) -> f64 {
    2.0 / (1.0 + eps)
}

/// The instance driving the uniform-dictator rule to its worst ratio:
/// candidates `(-1, 1)`, `n - 1` agents on the left candidate and one
/// outlier at `eps`, whose favorite is the right one. Candidate 1 then
/// costs `1 + eps` while candidate 2 costs `2(n-1) + 1 - eps`.
pub fn rd_worst_instance(n: usize, eps: f64) -> Result<Instance, AdversaryError> {
    if n < 2 {
        return Err(AdversaryError::BadConfig("need at least 2 agents".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AdversaryError::BadConfig("eps must lie strictly in (0, 1)".into()));
    }
    let mut agents = vec![-1.0; n - 1];
    agents.push(eps);
    Ok(Instance::line(&[-1.0, 1.0], &agents)?)
}

/// Closed form of the uniform dictator's ratio on [`rd_worst_instance`]:
/// the rule mixes the two candidate costs `(n-1)/n : 1/n`, so the ratio is
/// `(3 - 2/n + eps - 2 eps/n) / (1 + eps)`, which tends to 3 as `n` grows
/// and `eps` vanishes.
pub fn rd_worst_ratio(n: usize, eps: f64) -> f64 {
    let nf = n as f64;
    (3.0 - 2.0 / nf + eps - 2.0 * eps / nf) / (1.0 + eps)
}

/// What a rule that plays candidate 1 with probability `p` on the gap
/// pair's shared profile concedes, in the symmetric linear form
/// `f(p) = 1 + p(2 - eps)` versus its mirror `f(1 - p)`: the worse of the
/// two sides. Minimized at `p = 1/2`, where both sides agree on
/// `2 - eps/2`.
pub fn nonstrategic_pair_bound(p: f64, eps: f64) -> Result<f64, AdversaryError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AdversaryError::BadConfig("p must lie in [0, 1]".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AdversaryError::BadConfig("eps must lie strictly in (0, 1)".into()));
    }
    let f = |q: f64| 1.0 + q * (2.0 - eps);
    Ok(f(p).max(f(1.0 - p)))
}

/// What the audits record besides the bound itself.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundAudit {
    /// Both gap instances with their shared truthful vote profile and the
    /// per-instance ratios.
    GapPair { eps: f64, votes: ActionProfile, instances: Box<(Instance, Instance)>, ratios: (f64, f64) },
    /// The simplex chain: initial all-own votes, then everyone except the
    /// max-probability candidate's agent switching to the lowest other
    /// index. The witness puts the switchers on their candidate and one
    /// agent on the midpoint.
    Simplex {
        dim: usize,
        j_star: usize,
        j_low: usize,
        chain: Box<(ActionProfile, ActionProfile)>,
        witness: Instance,
    },
    /// The three-agent ranking chain over an equilateral triangle.
    Triangle { chain: Box<[ActionProfile; 3]>, witness: Instance },
}

/// A lower bound extracted from a mechanism's answers on a fixed chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub mechanism: String,
    /// Lower bound on the mechanism's worst-case ratio.
    pub bound: f64,
    /// Whether the tracked probability stayed constant along the chain
    /// (every step changes only a report that is tied at a border).
    pub border_equal: bool,
    pub audit: BoundAudit,
}

/// Evaluate a mechanism on the gap pair. The truthful votes coincide, so
/// the same lottery is scored against both optima; the bound is the worse
/// of the two ratios.
pub fn gap_audit(mech: &dyn Mechanism, eps: f64) -> Result<BoundReport, AdversaryError> {
    let (a, b) = gap_instances(eps);
    let votes = vec![Action::Vote(0), Action::Vote(1)];
    let view = CandidateView::of(&a);
    let lottery = mech.evaluate(&view, &votes)?;
    let ratio_on = |inst: &Instance| -> Result<f64, AdversaryError> {
        let cost = lottery_cost(inst, &lottery)?;
        let (_, opt) = optimal_candidate(inst)?;
        Ok(cost / opt)
    };
    let ratios = (ratio_on(&a)?, ratio_on(&b)?);
    Ok(BoundReport {
        mechanism: mech.name(),
        bound: ratios.0.max(ratios.1),
        border_equal: true,
        audit: BoundAudit::GapPair { eps, votes, instances: Box::new((a, b)), ratios },
    })
}

// ---------------------------------------------------------------------------
// Simplex audit
// ---------------------------------------------------------------------------

/// Vertices of a regular `d`-simplex with edge length 2 in `R^d`: the
/// standard-basis embedding in `R^{d+1}`, centered, expressed in an
/// orthonormal basis of the spanning hyperplane, and rescaled.
pub fn simplex_vertices(d: usize) -> Vec<Vec<f64>> {
    let k = d + 1;
    let centroid = 1.0 / k as f64;
    let diffs: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 - centroid } else { -centroid }).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for diff in diffs.iter().take(d) {
        let mut u = diff.clone();
        for b in &basis {
            let dot: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
            for (ux, bx) in u.iter_mut().zip(b) {
                *ux -= dot * bx;
            }
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        for ux in u.iter_mut() {
            *ux /= norm;
        }
        basis.push(u);
    }
    // The raw embedding has edge sqrt(2); scale to edge 2.
    let scale = 2.0 / 2f64.sqrt();
    diffs
        .iter()
        .map(|v| {
            basis
                .iter()
                .map(|b| scale * v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
                .collect()
        })
        .collect()
}

/// Corner a voting mechanism on a regular `d`-simplex of candidates.
///
/// Query 1 puts one agent on each vertex voting for it; `j_star` is a
/// maximum-probability candidate (ties toward the largest index). Query 2
/// moves every other agent's vote to the lowest index `j_low != j_star`;
/// each mover is tied between its own vertex and `j_low`'s at the witness
/// midpoints, so for truthful mechanisms the probability of `j_star`
/// cannot drop. On the witness instance — `d` agents at the `j_low` vertex,
/// one agent midway to `j_star`'s — candidate `j_low` costs 1 while
/// `j_star` costs `2d + 1`, so the mechanism concedes
/// `1 + 2d * p(j_star)`.
pub fn simplex_audit(mech: &dyn Mechanism, d: usize) -> Result<BoundReport, AdversaryError> {
    if d == 0 {
        return Err(AdversaryError::BadDimension);
    }
    let vertices = simplex_vertices(d);
    let k = d + 1;
    let metric = MetricSpace::Euclidean(d);
    let candidates = CandidateSet::new(
        &metric,
        vertices.iter().cloned().map(Point::Coords).collect(),
    )?;
    let view = CandidateView::new(&metric, &candidates);

    let all_own: ActionProfile = (0..k).map(Action::Vote).collect();
    let first = mech.evaluate(&view, &all_own)?;
    let j_star = first.argmax_last();
    let j_low = (0..k).find(|&j| j != j_star).expect("two candidates exist");

    let herded: ActionProfile = (0..k)
        .map(|i| Action::Vote(if i == j_star { j_star } else { j_low }))
        .collect();
    let second = mech.evaluate(&view, &herded)?;
    let p = second.prob(j_star);
    let border_equal = (first.prob(j_star) - p).abs() <= 1e-9;

    let midpoint: Vec<f64> = vertices[j_star]
        .iter()
        .zip(&vertices[j_low])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut agents: Vec<Point> = std::iter::repeat(Point::Coords(vertices[j_low].clone()))
        .take(d)
        .collect();
    agents.push(Point::Coords(midpoint));
    let witness = Instance::new(metric, candidates, agents)?;

    Ok(BoundReport {
        mechanism: mech.name(),
        bound: 1.0 + 2.0 * d as f64 * p,
        border_equal,
        audit: BoundAudit::Simplex {
            dim: d,
            j_star,
            j_low,
            chain: Box::new((all_own, herded)),
            witness,
        },
    })
}

// ---------------------------------------------------------------------------
// Triangle audit
// ---------------------------------------------------------------------------

/// Corner a ranking mechanism on an equilateral triangle (side 2).
///
/// The chain starts from the fully cyclic profile, then flips agent 1's top
/// pair, then agent 3's. Each flip swaps two candidates the agent is tied
/// between at the witness geometry, so a truthful mechanism keeps candidate
/// 3's probability constant along the chain. The witness — two agents on
/// candidate 2, one midway between candidates 2 and 3 — prices candidate 2
/// at 1 and candidate 3 at 5, so the mechanism concedes `1 + 4 * p3`.
pub fn triangle_audit(mech: &dyn Mechanism) -> Result<BoundReport, AdversaryError> {
    let vertices = simplex_vertices(2);
    let metric = MetricSpace::Euclidean(2);
    let candidates = CandidateSet::new(
        &metric,
        vertices.iter().cloned().map(Point::Coords).collect(),
    )?;
    let view = CandidateView::new(&metric, &candidates);

    let chain = [
        vec![
            Action::Ranking(vec![0, 1, 2]),
            Action::Ranking(vec![1, 2, 0]),
            Action::Ranking(vec![2, 0, 1]),
        ],
        vec![
            Action::Ranking(vec![1, 0, 2]),
            Action::Ranking(vec![1, 2, 0]),
            Action::Ranking(vec![2, 0, 1]),
        ],
        vec![
            Action::Ranking(vec![1, 0, 2]),
            Action::Ranking(vec![1, 2, 0]),
            Action::Ranking(vec![2, 1, 0]),
        ],
    ];
    let p_chain: Vec<f64> = chain
        .iter()
        .map(|profile| mech.evaluate(&view, profile).map(|l| l.prob(2)))
        .collect::<Result<_, _>>()?;
    let border_equal = p_chain.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9);
    let p3 = p_chain[2];

    let midpoint: Vec<f64> = vertices[1]
        .iter()
        .zip(&vertices[2])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let witness = Instance::new(
        metric,
        candidates,
        vec![
            Point::Coords(vertices[1].clone()),
            Point::Coords(vertices[1].clone()),
            Point::Coords(midpoint),
        ],
    )?;

    Ok(BoundReport {
        mechanism: mech.name(),
        bound: 1.0 + 4.0 * p3,
        border_equal,
        audit: BoundAudit::Triangle { chain: Box::new(chain), witness },
    })
}

/// Re-run a bound report's stored query chain and recompute its bound.
/// Deterministic mechanisms must reproduce the stored value exactly; the
/// caller compares.
pub fn replay_bound(mech: &dyn Mechanism, report: &BoundReport) -> Result<f64, AdversaryError> {
    match &report.audit {
        BoundAudit::GapPair { votes, instances, .. } => {
            let (a, b) = instances.as_ref();
            let view = CandidateView::of(a);
            let lottery = mech.evaluate(&view, votes)?;
            let mut worst = f64::NEG_INFINITY;
            for inst in [a, b] {
                let cost = lottery_cost(inst, &lottery)?;
                let (_, opt) = optimal_candidate(inst)?;
                worst = worst.max(cost / opt);
            }
            Ok(worst)
        }
        BoundAudit::Simplex { dim, j_star, chain, witness, .. } => {
            let view = CandidateView::of(witness);
            let second = mech.evaluate(&view, &chain.1)?;
            Ok(1.0 + 2.0 * *dim as f64 * second.prob(*j_star))
        }
        BoundAudit::Triangle { chain, witness } => {
            let view = CandidateView::of(witness);
            let last = mech.evaluate(&view, &chain[2])?;
            Ok(1.0 + 4.0 * last.prob(2))
        }
    }
}

// ---------------------------------------------------------------------------
// Randomized ratio search
// ---------------------------------------------------------------------------

/// Which random instance family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMetric {
    /// Random line instances (and compression probes on them).
    Line,
    /// Random explicit metrics on up to 8 points, repaired to satisfy the
    /// triangle inequality by shortest paths.
    Explicit,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub samples: u64,
    pub seed: u64,
    pub max_agents: usize,
    pub max_candidates: usize,
    /// Coordinate range for random line candidates and agents.
    pub coords: (f64, f64),
    pub metric: SearchMetric,
    /// Keep the candidate set fixed and randomize only the agents; needed
    /// for rules defined on specific candidates.
    pub fixed_candidates: Option<Vec<f64>>,
    /// Also score the `eps = 1e-3` gap pair once (voting mechanisms only).
    pub gap_probes: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            samples: 200,
            seed: 0,
            max_agents: 8,
            max_candidates: 6,
            coords: (-10.0, 10.0),
            metric: SearchMetric::Line,
            fixed_candidates: None,
            gap_probes: false,
        }
    }
}

/// One scored instance, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRecord {
    /// Index of the random sample, or `None` for the gap probes.
    pub sample: Option<u64>,
    /// `raw`, `tight`, `compressed`, `gap-left`, or `gap-right`.
    pub probe: &'static str,
    pub instance: Instance,
    pub report: RatioReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub mechanism: String,
    pub samples: u64,
    /// Number of (instance, profile) scorings performed.
    pub evaluations: u64,
    pub best: Option<SearchRecord>,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of the splitmix64 generator.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-sample stream: the sample index, not the iteration
/// order, determines the draw, so partial or chunked runs agree with the
/// sequential one.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
    ))
}

fn random_line_instance(rng: &mut ChaCha8Rng, cfg: &SearchConfig) -> Instance {
    let (lo, hi) = cfg.coords;
    let ys: Vec<f64> = match &cfg.fixed_candidates {
        Some(fixed) => fixed.clone(),
        None => loop {
            let m = rng.random_range(2..=cfg.max_candidates);
            let mut ys: Vec<f64> = (0..m).map(|_| rng.random_range(lo..hi)).collect();
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if ys.windows(2).all(|w| w[0] < w[1]) {
                break ys;
            }
        },
    };
    let n = rng.random_range(1..=cfg.max_agents.max(1));
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    Instance::line(&ys, &xs).expect("sorted distinct candidates")
}

fn random_explicit_instance(rng: &mut ChaCha8Rng, cfg: &SearchConfig) -> Instance {
    let k = rng.random_range(2..=8usize);
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let v = rng.random_range(0.5..10.0);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    // Shortest-path closure restores the triangle inequality.
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                let shortcut = d[i][via] + d[via][j];
                if shortcut < d[i][j] {
                    d[i][j] = shortcut;
                }
            }
        }
    }
    let metric = MetricSpace::Explicit(ExplicitMetric::new(d).expect("repaired metric"));
    let m = rng.random_range(2..=k.min(cfg.max_candidates).max(2));
    let mut indices: Vec<usize> = (0..k).collect();
    let mut cands = Vec::with_capacity(m);
    for _ in 0..m {
        let pos = rng.random_range(0..indices.len());
        cands.push(indices.swap_remove(pos));
    }
    cands.sort();
    let candidates =
        CandidateSet::new(&metric, cands.into_iter().map(Point::Index).collect()).unwrap();
    let n = rng.random_range(1..=cfg.max_agents.max(1));
    let all: Vec<usize> = (0..k).collect();
    let agents: Vec<Point> =
        (0..n).map(|_| Point::Index(*all.choose(rng).unwrap())).collect();
    Instance::new(metric, candidates, agents).expect("valid explicit instance")
}

/// Score an instance by its worst truthful profile (full enumeration).
fn score_raw(
    mech: &dyn Mechanism,
    inst: &Instance,
) -> Result<RatioReport, AdversaryError> {
    Ok(approximation_ratio(mech, inst)?)
}

/// Score a line instance under the outward vote profile only. Outward
/// votes are truthful, so this is a certified achieved ratio without
/// enumerating the (potentially exponential) tie-breaks of border-heavy
/// profiles; for positional rules it is exactly the worst case.
fn score_outward(
    mech: &dyn Mechanism,
    inst: &Instance,
) -> Result<RatioReport, AdversaryError> {
    let votes = outward_votes(inst)?;
    let view = CandidateView::of(inst);
    let lottery = mech.evaluate(&view, &votes)?;
    let worst_cost = lottery_cost(inst, &lottery)?;
    let (opt_candidate, opt_cost) = optimal_candidate(inst)?;
    let ratio = if opt_cost > 0.0 {
        worst_cost / opt_cost
    } else if worst_cost > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(RatioReport {
        mechanism: mech.name(),
        worst_cost,
        opt_cost,
        opt_candidate,
        ratio,
        witness: votes,
    })
}

/// Randomized search for high-ratio instances. Each sample draws a fresh
/// instance from its own seeded stream and scores it as-is; on the line,
/// voting mechanisms are additionally scored on the tightened and fully
/// compressed transforms under outward votes. The best record (by ratio)
/// is returned with its witness profile, so it can be replayed exactly.
pub fn ratio_search(
    mech: &dyn Mechanism,
    cfg: &SearchConfig,
) -> Result<SearchReport, AdversaryError> {
    if cfg.max_candidates < 2 {
        return Err(AdversaryError::BadConfig("max_candidates must be at least 2".into()));
    }
    if !(cfg.coords.0 < cfg.coords.1) {
        return Err(AdversaryError::BadConfig("coordinate range must be nonempty".into()));
    }
    if let Some(fixed) = &cfg.fixed_candidates {
        if cfg.metric != SearchMetric::Line {
            return Err(AdversaryError::BadConfig(
                "fixed candidates are supported on the line only".into(),
            ));
        }
        if fixed.len() < 2 || fixed.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AdversaryError::BadConfig(
                "fixed candidates must be at least two strictly increasing positions".into(),
            ));
        }
    }

    let mut evaluations = 0u64;
    let mut best: Option<SearchRecord> = None;
    let consider = |record: SearchRecord, best: &mut Option<SearchRecord>| {
        if best.as_ref().is_none_or(|b| record.report.ratio > b.report.ratio) {
            *best = Some(record);
        }
    };

    if cfg.gap_probes && mech.input_kind() == InputKind::Voting {
        let (a, b) = gap_instances(1e-3);
        for (probe, inst) in [("gap-left", a), ("gap-right", b)] {
            let report = score_raw(mech, &inst)?;
            evaluations += 1;
            consider(SearchRecord { sample: None, probe, instance: inst, report }, &mut best);
        }
    }

    for i in 0..cfg.samples {
        let mut rng = sample_rng(cfg.seed, i);
        let inst = match cfg.metric {
            SearchMetric::Line => random_line_instance(&mut rng, cfg),
            SearchMetric::Explicit => random_explicit_instance(&mut rng, cfg),
        };
        let report = score_raw(mech, &inst)?;
        evaluations += 1;
        consider(
            SearchRecord { sample: Some(i), probe: "raw", instance: inst.clone(), report },
            &mut best,
        );

        if mech.input_kind() == InputKind::Voting && inst.metric.is_line() {
            let tight = tight_profile(&inst)?;
            let (compressed, _) = compress_fully(&tight)?;
            let report = score_outward(mech, &tight)?;
            evaluations += 1;
            consider(
                SearchRecord { sample: Some(i), probe: "tight", instance: tight, report },
                &mut best,
            );

            let report = score_outward(mech, &compressed)?;
            evaluations += 1;
            consider(
                SearchRecord {
                    sample: Some(i),
                    probe: "compressed",
                    instance: compressed,
                    report,
                },
                &mut best,
            );
        }
    }

    Ok(SearchReport { mechanism: mech.name(), samples: cfg.samples, evaluations, best })
}

/// Re-score a search record: evaluate the stored witness profile on the
/// stored instance. Always reproduces the stored ratio for pure mechanisms.
pub fn replay_record(
    mech: &dyn Mechanism,
    record: &SearchRecord,
) -> Result<f64, AdversaryError> {
    let view = CandidateView::of(&record.instance);
    let lottery = mech.evaluate(&view, &record.report.witness)?;
    let cost = lottery_cost(&record.instance, &lottery)?;
    let (_, opt) = optimal_candidate(&record.instance)?;
    if opt > 0.0 {
        Ok(cost / opt)
    } else if cost > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0)
    }
}
