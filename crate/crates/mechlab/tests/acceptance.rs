//! End-to-end acceptance gate: one test per criterion, each printing a
//! single PASS line (visible with `--nocapture`) and failing loudly
//! otherwise. Tolerances are pinned here, next to the asserts they guard.

use std::rc::Rc;
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mechlab::{
    approximation_ratio, audit_all_percentiles, audit_gsp, audit_universal_wpv, audit_unilateral,
    check_reduction, gap_audit, gap_instances, left_compress, lift, line_profile, lottery_cost,
    nonstrategic_pair_bound, optimal_candidate, outward_votes, project_location_to_ranking,
    project_location_to_voting_2cand, ranking_zones_line, ratio_search, rd_worst_instance,
    rd_worst_ratio, right_compress, simplex_audit, spike_as_wpv, spike_three_block_ratio,
    spike_weights, tight_profile, triangle_audit, vote_profile, votes_of, Action, AuditOptions,
    CandidateView, Claim1, Claim4, Claim5, ConsistentMap, InputKind, Instance, Lottery,
    Mechanism, MechanismError, Median, RandomDictator, ReducedMechanism, SearchConfig,
    SearchMetric, Spike, ThreeBlock, UniformRanking, Wpv,
};

/// Slack for ratio upper bounds (`<= bound + RATIO_SLACK`).
const RATIO_SLACK: f64 = 1e-9;
/// Tolerance for values that are exact in f64 up to rounding noise.
const EXACT: f64 = 1e-12;
/// Tolerance for the pair-bound optimum (criterion 8).
const PAIR_TOL: f64 = 1e-6;
/// Tolerance for the pair-bound minimizer location (criterion 8).
const MINIMIZER_TOL: f64 = 1e-3;

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random line instance: `m` in 2..=max_m sorted distinct candidates and
/// `n` in 1..=max_n agents, coordinates uniform in [-10, 10].
fn random_line_instance(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Instance {
    let ys: Vec<f64> = loop {
        let m = rng.random_range(2..=max_m);
        let mut ys: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ys.windows(2).all(|w| w[0] < w[1]) {
            break ys;
        }
    };
    let n = rng.random_range(1..=max_n);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    Instance::line(&ys, &xs).unwrap()
}

fn normalized_random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let sum: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= sum;
    }
    w
}

fn median_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    w[n.div_ceil(2) - 1] = 1.0;
    w
}

fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[test]
fn criterion_01_spike_search_stays_within_two() {
    let cfg = SearchConfig {
        samples: 100_000,
        seed: 0,
        max_agents: 16,
        max_candidates: 6,
        coords: (-10.0, 10.0),
        metric: SearchMetric::Line,
        fixed_candidates: None,
        gap_probes: false,
    };
    let start = Instant::now();
    let report = ratio_search(&Spike, &cfg).unwrap();
    let elapsed = start.elapsed();
    let best = report.best.expect("samples > 0");
    assert!(
        best.report.ratio <= 2.0 + RATIO_SLACK,
        "spike exceeded 2: {} on {:?} probe of sample {:?}",
        best.report.ratio,
        best.probe,
        best.sample
    );
    assert!(elapsed.as_secs() < 60, "search took {elapsed:?}, budget is 60 s");
    println!(
        "criterion 01 spike-upper-bound: PASS (max ratio {:.9} over {} scored probes, {:.2?})",
        best.report.ratio, report.evaluations, elapsed
    );
}

#[test]
fn criterion_02_spike_gap_tightness() {
    let eps = 1e-3;
    let expected = 2.0 / (1.0 + eps);
    let audit = gap_audit(&Spike, eps).unwrap();
    assert!(
        (audit.bound - expected).abs() <= RATIO_SLACK,
        "gap audit bound {} vs {}",
        audit.bound,
        expected
    );
    // Each side of the pair individually realizes the same ratio.
    let (a, b) = gap_instances(eps);
    for inst in [&a, &b] {
        let report = approximation_ratio(&Spike, inst).unwrap();
        assert!((report.ratio - expected).abs() <= RATIO_SLACK);
    }
    println!("criterion 02 spike-tightness: PASS (gap ratio {:.9} = 2/(1+eps))", audit.bound);
}

#[test]
fn criterion_03_three_block_closed_form() {
    let betas: Vec<f64> = (-6..=6).map(|k| 2f64.powi(k)).collect();
    let mut evaluated = 0u64;
    let mut equality_cases = 0u64;
    for l in 0..=50usize {
        for c in 0..=50usize {
            for r in 0..=50usize {
                let n = l + c + r;
                if n == 0 {
                    continue;
                }
                let median_pos = n.div_ceil(2);
                let median_center = median_pos > l && median_pos <= l + c;
                for &beta in &betas {
                    let tb = ThreeBlock { left: l, center: c, right: r, beta };
                    let ratio = spike_three_block_ratio(&tb).unwrap();
                    evaluated += 1;
                    assert!(
                        ratio <= 2.0 + RATIO_SLACK,
                        "({l},{c},{r},{beta}): ratio {ratio}"
                    );
                    if median_center && l >= 1 && r >= 1 {
                        equality_cases += 1;
                        assert!(
                            (ratio - 2.0).abs() <= RATIO_SLACK,
                            "({l},{c},{r},{beta}): expected exactly 2, got {ratio}"
                        );
                    }
                    // Same equality under the balanced-block condition.
                    if l < c + r && r < l + c && l >= 1 && r >= 1 {
                        assert!((ratio - 2.0).abs() <= RATIO_SLACK);
                    }
                }
            }
        }
    }
    println!(
        "criterion 03 three-block-closed-form: PASS ({evaluated} cases, {equality_cases} pinned at 2)"
    );
}

#[test]
fn criterion_04_median_three_approximation() {
    let cfg = SearchConfig {
        samples: 100_000,
        seed: 0,
        max_agents: 16,
        max_candidates: 6,
        coords: (-10.0, 10.0),
        metric: SearchMetric::Line,
        fixed_candidates: None,
        gap_probes: true,
    };
    let report = ratio_search(&Median, &cfg).unwrap();
    let best = report.best.expect("samples > 0");
    assert!(
        best.report.ratio <= 3.0 + RATIO_SLACK,
        "median exceeded 3: {}",
        best.report.ratio
    );
    assert!(best.report.ratio >= 2.9, "gap probes should reach 2.9+: {}", best.report.ratio);

    let eps = 1e-3;
    let audit = gap_audit(&Median, eps).unwrap();
    let expected = (3.0 - eps) / (1.0 + eps);
    assert!((audit.bound - expected).abs() <= RATIO_SLACK);
    println!(
        "criterion 04 median-bounds: PASS (search max {:.9} <= 3, gap ratio {:.9})",
        best.report.ratio, audit.bound
    );
}

#[test]
fn criterion_05_random_dictator_exactly_three() {
    let (n, eps) = (100usize, 1e-3);
    let inst = rd_worst_instance(n, eps).unwrap();
    let report = approximation_ratio(&RandomDictator, &inst).unwrap();
    let expected = rd_worst_ratio(n, eps);
    assert!(
        (report.ratio - expected).abs() <= RATIO_SLACK,
        "worst instance: {} vs {}",
        report.ratio,
        expected
    );

    let cfg = SearchConfig {
        samples: 20_000,
        seed: 1,
        metric: SearchMetric::Explicit,
        ..SearchConfig::default()
    };
    let search = ratio_search(&RandomDictator, &cfg).unwrap();
    let best = search.best.expect("samples > 0");
    assert!(
        best.report.ratio <= 3.0 + RATIO_SLACK,
        "dictator exceeded 3 on an explicit metric: {}",
        best.report.ratio
    );
    println!(
        "criterion 05 random-dictator-three: PASS (worst-instance ratio {:.9}, explicit search max {:.9})",
        report.ratio, best.report.ratio
    );
}

#[test]
fn criterion_06_simplex_audit_bounds() {
    let mut achieved = Vec::new();
    for d in 1..=3usize {
        let report = simplex_audit(&RandomDictator, d).unwrap();
        let expected = 3.0 - 2.0 / (d as f64 + 1.0);
        assert!(
            (report.bound - expected).abs() <= EXACT,
            "d={d}: bound {} vs {}",
            report.bound,
            expected
        );
        assert!(report.border_equal, "d={d}: probability moved along the chain");
        achieved.push(report.bound);
    }
    println!(
        "criterion 06 simplex-audit: PASS (bounds {:.6}, {:.6}, {:.6} for d=1,2,3)",
        achieved[0], achieved[1], achieved[2]
    );
}

#[test]
fn criterion_07_triangle_audit_bound() {
    let report = triangle_audit(&UniformRanking).unwrap();
    assert!(
        (report.bound - 7.0 / 3.0).abs() <= EXACT,
        "triangle bound {} vs 7/3",
        report.bound
    );
    println!("criterion 07 triangle-audit: PASS (bound {:.12} = 7/3)", report.bound);
}

#[test]
fn criterion_08_pair_bound_optimum() {
    let eps = 1e-2;
    let mut best = f64::INFINITY;
    let mut minimizer = f64::NAN;
    for k in 0..=1000u32 {
        let p = k as f64 / 1000.0;
        let value = nonstrategic_pair_bound(p, eps).unwrap();
        if value < best {
            best = value;
            minimizer = p;
        }
    }
    let expected = 2.0 - eps / 2.0;
    assert!((best - expected).abs() <= PAIR_TOL, "minimum {best} vs {expected}");
    assert!(
        (minimizer - 0.5).abs() <= MINIMIZER_TOL,
        "minimizer {minimizer} should be the even coin"
    );
    println!(
        "criterion 08 pair-bound-optimum: PASS (min {:.6} at p = {:.3})",
        best, minimizer
    );
}

#[test]
fn criterion_09_wpv_universal_truthfulness() {
    let grid: Vec<f64> = (-4..=4).map(f64::from).collect();
    let opts = AuditOptions::default();

    // 50 seeded weight vectors per agent count, plus the three named ones.
    let mut weight_sets: Vec<Vec<Vec<f64>>> = Vec::new();
    for n in 1..=4usize {
        let mut rng = seeded(900 + n as u64);
        let mut sets = vec![spike_weights(n), median_weights(n), uniform_weights(n)];
        sets.extend((0..50).map(|_| normalized_random_weights(&mut rng, n)));
        weight_sets.push(sets);
    }

    let mut instances = 0u64;
    let mut checks = 0u64;
    for m in 1..=4usize {
        for cands in grid.iter().copied().combinations(m) {
            for n in 1..=4usize {
                for agents in grid.iter().copied().combinations_with_replacement(n) {
                    let inst = Instance::line(&cands, &agents).unwrap();
                    let positions = audit_all_percentiles(&inst, &opts).unwrap();
                    instances += 1;
                    for report in &positions {
                        checks += report.checks;
                        assert!(
                            report.passed(),
                            "{} violated on candidates {cands:?}, agents {agents:?}",
                            report.mechanism
                        );
                    }
                    // Every weight vector is covered by the per-position
                    // verdicts; exercise the combined entry point on a
                    // subsample to keep the audit honest end to end.
                    if instances % 2000 == 0 {
                        for weights in &weight_sets[n - 1] {
                            let report = audit_universal_wpv(weights, &inst, &opts).unwrap();
                            assert!(report.passed());
                        }
                    }
                }
            }
        }
    }
    println!(
        "criterion 09 wpv-universal-truthfulness: PASS ({instances} instances, {checks} deviation checks, 0 violations)"
    );
}

/// Point mass on the candidate the chosen agent did NOT vote for: one of
/// the deterministic draws hiding inside the two-candidate mixed rule.
struct AntiDictator {
    agent: usize,
}

impl Mechanism for AntiDictator {
    fn name(&self) -> String {
        format!("anti-dictator:{}", self.agent)
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
        Ok(Lottery::point_mass(1 - votes[self.agent], 2))
    }
}

#[test]
fn criterion_10_counterexample_suite() {
    // Location rule on candidates (0, 3, 4): truthful in expectation on a
    // fine grid, yet not constant on ranking zones.
    let grid_opts = AuditOptions { grid_step: 0.01, ..AuditOptions::default() };
    let agent_sets: [&[f64]; 5] =
        [&[0.75, 1.25], &[0.5, 2.0, 3.9], &[1.0, 3.5], &[0.0, 4.0], &[1.0, 1.0]];
    for agents in agent_sets {
        let inst = Instance::line(&[0.0, 3.0, 4.0], agents).unwrap();
        let report = audit_unilateral(&Claim4, &inst, &grid_opts).unwrap();
        assert!(report.passed(), "claim4 violated at agents {agents:?}");
    }
    let inst = Instance::line(&[0.0, 3.0, 4.0], &[0.75]).unwrap();
    let view = CandidateView::of(&inst);
    let low = Claim4.evaluate(&view, &line_profile(&[0.75])).unwrap();
    let high = Claim4.evaluate(&view, &line_profile(&[1.25])).unwrap();
    assert_ne!(low, high, "claim4 must separate 0.75 from 1.25");
    let zones = ranking_zones_line(&inst.candidates).unwrap();
    assert_eq!(
        zones.zone_containing(0.75).ranking,
        zones.zone_containing(1.25).ranking,
        "the separated reports must share a ranking zone"
    );

    // Ranking rule for two agents over three candidates: truthful, yet two
    // profiles with identical favorite votes get different outcomes.
    let cands = [0.0, 2.0, 5.0];
    for agents in [[-1.0, 1.5], [0.5, 3.0], [2.7, 4.5], [1.2, 3.8]] {
        let inst = Instance::line(&cands, &agents).unwrap();
        let report = audit_unilateral(&Claim1, &inst, &AuditOptions::default()).unwrap();
        assert!(report.passed(), "claim1 violated at agents {agents:?}");
    }
    let inst = Instance::line(&cands, &[0.5, 1.5]).unwrap();
    let view = CandidateView::of(&inst);
    let zones = ranking_zones_line(&inst.candidates).unwrap();
    let rank = |z: usize| Action::Ranking(zones.zones[z].ranking.clone());
    assert_eq!(
        zones.zones[1].ranking[0], zones.zones[2].ranking[0],
        "the two distinguishing zones share a top choice"
    );
    let near = Claim1.evaluate(&view, &[rank(0), rank(1)]).unwrap();
    let far = Claim1.evaluate(&view, &[rank(0), rank(2)]).unwrap();
    assert_ne!(near, far, "claim1 must separate rankings with equal tops");

    // Two-candidate mixed rule: truthful in expectation, while a realized
    // deterministic draw is manipulable.
    for agents in [[-0.3, 0.8], [-1.0, 1.0], [0.2, -0.9]] {
        let inst = Instance::line(&[-1.0, 1.0], &agents).unwrap();
        let report = audit_unilateral(&Claim5, &inst, &AuditOptions::default()).unwrap();
        assert!(report.passed(), "claim5 violated at agents {agents:?}");
    }
    let inst = Instance::line(&[-1.0, 1.0], &[-0.3, 0.8]).unwrap();
    let anti = AntiDictator { agent: 0 };
    let report = audit_unilateral(&anti, &inst, &AuditOptions::default()).unwrap();
    assert!(!report.passed(), "the realized anti-dictator draw must be manipulable");

    // The uniform dictator is not group-strategyproof: a two-agent
    // coalition drops both expected costs from 1 to 0.51.
    let inst = Instance::line(&[-1.0, 0.0, 1.0], &[-0.51, 0.51]).unwrap();
    let gsp = audit_gsp(&RandomDictator, &inst, &AuditOptions::default()).unwrap();
    let violation = gsp
        .violations
        .iter()
        .find(|v| v.coalition == vec![0, 1] && v.deviated == vote_profile(&[1, 1]))
        .expect("the full-coalition center deviation must be flagged");
    assert_eq!(violation.costs_truthful, vec![1.0, 1.0]);
    assert_eq!(violation.costs_deviating, vec![0.51, 0.51]);

    println!(
        "criterion 10 counterexamples: PASS (claim4/claim1/claim5 audits, anti-dictator draw manipulable, coalition 1 -> 0.51)"
    );
}

#[test]
fn criterion_11_compression_properties() {
    let mut rng = seeded(0xC11);
    let margin = 1e-9;
    let mut instances = 0u64;
    let mut dominance_checks = 0u64;
    let mut compress_checks = 0u64;

    // Outward-vote ratio of a weighted percentile rule on one instance; a
    // zero-cost lottery on a zero-cost instance counts as ratio 1.
    let outward_ratio = |wpv: &Wpv, inst: &Instance| -> f64 {
        let votes = outward_votes(inst).unwrap();
        let lot = wpv.evaluate(&CandidateView::of(inst), &votes).unwrap();
        let cost = lottery_cost(inst, &lot).unwrap();
        let opt = optimal_candidate(inst).unwrap().1;
        if opt > 0.0 {
            cost / opt
        } else if cost > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    };

    for _ in 0..10_000 {
        let inst = random_line_instance(&mut rng, 10, 6);
        instances += 1;
        let n = inst.n();
        let tight = tight_profile(&inst).unwrap();

        // (a) Tightening preserves the optimal candidate.
        assert_eq!(
            optimal_candidate(&inst).unwrap().0,
            optimal_candidate(&tight).unwrap().0,
            "tightening moved the optimum on {inst:?}"
        );

        let mut rules: Vec<Wpv> = vec![
            spike_as_wpv(n),
            Wpv::new(median_weights(n)).unwrap(),
            Wpv::new(uniform_weights(n)).unwrap(),
        ];
        rules.extend(
            (0..20).map(|_| Wpv::new(normalized_random_weights(&mut rng, n)).unwrap()),
        );

        // (b) Tightening never lowers the outward-vote ratio.
        for rule in &rules {
            assert!(
                outward_ratio(rule, &tight) >= outward_ratio(rule, &inst) - margin,
                "tightening lowered the ratio for {}",
                rule.name()
            );
        }

        // (c) Compressing a flank costs the spike rule at most twice what
        // it saves the optimum.
        let spike_lottery = Spike
            .evaluate(&CandidateView::of(&tight), &outward_votes(&tight).unwrap())
            .unwrap();
        for compressed in [left_compress(&tight).unwrap(), right_compress(&tight).unwrap()]
            .into_iter()
            .flatten()
        {
            let diff = lottery_cost(&tight, &spike_lottery).unwrap()
                - lottery_cost(&compressed, &spike_lottery).unwrap();
            let delta = optimal_candidate(&tight).unwrap().1
                - optimal_candidate(&compressed).unwrap().1;
            assert!(
                diff <= 2.0 * delta + margin,
                "compression difference {diff} exceeds 2 * {delta}"
            );
            compress_checks += 1;
        }

        // (d) For border agents, voting away from the optimum hurts at
        // least as much as voting toward it, under every percentile rule.
        let outward = outward_votes(&tight).unwrap();
        let view = CandidateView::of(&tight);
        for (i, x) in tight.agents.iter().enumerate() {
            let favs =
                mechlab::favorite_candidates(&tight.metric, &tight.candidates, x).unwrap();
            if favs.len() < 2 {
                continue;
            }
            let out_vote = match outward[i] {
                Action::Vote(v) => v,
                _ => unreachable!("outward profiles are votes"),
            };
            let in_vote = if favs[0] == out_vote { favs[1] } else { favs[0] };
            let mut inward = outward.clone();
            inward[i] = Action::Vote(in_vote);
            for rule in &rules {
                let cost_out =
                    lottery_cost(&tight, &rule.evaluate(&view, &outward).unwrap()).unwrap();
                let cost_in =
                    lottery_cost(&tight, &rule.evaluate(&view, &inward).unwrap()).unwrap();
                assert!(
                    cost_out >= cost_in - margin,
                    "outward vote of agent {i} is not dominant for {}",
                    rule.name()
                );
                dominance_checks += 1;
            }
        }
    }
    println!(
        "criterion 11 compression-properties: PASS ({instances} instances, {compress_checks} flank compressions, {dominance_checks} dominance checks)"
    );
}

#[test]
fn criterion_12_reduction_consistency() {
    let mut rng = seeded(0xC12);
    let instances: Vec<Instance> =
        (0..1000).map(|_| random_line_instance(&mut rng, 4, 4)).collect();

    // Lift round-trips: a lifted rule together with the matching coarse
    // map reproduces the original exactly.
    let lifted_rank = lift(Rc::new(Spike), InputKind::Ranking).unwrap();
    let back = ReducedMechanism { target: Box::new(Spike), map: ConsistentMap::TopOfRanking };
    let check = check_reduction(&lifted_rank, &back, &instances).unwrap();
    assert!(check.passed(), "ranking round-trip: {} mismatches", check.mismatches.len());

    let lifted_loc = lift(Rc::new(Spike), InputKind::Location).unwrap();
    let back = ReducedMechanism { target: Box::new(Spike), map: ConsistentMap::FavoriteVote };
    let check = check_reduction(&lifted_loc, &back, &instances).unwrap();
    assert!(check.passed(), "location round-trip: {} mismatches", check.mismatches.len());

    let lifted_med = lift(Rc::new(Median), InputKind::Location).unwrap();
    let back = ReducedMechanism { target: Box::new(Median), map: ConsistentMap::FavoriteVote };
    let check = check_reduction(&lifted_med, &back, &instances).unwrap();
    assert!(check.passed(), "median round-trip: {} mismatches", check.mismatches.len());

    // Zone projections of lifted rules are consistent: lifted rules are
    // constant on voting zones, hence on the finer ranking zones.
    let mut max_gap: f64 = 0.0;
    for mech in [
        Rc::new(lift(Rc::new(Spike), InputKind::Location).unwrap()) as Rc<dyn Mechanism>,
        Rc::new(lift(Rc::new(Median), InputKind::Location).unwrap()) as Rc<dyn Mechanism>,
    ] {
        let reduced = project_location_to_ranking(mech.clone()).unwrap();
        let check = check_reduction(mech.as_ref(), &reduced, &instances).unwrap();
        assert!(
            check.passed(),
            "zone projection of {}: {} mismatches",
            mech.name(),
            check.mismatches.len()
        );
        max_gap = max_gap.max(check.max_gap);
    }

    // The border-fraction family: probability of the left candidate is
    // monotone in where the tied block reports, and the voting projection
    // recovers the border weight.
    let base = Instance::line(&[-1.0, 1.0], &[0.0]).unwrap();
    let view = CandidateView::of(&base);
    let mut triples = 0u64;
    for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let rule = mechlab::BorderFraction::new(gamma).unwrap();
        for n1 in 0..=12usize {
            for n2 in 0..=(12 - n1) {
                for n3 in 0..=(12 - n1 - n2) {
                    if n1 + n2 + n3 == 0 {
                        continue;
                    }
                    let p_of = |tied_at: f64| -> f64 {
                        let mut xs = vec![-0.8; n1];
                        xs.extend(std::iter::repeat(tied_at).take(n2));
                        xs.extend(std::iter::repeat(0.6).take(n3));
                        rule.evaluate(&view, &line_profile(&xs)).unwrap().prob(0)
                    };
                    let p1 = p_of(0.0);
                    let p2 = p_of(-0.5);
                    let p3 = p_of(0.5);
                    assert!(
                        p3 <= p1 + EXACT && p1 <= p2 + EXACT,
                        "monotonicity failed at gamma={gamma}, ({n1},{n2},{n3}): {p3} {p1} {p2}"
                    );
                    triples += 1;
                }
            }
        }
        let projected =
            project_location_to_voting_2cand(Rc::new(mechlab::BorderFraction::new(gamma).unwrap()), &view)
                .unwrap();
        match projected.map {
            ConsistentMap::BorderQMix { q } => {
                assert!((q - gamma).abs() <= RATIO_SLACK, "recovered q {q} vs gamma {gamma}")
            }
            other => panic!("unexpected map {other:?}"),
        }
    }

    println!(
        "criterion 12 reductions: PASS (round-trips and zone projections on 1000 instances, max gap {max_gap:.2e}, {triples} monotonicity triples)"
    );
}
