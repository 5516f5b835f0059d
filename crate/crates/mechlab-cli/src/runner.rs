//! Task execution: one function per subcommand. Scenario tasks write a
//! JSON detail report plus the fixed-column CSV summary and return exit
//! code 0 (all rows pass), 2 (a violation or failed bound), or an error
//! for malformed input (exit 1). `repro_all` re-derives every headline
//! number at desk scale and prints a four-column table.

use std::fs;
use std::path::Path;
use std::rc::Rc;

use anyhow::{bail, Context, Result};
use itertools::Itertools;
use mechlab::{
    approximation_ratio, audit_all_percentiles, audit_gsp, audit_unilateral, check_reduction,
    favorite_candidates, gap_audit, gap_deterministic_bound, gap_randomized_bound, left_compress,
    lift, line_profile, lottery_cost, mechanism_from_name, nonstrategic_pair_bound,
    optimal_candidate, outward_votes, project_location_to_ranking,
    project_location_to_voting_2cand, ranking_zones_line, ratio_search, rd_worst_instance,
    rd_worst_ratio, replay_bound, right_compress, simplex_audit, spike_as_wpv, spike_cdf,
    spike_three_block_ratio, tight_profile, triangle_audit, vote_profile, votes_of, Action,
    AuditOptions, BorderFraction, CandidateView, Claim1, Claim4, Claim5, ConsistentMap, InputKind,
    Instance, Lottery, Mechanism, MechanismError, Median, MetricSpace, RandomDictator,
    ReducedMechanism, SearchConfig, SearchMetric, Spike, ThreeBlock, UniformRanking, Wpv,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::reports::{
    audit_report_json, bound_report_json, gsp_report_json, json_num, ratio_report_json,
    reduction_check_json, search_report_json, write_json, write_ratio_rows, write_summary, Pass,
    RatioRow, SummaryRow,
};
use crate::scenario::{Scenario, Task};

/// Slack for ratio upper bounds (`<= bound + RATIO_SLACK`).
const RATIO_SLACK: f64 = 1e-9;
/// Tolerance for values that are exact in f64 up to rounding noise.
const EXACT: f64 = 1e-12;
/// Tolerance for the pair-bound optimum.
const PAIR_TOL: f64 = 1e-6;
/// Tolerance for the pair-bound minimizer location.
const MINIMIZER_TOL: f64 = 1e-3;

/// Command-line overrides that beat the corresponding scenario fields.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_step: Option<f64>,
    pub samples: Option<u64>,
}

struct TaskOutput {
    rows: Vec<SummaryRow>,
    ratios: Vec<RatioRow>,
    detail: Value,
    violation: bool,
}

pub fn run_scenario(expected: Task, path: &Path, out_dir: &Path, ov: &Overrides) -> Result<u8> {
    let sc = Scenario::load(path)?;
    if sc.task != expected {
        bail!(
            "scenario {:?} declares task {:?}; run it with the {} subcommand",
            sc.name,
            sc.task.name(),
            sc.task.name()
        );
    }
    let seed = ov.seed.or(sc.seed).unwrap_or(0);
    let output = match sc.task {
        Task::Eval => run_eval(&sc, seed)?,
        Task::Audit => run_audit(&sc, seed, ov.grid_step)?,
        Task::Reduce => run_reduce(&sc, seed)?,
        Task::Lowerbound => run_lowerbound(&sc, seed)?,
        Task::Search => run_search(&sc, seed, ov.samples)?,
        Task::Compress => run_compress(&sc, seed)?,
    };

    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    write_json(&out_dir.join(format!("{}.json", sc.name)), &output.detail)?;
    write_summary(&out_dir.join(format!("{}.summary.csv", sc.name)), &output.rows)?;
    if !output.ratios.is_empty() {
        write_ratio_rows(&out_dir.join(format!("{}.ratios.csv", sc.name)), &output.ratios)?;
    }

    for row in &output.rows {
        println!("{}", row.console_line());
    }
    println!("reports written to {}", out_dir.display());
    Ok(if output.violation { 2 } else { 0 })
}

fn metric_name(inst: &Instance) -> String {
    match &inst.metric {
        MetricSpace::Line => "line".into(),
        MetricSpace::Euclidean(d) => format!("euclidean-{d}"),
        MetricSpace::Explicit(m) => format!("explicit-{}", m.len()),
    }
}

fn build_mechanism(name: &str) -> Result<Box<dyn Mechanism>> {
    mechanism_from_name(name).with_context(|| format!("mechanism {name:?}"))
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn run_eval(sc: &Scenario, seed: u64) -> Result<TaskOutput> {
    let instances = sc.build_instances(seed)?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut results = Vec::new();
    for name in &sc.mechanisms {
        let mech = build_mechanism(name)?;
        for (idx, inst) in instances.iter().enumerate() {
            let id = (idx + 1).to_string();
            let report = approximation_ratio(mech.as_ref(), inst)?;
            let pass = match sc.bound {
                Some(b) => report.ratio <= b + RATIO_SLACK,
                None => report.ratio.is_finite(),
            };
            rows.push(SummaryRow {
                metric: metric_name(inst),
                n: Some(inst.n()),
                m: Some(inst.m()),
                worst_cost: Some(report.worst_cost),
                opt_cost: Some(report.opt_cost),
                ratio: Some(report.ratio),
                bound: sc.bound,
                ..SummaryRow::new(&sc.name, &report.mechanism, Pass::from_bool(pass))
            });
            ratios.push(RatioRow::from_report(&id, &report));
            results.push(json!({
                "instance": id,
                "instance_json": inst.to_json(),
                "report": ratio_report_json(&report),
            }));
        }
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios,
        detail: json!({"scenario": sc.name, "task": "eval", "results": results}),
        violation,
    })
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

fn run_audit(sc: &Scenario, seed: u64, grid_step: Option<f64>) -> Result<TaskOutput> {
    let instances = sc.build_instances(seed)?;
    let opts = AuditOptions {
        grid_step: grid_step.or(sc.grid_step).unwrap_or(AuditOptions::default().grid_step),
        ..AuditOptions::default()
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for name in &sc.mechanisms {
        let mech = build_mechanism(name)?;
        for (idx, inst) in instances.iter().enumerate() {
            let id = (idx + 1).to_string();
            let report = audit_unilateral(mech.as_ref(), inst, &opts)?;
            rows.push(SummaryRow {
                metric: metric_name(inst),
                n: Some(inst.n()),
                m: Some(inst.m()),
                ..SummaryRow::new(&sc.name, name, Pass::from_bool(report.passed()))
            });
            results.push(json!({
                "instance": id,
                "instance_json": inst.to_json(),
                "unilateral": audit_report_json(&report),
            }));
            if sc.group {
                let gsp = audit_gsp(mech.as_ref(), inst, &opts)?;
                rows.push(SummaryRow {
                    metric: metric_name(inst),
                    n: Some(inst.n()),
                    m: Some(inst.m()),
                    ..SummaryRow::new(
                        &sc.name,
                        &format!("{name}:coalitions"),
                        Pass::from_bool(gsp.passed()),
                    )
                });
                results.push(json!({
                    "instance": id,
                    "coalitions": gsp_report_json(&gsp),
                }));
            }
        }
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios: Vec::new(),
        detail: json!({
            "scenario": sc.name,
            "task": "audit",
            "grid_step": opts.grid_step,
            "results": results,
        }),
        violation,
    })
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

fn run_reduce(sc: &Scenario, seed: u64) -> Result<TaskOutput> {
    let to = match sc.lift_to.as_deref() {
        Some("ranking") => InputKind::Ranking,
        Some("location") => InputKind::Location,
        other => bail!("lift_to must be \"ranking\" or \"location\", got {other:?}"),
    };
    let instances = sc.build_instances(seed)?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for name in &sc.mechanisms {
        let target = build_mechanism(name)?;
        let map = match (target.input_kind(), to) {
            (InputKind::Voting, InputKind::Ranking) => ConsistentMap::TopOfRanking,
            (InputKind::Voting, InputKind::Location) => ConsistentMap::FavoriteVote,
            (InputKind::Ranking, InputKind::Location) => ConsistentMap::TrueRanking,
            (from, to) => bail!("cannot lift a {from:?} mechanism to {to:?}"),
        };
        let lifted = lift(Rc::from(build_mechanism(name)?), to)?;
        let lifted_name = lifted.name();
        let check = check_reduction(&lifted, &ReducedMechanism { target, map }, &instances)?;
        rows.push(SummaryRow::new(&sc.name, &lifted_name, Pass::from_bool(check.passed())));
        results.push(json!({
            "mechanism": lifted_name,
            "round_trip": reduction_check_json(&check),
        }));

        if sc.projection {
            if to != InputKind::Location {
                bail!("the zone-projection check needs lift_to = \"location\"");
            }
            let rc: Rc<dyn Mechanism> = Rc::new(lift(Rc::from(build_mechanism(name)?), to)?);
            let projected = project_location_to_ranking(rc.clone())?;
            let check = check_reduction(rc.as_ref(), &projected, &instances)?;
            rows.push(SummaryRow::new(
                &sc.name,
                &format!("{name}:zone-projection"),
                Pass::from_bool(check.passed()),
            ));
            results.push(json!({
                "mechanism": format!("{name}:zone-projection"),
                "projection": reduction_check_json(&check),
            }));
        }
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios: Vec::new(),
        detail: json!({
            "scenario": sc.name,
            "task": "reduce",
            "instances": instances.len(),
            "results": results,
        }),
        violation,
    })
}

// ---------------------------------------------------------------------------
// lowerbound
// ---------------------------------------------------------------------------

fn run_lowerbound(sc: &Scenario, _seed: u64) -> Result<TaskOutput> {
    let family = sc.family.as_deref().unwrap_or_default();
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut results = Vec::new();
    match family {
        "gap" | "simplex" | "triangle" => {
            if sc.mechanisms.is_empty() {
                bail!("lowerbound family {family:?} needs at least one mechanism");
            }
            for name in &sc.mechanisms {
                let mech = build_mechanism(name)?;
                let report = match family {
                    "gap" => gap_audit(mech.as_ref(), sc.eps.unwrap_or(1e-3))?,
                    "simplex" => simplex_audit(mech.as_ref(), sc.dim.unwrap_or(1))?,
                    _ => triangle_audit(mech.as_ref())?,
                };
                let replayed = replay_bound(mech.as_ref(), &report)?;
                let mut pass = (replayed - report.bound).abs() <= EXACT && report.border_equal;
                if let Some(b) = sc.bound {
                    pass &= report.bound >= b - RATIO_SLACK;
                }
                rows.push(SummaryRow {
                    ratio: Some(report.bound),
                    bound: sc.bound,
                    ..SummaryRow::new(&sc.name, &report.mechanism, Pass::from_bool(pass))
                });
                results.push(json!({
                    "report": bound_report_json(&report),
                    "replayed": json_num(replayed),
                }));
            }
        }
        "dictator-worst" => {
            let n = sc.agents.unwrap_or(100);
            let eps = sc.eps.unwrap_or(1e-3);
            let inst = rd_worst_instance(n, eps)?;
            let target = sc.bound.unwrap_or_else(|| rd_worst_ratio(n, eps));
            let names: Vec<String> = if sc.mechanisms.is_empty() {
                vec!["random-dictator".into()]
            } else {
                sc.mechanisms.clone()
            };
            for name in &names {
                let mech = build_mechanism(name)?;
                let report = approximation_ratio(mech.as_ref(), &inst)?;
                let pass = report.ratio >= target - RATIO_SLACK;
                rows.push(SummaryRow {
                    metric: metric_name(&inst),
                    n: Some(inst.n()),
                    m: Some(inst.m()),
                    worst_cost: Some(report.worst_cost),
                    opt_cost: Some(report.opt_cost),
                    ratio: Some(report.ratio),
                    bound: Some(target),
                    ..SummaryRow::new(&sc.name, &report.mechanism, Pass::from_bool(pass))
                });
                ratios.push(RatioRow::from_report("1", &report));
                results.push(json!({
                    "instance_json": inst.to_json(),
                    "report": ratio_report_json(&report),
                }));
            }
        }
        "pair" => {
            let eps = sc.eps.unwrap_or(1e-2);
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=1000u32 {
                let p = f64::from(i) / 1000.0;
                let v = nonstrategic_pair_bound(p, eps)?;
                if v < best.0 {
                    best = (v, p);
                }
            }
            let target = sc.bound.unwrap_or(2.0 - eps / 2.0);
            let pass = (best.0 - target).abs() <= PAIR_TOL
                && (best.1 - 0.5).abs() <= MINIMIZER_TOL;
            rows.push(SummaryRow {
                ratio: Some(best.0),
                bound: Some(target),
                ..SummaryRow::new(&sc.name, "even-coin", Pass::from_bool(pass))
            });
            results.push(json!({
                "eps": eps,
                "minimum": best.0,
                "minimizer": best.1,
                "endpoints": [nonstrategic_pair_bound(0.0, eps)?, nonstrategic_pair_bound(1.0, eps)?],
            }));
        }
        other => bail!(
            "unknown lowerbound family {other:?}; expected gap, simplex, triangle, \
             dictator-worst, or pair"
        ),
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios,
        detail: json!({
            "scenario": sc.name,
            "task": "lowerbound",
            "family": family,
            "results": results,
        }),
        violation,
    })
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

fn run_search(sc: &Scenario, seed: u64, samples: Option<u64>) -> Result<TaskOutput> {
    let cfg = SearchConfig {
        samples: samples.or(sc.samples).unwrap_or(200),
        seed,
        max_agents: sc.max_agents.unwrap_or(8),
        max_candidates: sc.max_candidates.unwrap_or(6),
        coords: sc.coords.unwrap_or((-10.0, 10.0)),
        metric: if sc.explicit_metric { SearchMetric::Explicit } else { SearchMetric::Line },
        fixed_candidates: sc.fixed_candidates.clone(),
        gap_probes: sc.gap_probes,
    };
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut results = Vec::new();
    for name in &sc.mechanisms {
        let mech = build_mechanism(name)?;
        if cfg.samples == 0 {
            rows.push(SummaryRow {
                bound: sc.bound,
                ..SummaryRow::new(&sc.name, &mech.name(), Pass::Skipped)
            });
            results.push(json!({"mechanism": mech.name(), "skipped": true}));
            continue;
        }
        let report = ratio_search(mech.as_ref(), &cfg)?;
        match &report.best {
            Some(best) => {
                let id = match best.sample {
                    Some(s) => format!("sample-{s}/{}", best.probe),
                    None => format!("probe/{}", best.probe),
                };
                let pass = match sc.bound {
                    Some(b) => best.report.ratio <= b + RATIO_SLACK,
                    None => best.report.ratio.is_finite(),
                };
                rows.push(SummaryRow {
                    metric: metric_name(&best.instance),
                    n: Some(best.instance.n()),
                    m: Some(best.instance.m()),
                    worst_cost: Some(best.report.worst_cost),
                    opt_cost: Some(best.report.opt_cost),
                    ratio: Some(best.report.ratio),
                    bound: sc.bound,
                    ..SummaryRow::new(&sc.name, &report.mechanism, Pass::from_bool(pass))
                });
                ratios.push(RatioRow::from_report(&id, &best.report));
            }
            None => {
                rows.push(SummaryRow {
                    bound: sc.bound,
                    ..SummaryRow::new(&sc.name, &report.mechanism, Pass::Skipped)
                });
            }
        }
        results.push(search_report_json(&report));
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios,
        detail: json!({
            "scenario": sc.name,
            "task": "search",
            "seed": seed,
            "samples": cfg.samples,
            "results": results,
        }),
        violation,
    })
}

// ---------------------------------------------------------------------------
// compress
// ---------------------------------------------------------------------------

/// Agents of a collapsed profile, grouped by exact shared position.
fn grouped_agents(inst: &Instance) -> Vec<Value> {
    let mut xs: Vec<f64> = inst.agents.iter().map(|p| p.x()).collect();
    xs.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        groups.push(json!({"position": xs[i], "count": j - i}));
        i = j;
    }
    groups
}

fn stage_json(step: &str, inst: &Instance) -> Value {
    json!({
        "step": step,
        "groups": grouped_agents(inst),
        "instance": inst.to_json(),
    })
}

fn run_compress(sc: &Scenario, seed: u64) -> Result<TaskOutput> {
    let instances = sc.build_instances(seed)?;
    let bound = sc.bound.unwrap_or(2.0);
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let id = (idx + 1).to_string();
        let tight = tight_profile(inst)?;
        let mut stages = vec![stage_json("tight", &tight)];
        let mut cur = tight;
        loop {
            if let Some(next) = left_compress(&cur)? {
                cur = next;
                stages.push(stage_json("left", &cur));
                continue;
            }
            if let Some(next) = right_compress(&cur)? {
                cur = next;
                stages.push(stage_json("right", &cur));
                continue;
            }
            break;
        }
        let (_, tb) = mechlab::compress_fully(inst)?;
        let ratio = spike_three_block_ratio(&tb)?;
        rows.push(SummaryRow {
            metric: metric_name(inst),
            n: Some(inst.n()),
            m: Some(inst.m()),
            ratio: Some(ratio),
            bound: Some(bound),
            ..SummaryRow::new(&sc.name, "spike", Pass::from_bool(ratio <= bound + RATIO_SLACK))
        });
        results.push(json!({
            "instance": id,
            "instance_json": inst.to_json(),
            "stages": stages,
            "three_block": {
                "left": tb.left,
                "center": tb.center,
                "right": tb.right,
                "beta": tb.beta,
            },
            "closed_form_ratio": json_num(ratio),
        }));
    }
    let violation = rows.iter().any(|r| r.pass.failed());
    Ok(TaskOutput {
        rows,
        ratios: Vec::new(),
        detail: json!({"scenario": sc.name, "task": "compress", "results": results}),
        violation,
    })
}

// ---------------------------------------------------------------------------
// repro-all
// ---------------------------------------------------------------------------

struct ReproRow {
    claim: &'static str,
    bound: f64,
    /// `None` means the row was skipped (searches with `--samples 0`).
    achieved: Option<f64>,
    pass: Pass,
}

fn upper_row(claim: &'static str, bound: f64, achieved: Option<f64>) -> ReproRow {
    let pass = match achieved {
        Some(a) => Pass::from_bool(a <= bound + RATIO_SLACK),
        None => Pass::Skipped,
    };
    ReproRow { claim, bound, achieved, pass }
}

fn exact_row(claim: &'static str, bound: f64, achieved: f64, tol: f64, extra_ok: bool) -> ReproRow {
    ReproRow {
        claim,
        bound,
        achieved: Some(achieved),
        pass: Pass::from_bool((achieved - bound).abs() <= tol && extra_ok),
    }
}

fn zero_row(claim: &'static str, violations: u64, extra_ok: bool) -> ReproRow {
    ReproRow {
        claim,
        bound: 0.0,
        achieved: Some(violations as f64),
        pass: Pass::from_bool(violations == 0 && extra_ok),
    }
}

fn random_line(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Instance {
    let ys: Vec<f64> = loop {
        let m = rng.random_range(2..=max_m);
        let mut ys: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        ys.sort_by(f64::total_cmp);
        if ys.windows(2).all(|w| w[0] < w[1]) {
            break ys;
        }
    };
    let n = rng.random_range(1..=max_n);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    Instance::line(&ys, &xs).expect("sampled instances are valid")
}

/// The anti-dictator draw of the two-candidate mixed rule: elects the
/// opposite of one fixed agent's vote. Used to show the mixture's truthful
/// expectation does not survive realization.
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

    fn evaluate(&self, view: &CandidateView, profile: &[Action]) -> Result<Lottery, MechanismError> {
        let votes = votes_of(profile, view.m())?;
        Ok(Lottery::point_mass(1 - votes[self.agent], 2))
    }
}

pub fn repro_all(samples: u64, seed: u64, grid_step: f64, out: Option<&Path>) -> Result<u8> {
    let mut rows: Vec<ReproRow> = Vec::new();

    // Randomized ratio searches with tighten/compress probes.
    let search = |mech: &dyn Mechanism, metric: SearchMetric, gap: bool| -> Result<Option<f64>> {
        if samples == 0 {
            return Ok(None);
        }
        let cfg = SearchConfig {
            samples,
            seed,
            max_agents: 16,
            max_candidates: 6,
            coords: (-10.0, 10.0),
            metric,
            fixed_candidates: None,
            gap_probes: gap,
        };
        Ok(ratio_search(mech, &cfg)?.best.map(|b| b.report.ratio))
    };

    rows.push(upper_row("spike-search", 2.0, search(&Spike, SearchMetric::Line, true)?));

    let eps = 1e-3;
    let gap = gap_audit(&Spike, eps)?;
    let replayed = replay_bound(&Spike, &gap)?;
    rows.push(exact_row(
        "spike-gap",
        gap_randomized_bound(eps),
        gap.bound,
        RATIO_SLACK,
        gap.border_equal && (replayed - gap.bound).abs() <= EXACT,
    ));

    // Symmetry of the cumulative vote weight; an off-by-one in either
    // branch shows up here immediately.
    let mut asymmetry: f64 = 0.0;
    for n in 1..=64u32 {
        for t in 0..=n {
            let f = spike_cdf(f64::from(t), f64::from(n));
            let mirror = spike_cdf(f64::from(n - t), f64::from(n));
            asymmetry = asymmetry.max((f + mirror - 1.0).abs());
        }
    }
    rows.push(ReproRow {
        claim: "spike-cdf-symmetry",
        bound: 0.0,
        achieved: Some(asymmetry),
        pass: Pass::from_bool(asymmetry <= EXACT),
    });

    // Exhaustive three-block sweep: bounded by 2 everywhere, equal to 2 on
    // the pinned equality region.
    let betas: Vec<f64> = (-6..=6).map(|k| 2f64.powi(k)).collect();
    let mut sweep_max: f64 = 0.0;
    let mut equality_misses = 0u64;
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
                    let ratio = spike_three_block_ratio(&tb)?;
                    sweep_max = sweep_max.max(ratio);
                    if median_center && l >= 1 && r >= 1 && (ratio - 2.0).abs() > RATIO_SLACK {
                        equality_misses += 1;
                    }
                }
            }
        }
    }
    rows.push(ReproRow {
        claim: "three-block-sweep",
        bound: 2.0,
        achieved: Some(sweep_max),
        pass: Pass::from_bool(sweep_max <= 2.0 + RATIO_SLACK && equality_misses == 0),
    });

    rows.push(upper_row("median-search", 3.0, search(&Median, SearchMetric::Line, true)?));

    let med_gap = gap_audit(&Median, eps)?;
    rows.push(exact_row(
        "median-gap",
        gap_deterministic_bound(eps),
        med_gap.bound,
        RATIO_SLACK,
        true,
    ));

    let worst = rd_worst_instance(100, eps)?;
    let report = approximation_ratio(&RandomDictator, &worst)?;
    rows.push(exact_row(
        "dictator-worst",
        rd_worst_ratio(100, eps),
        report.ratio,
        RATIO_SLACK,
        true,
    ));

    rows.push(upper_row(
        "dictator-explicit-search",
        3.0,
        search(&RandomDictator, SearchMetric::Explicit, false)?,
    ));

    for (claim, d) in
        [("simplex-audit-d1", 1usize), ("simplex-audit-d2", 2), ("simplex-audit-d3", 3)]
    {
        let report = simplex_audit(&RandomDictator, d)?;
        let target = 3.0 - 2.0 / (d as f64 + 1.0);
        rows.push(exact_row(claim, target, report.bound, EXACT, report.border_equal));
    }

    let tri = triangle_audit(&UniformRanking)?;
    rows.push(exact_row("triangle-audit", 7.0 / 3.0, tri.bound, EXACT, tri.border_equal));

    // The even coin is optimal among fixed coins on the near-tied pair.
    let pair_eps = 1e-2;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=1000u32 {
        let p = f64::from(i) / 1000.0;
        let v = nonstrategic_pair_bound(p, pair_eps)?;
        if v < best.0 {
            best = (v, p);
        }
    }
    rows.push(exact_row(
        "pair-coin-optimum",
        2.0 - pair_eps / 2.0,
        best.0,
        PAIR_TOL,
        (best.1 - 0.5).abs() <= MINIMIZER_TOL,
    ));

    rows.push(zero_row("percentile-truthfulness", percentile_violations()?, true));

    rows.push(location_tie_row(grid_step)?);
    rows.push(ranking_zone_row()?);
    rows.push(vote_mix_row()?);
    rows.push(dictator_coalition_row()?);
    rows.push(zero_row("compression-sweep", compression_violations(seed)?, true));
    rows.push(zero_row("reduction-roundtrips", reduction_violations(seed)?, true));

    print_table(&rows);
    let failures = rows.iter().filter(|r| r.pass.failed()).count();
    if failures == 0 {
        println!("repro-all: {} rows, all pass", rows.len());
    } else {
        println!("repro-all: {} rows, {failures} FAILED", rows.len());
    }

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let path = dir.join("repro-all.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["claim", "bound", "achieved", "pass"])?;
        for r in &rows {
            w.write_record([
                r.claim,
                &r.bound.to_string(),
                &r.achieved.map(|a| a.to_string()).unwrap_or_default(),
                &r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        println!("table written to {}", path.display());
    }

    Ok(if failures > 0 { 2 } else { 0 })
}

fn print_table(rows: &[ReproRow]) {
    println!("claim | bound | achieved | pass");
    for r in rows {
        let achieved = r.achieved.map(|a| a.to_string()).unwrap_or_else(|| "skipped".into());
        println!("{} | {} | {} | {}", r.claim, r.bound, achieved, r.pass);
    }
}

/// Every percentile position is unilaterally truthful on the full small
/// grid: agents and candidates on the integers -4..=4, n, m <= 3.
fn percentile_violations() -> Result<u64> {
    let grid: Vec<f64> = (-4..=4).map(f64::from).collect();
    let opts = AuditOptions::default();
    let mut violations = 0u64;
    for m in 1..=3usize {
        for cands in grid.iter().copied().combinations(m) {
            for n in 1..=3usize {
                for agents in grid.iter().copied().combinations_with_replacement(n) {
                    let inst = Instance::line(&cands, &agents)?;
                    for report in audit_all_percentiles(&inst, &opts)? {
                        violations += report.violations.len() as u64;
                    }
                }
            }
        }
    }
    Ok(violations)
}

/// The three-candidate location rule is truthful in expectation on a fine
/// grid yet separates two reports inside one ranking zone.
fn location_tie_row(grid_step: f64) -> Result<ReproRow> {
    let opts = AuditOptions { grid_step, ..AuditOptions::default() };
    let agent_sets: [&[f64]; 5] =
        [&[0.75, 1.25], &[0.5, 2.0, 3.9], &[1.0, 3.5], &[0.0, 4.0], &[1.0, 1.0]];
    let mut violations = 0u64;
    for agents in agent_sets {
        let inst = Instance::line(&[0.0, 3.0, 4.0], agents)?;
        violations += audit_unilateral(&Claim4, &inst, &opts)?.violations.len() as u64;
    }
    let inst = Instance::line(&[0.0, 3.0, 4.0], &[0.75])?;
    let view = CandidateView::of(&inst);
    let low = Claim4.evaluate(&view, &line_profile(&[0.75]))?;
    let high = Claim4.evaluate(&view, &line_profile(&[1.25]))?;
    let zones = ranking_zones_line(&inst.candidates)?;
    let same_zone = zones.zone_containing(0.75).ranking == zones.zone_containing(1.25).ranking;
    Ok(zero_row("location-tie-grid", violations, low != high && same_zone))
}

/// The two-agent ranking rule is truthful yet distinguishes two rankings
/// with the same top choice.
fn ranking_zone_row() -> Result<ReproRow> {
    let cands = [0.0, 2.0, 5.0];
    let mut violations = 0u64;
    for agents in [[-1.0, 1.5], [0.5, 3.0], [2.7, 4.5], [1.2, 3.8]] {
        let inst = Instance::line(&cands, &agents)?;
        violations +=
            audit_unilateral(&Claim1, &inst, &AuditOptions::default())?.violations.len() as u64;
    }
    let inst = Instance::line(&cands, &[0.5, 1.5])?;
    let view = CandidateView::of(&inst);
    let zones = ranking_zones_line(&inst.candidates)?;
    let rank = |z: usize| Action::Ranking(zones.zones[z].ranking.clone());
    let near = Claim1.evaluate(&view, &[rank(0), rank(1)])?;
    let far = Claim1.evaluate(&view, &[rank(0), rank(2)])?;
    let same_top = zones.zones[1].ranking[0] == zones.zones[2].ranking[0];
    Ok(zero_row("ranking-zone-dsic", violations, near != far && same_top))
}

/// The mixed two-candidate rule is truthful in expectation while its
/// anti-dictator draw is manipulable.
fn vote_mix_row() -> Result<ReproRow> {
    let mut violations = 0u64;
    for agents in [[-0.3, 0.8], [-1.0, 1.0], [0.2, -0.9]] {
        let inst = Instance::line(&[-1.0, 1.0], &agents)?;
        violations +=
            audit_unilateral(&Claim5, &inst, &AuditOptions::default())?.violations.len() as u64;
    }
    let inst = Instance::line(&[-1.0, 1.0], &[-0.3, 0.8])?;
    let anti = AntiDictator { agent: 0 };
    let draw_manipulable =
        !audit_unilateral(&anti, &inst, &AuditOptions::default())?.passed();
    Ok(zero_row("vote-mix-tie", violations, draw_manipulable))
}

/// The uniform dictator is not coalition-proof: both center agents drop
/// their expected cost from 1 to 0.51 by voting for the middle candidate.
fn dictator_coalition_row() -> Result<ReproRow> {
    let inst = Instance::line(&[-1.0, 0.0, 1.0], &[-0.51, 0.51])?;
    let gsp = audit_gsp(&RandomDictator, &inst, &AuditOptions::default())?;
    let violation = gsp
        .violations
        .iter()
        .find(|v| v.coalition == vec![0, 1] && v.deviated == vote_profile(&[1, 1]));
    let (achieved, ok) = match violation {
        Some(v) => (
            v.costs_deviating[0],
            v.costs_truthful == vec![1.0, 1.0] && v.costs_deviating == vec![0.51, 0.51],
        ),
        None => (f64::NAN, false),
    };
    Ok(ReproRow {
        claim: "dictator-coalition",
        bound: 0.51,
        achieved: Some(achieved),
        pass: Pass::from_bool(ok),
    })
}

/// Desk-scale sweep of the collapse pipeline: the optimum survives
/// tightening, tightening never lowers the outward-vote ratio, flank
/// compression costs the spike rule at most twice what it saves the
/// optimum, and border agents weakly prefer the outward vote.
fn compression_violations(seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC11);
    let mut bad = 0u64;

    let outward_ratio = |rule: &Wpv, inst: &Instance| -> Result<f64> {
        let votes = outward_votes(inst)?;
        let lot = rule.evaluate(&CandidateView::of(inst), &votes)?;
        let cost = lottery_cost(inst, &lot)?;
        let opt = optimal_candidate(inst)?.1;
        Ok(if opt > 0.0 {
            cost / opt
        } else if cost > 0.0 {
            f64::INFINITY
        } else {
            1.0
        })
    };

    for _ in 0..1000 {
        let inst = random_line(&mut rng, 8, 5);
        let n = inst.n();
        let tight = tight_profile(&inst)?;
        if optimal_candidate(&inst)?.0 != optimal_candidate(&tight)?.0 {
            bad += 1;
        }

        let mut rules = vec![
            spike_as_wpv(n),
            Wpv::new(onehot(n, n.div_ceil(2) - 1))?,
            Wpv::new(vec![1.0 / n as f64; n])?,
        ];
        for _ in 0..2 {
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            rules.push(Wpv::new(w)?);
        }

        for rule in &rules {
            if outward_ratio(rule, &tight)? < outward_ratio(rule, &inst)? - RATIO_SLACK {
                bad += 1;
            }
        }

        let spike_lottery =
            Spike.evaluate(&CandidateView::of(&tight), &outward_votes(&tight)?)?;
        for compressed in [left_compress(&tight)?, right_compress(&tight)?].into_iter().flatten() {
            let diff = lottery_cost(&tight, &spike_lottery)?
                - lottery_cost(&compressed, &spike_lottery)?;
            let delta = optimal_candidate(&tight)?.1 - optimal_candidate(&compressed)?.1;
            if diff > 2.0 * delta + RATIO_SLACK {
                bad += 1;
            }
        }

        let outward = outward_votes(&tight)?;
        let view = CandidateView::of(&tight);
        for (i, x) in tight.agents.iter().enumerate() {
            let favs = favorite_candidates(&tight.metric, &tight.candidates, x)?;
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
                let cost_out = lottery_cost(&tight, &rule.evaluate(&view, &outward)?)?;
                let cost_in = lottery_cost(&tight, &rule.evaluate(&view, &inward)?)?;
                if cost_out < cost_in - RATIO_SLACK {
                    bad += 1;
                }
            }
        }
    }
    Ok(bad)
}

fn onehot(n: usize, k: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    w[k] = 1.0;
    w
}

/// Desk-scale reduction checks: lift round-trips, ranking-zone projections,
/// and the border-fraction family's monotonicity and weight recovery.
fn reduction_violations(seed: u64) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC12);
    let instances: Vec<Instance> = (0..200).map(|_| random_line(&mut rng, 4, 4)).collect();
    let mut bad = 0u64;

    let roundtrip = |target: Box<dyn Mechanism>,
                         rc: Rc<dyn Mechanism>,
                         to: InputKind,
                         map: ConsistentMap|
     -> Result<u64> {
        let lifted = lift(rc, to)?;
        let check = check_reduction(&lifted, &ReducedMechanism { target, map }, &instances)?;
        Ok(check.mismatches.len() as u64)
    };
    bad += roundtrip(
        Box::new(Spike),
        Rc::new(Spike),
        InputKind::Ranking,
        ConsistentMap::TopOfRanking,
    )?;
    bad += roundtrip(
        Box::new(Spike),
        Rc::new(Spike),
        InputKind::Location,
        ConsistentMap::FavoriteVote,
    )?;
    bad += roundtrip(
        Box::new(Median),
        Rc::new(Median),
        InputKind::Location,
        ConsistentMap::FavoriteVote,
    )?;

    for rc in [
        Rc::new(lift(Rc::new(Spike), InputKind::Location)?) as Rc<dyn Mechanism>,
        Rc::new(lift(Rc::new(Median), InputKind::Location)?) as Rc<dyn Mechanism>,
    ] {
        let projected = project_location_to_ranking(rc.clone())?;
        bad += check_reduction(rc.as_ref(), &projected, &instances)?.mismatches.len() as u64;
    }

    let base = Instance::line(&[-1.0, 1.0], &[0.0])?;
    let view = CandidateView::of(&base);
    for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let rule = BorderFraction::new(gamma)?;
        for n1 in 0..=8usize {
            for n2 in 0..=(8 - n1) {
                for n3 in 0..=(8 - n1 - n2) {
                    if n1 + n2 + n3 == 0 {
                        continue;
                    }
                    let p_of = |tied_at: f64| -> Result<f64> {
                        let mut xs = vec![-0.8; n1];
                        xs.extend(std::iter::repeat(tied_at).take(n2));
                        xs.extend(std::iter::repeat(0.6).take(n3));
                        Ok(rule.evaluate(&view, &line_profile(&xs))?.prob(0))
                    };
                    let p1 = p_of(0.0)?;
                    let p2 = p_of(-0.5)?;
                    let p3 = p_of(0.5)?;
                    if !(p3 <= p1 + EXACT && p1 <= p2 + EXACT) {
                        bad += 1;
                    }
                }
            }
        }
        let projected =
            project_location_to_voting_2cand(Rc::new(BorderFraction::new(gamma)?), &view)?;
        match projected.map {
            ConsistentMap::BorderQMix { q } if (q - gamma).abs() <= RATIO_SLACK => {}
            _ => bad += 1,
        }
    }
    Ok(bad)
}
