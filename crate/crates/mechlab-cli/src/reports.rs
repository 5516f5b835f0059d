//! Report files: a fixed-column CSV summary, per-instance ratio rows, and
//! JSON detail reports. All indices in reports are 1-based (candidate 1 is
//! the leftmost on the line, agent 1 is the first listed); non-finite
//! ratios are spelled out as `"inf"` / `"nan"` strings so the JSON stays
//! parseable everywhere.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mechlab::{
    Action, AuditReport, BoundAudit, BoundReport, GspReport, Point, RatioReport, ReductionCheck,
    SearchReport,
};
use serde_json::{json, Value};

/// `*.summary.csv` column order; fixed so CI artifacts diff cleanly.
pub const SUMMARY_COLUMNS: [&str; 10] = [
    "scenario",
    "mechanism",
    "metric",
    "n",
    "m",
    "worst_cost",
    "opt_cost",
    "ratio",
    "bound",
    "pass",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Yes,
    No,
    Skipped,
}

impl Pass {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Pass::Yes
        } else {
            Pass::No
        }
    }

    pub fn failed(self) -> bool {
        self == Pass::No
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pass::Yes => write!(f, "yes"),
            Pass::No => write!(f, "no"),
            Pass::Skipped => write!(f, "skipped"),
        }
    }
}

/// One row of the fixed-column summary. Fields that do not apply to the
/// task at hand stay empty in the CSV.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub scenario: String,
    pub mechanism: String,
    pub metric: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub worst_cost: Option<f64>,
    pub opt_cost: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub pass: Pass,
}

impl SummaryRow {
    /// Row skeleton with every optional column empty.
    pub fn new(scenario: &str, mechanism: &str, pass: Pass) -> Self {
        SummaryRow {
            scenario: scenario.to_string(),
            mechanism: mechanism.to_string(),
            metric: String::new(),
            n: None,
            m: None,
            worst_cost: None,
            opt_cost: None,
            ratio: None,
            bound: None,
            pass,
        }
    }

    /// The one-line stdout rendering of the row.
    pub fn console_line(&self) -> String {
        let mut line = format!("{}/{}", self.scenario, self.mechanism);
        if !self.metric.is_empty() {
            line.push_str(&format!(" [{}", self.metric));
            if let (Some(n), Some(m)) = (self.n, self.m) {
                line.push_str(&format!(" n={n} m={m}"));
            }
            line.push(']');
        }
        if let Some(r) = self.ratio {
            line.push_str(&format!(" ratio={r}"));
        }
        if let Some(b) = self.bound {
            line.push_str(&format!(" bound={b}"));
        }
        line.push_str(&format!(" -> {}", self.pass));
        line
    }
}

/// One per-instance ratio row: instance-id, mechanism, worst_cost,
/// opt_cost, opt_candidate (1-based), ratio.
#[derive(Debug, Clone)]
pub struct RatioRow {
    pub instance_id: String,
    pub mechanism: String,
    pub worst_cost: f64,
    pub opt_cost: f64,
    /// Already 1-based.
    pub opt_candidate: usize,
    pub ratio: f64,
}

impl RatioRow {
    pub fn from_report(instance_id: &str, report: &RatioReport) -> Self {
        RatioRow {
            instance_id: instance_id.to_string(),
            mechanism: report.mechanism.clone(),
            worst_cost: report.worst_cost,
            opt_cost: report.opt_cost,
            opt_candidate: report.opt_candidate + 1,
            ratio: report.ratio,
        }
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            r.mechanism.as_str(),
            r.metric.as_str(),
            &opt_usize(r.n),
            &opt_usize(r.m),
            &opt_num(r.worst_cost),
            &opt_num(r.opt_cost),
            &opt_num(r.ratio),
            &opt_num(r.bound),
            &r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ratio_rows(path: &Path, rows: &[RatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(["instance-id", "mechanism", "worst_cost", "opt_cost", "opt_candidate", "ratio"])?;
    for r in rows {
        w.write_record([
            r.instance_id.as_str(),
            r.mechanism.as_str(),
            &r.worst_cost.to_string(),
            &r.opt_cost.to_string(),
            &r.opt_candidate.to_string(),
            &r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// A float as a JSON value that survives infinities and NaN.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// An action in report form: candidate indices shifted to 1-based,
/// locations kept verbatim.
pub fn action_json(action: &Action) -> Value {
    match action {
        Action::Vote(j) => json!({"vote": j + 1}),
        Action::Ranking(r) => json!({"ranking": r.iter().map(|j| j + 1).collect::<Vec<_>>()}),
        Action::Location(Point::Coords(c)) => json!({"location": c}),
        Action::Location(Point::Index(i)) => json!({"location_index": i}),
    }
}

pub fn profile_json(profile: &[Action]) -> Value {
    Value::Array(profile.iter().map(action_json).collect())
}

pub fn ratio_report_json(report: &RatioReport) -> Value {
    json!({
        "mechanism": report.mechanism,
        "worst_cost": report.worst_cost,
        "opt_cost": report.opt_cost,
        "opt_candidate": report.opt_candidate + 1,
        "ratio": json_num(report.ratio),
        "witness": profile_json(&report.witness),
    })
}

pub fn audit_report_json(report: &AuditReport) -> Value {
    json!({
        "mechanism": report.mechanism,
        "checks": report.checks,
        "violations": report.violations.iter().map(|v| json!({
            "agent": v.agent + 1,
            "truthful": profile_json(&v.truthful),
            "deviation": action_json(&v.deviation),
            "cost_truthful": v.cost_truthful,
            "cost_deviating": v.cost_deviating,
        })).collect::<Vec<_>>(),
    })
}

pub fn gsp_report_json(report: &GspReport) -> Value {
    json!({
        "mechanism": report.mechanism,
        "checks": report.checks,
        "violations": report.violations.iter().map(|v| json!({
            "coalition": v.coalition.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "truthful": profile_json(&v.truthful),
            "deviated": profile_json(&v.deviated),
            "costs_truthful": v.costs_truthful,
            "costs_deviating": v.costs_deviating,
        })).collect::<Vec<_>>(),
    })
}

pub fn reduction_check_json(check: &ReductionCheck) -> Value {
    json!({
        "profiles_checked": check.profiles_checked,
        "max_gap": check.max_gap,
        "mismatches": check.mismatches.len(),
    })
}

pub fn bound_report_json(report: &BoundReport) -> Value {
    let audit = match &report.audit {
        BoundAudit::GapPair { eps, votes, instances, ratios } => json!({
            "construction": "gap-pair",
            "eps": eps,
            "votes": profile_json(votes),
            "instances": [instances.0.to_json(), instances.1.to_json()],
            "ratios": [json_num(ratios.0), json_num(ratios.1)],
        }),
        BoundAudit::Simplex { dim, j_star, j_low, chain, witness } => json!({
            "construction": "simplex",
            "dim": dim,
            "j_star": j_star + 1,
            "j_low": j_low + 1,
            "chain": [profile_json(&chain.0), profile_json(&chain.1)],
            "witness": witness.to_json(),
        }),
        BoundAudit::Triangle { chain, witness } => json!({
            "construction": "triangle",
            "chain": chain.iter().map(|p| profile_json(p)).collect::<Vec<_>>(),
            "witness": witness.to_json(),
        }),
    };
    json!({
        "mechanism": report.mechanism,
        "bound": json_num(report.bound),
        "border_equal": report.border_equal,
        "audit": audit,
    })
}

pub fn search_report_json(report: &SearchReport) -> Value {
    let best = report.best.as_ref().map(|rec| {
        json!({
            "sample": rec.sample,
            "probe": rec.probe,
            "instance": rec.instance.to_json(),
            "report": ratio_report_json(&rec.report),
        })
    });
    json!({
        "mechanism": report.mechanism,
        "samples": report.samples,
        "evaluations": report.evaluations,
        "best": best,
    })
}
