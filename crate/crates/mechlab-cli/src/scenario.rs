//! Scenario files: the JSON schema the CLI consumes, validated and turned
//! into library instances. A scenario names a task, the mechanisms to run,
//! and an instance source — inline instance JSON, a named generator, or
//! both.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mechlab::{rd_worst_instance, three_block_instance, Instance, ThreeBlock};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Eval,
    Audit,
    Reduce,
    Lowerbound,
    Search,
    Compress,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Eval => "eval",
            Task::Audit => "audit",
            Task::Reduce => "reduce",
            Task::Lowerbound => "lowerbound",
            Task::Search => "search",
            Task::Compress => "compress",
        }
    }
}

/// Instance generators that scenario files may name instead of (or along
/// with) inline instances.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Generator {
    /// The near-tied two-candidate pair sharing one truthful vote profile.
    GapPair { eps: f64 },
    /// `n - 1` agents on the left candidate, one outlier just right of
    /// center — the uniform-dictator rule's worst case.
    DictatorWorst { n: usize, eps: f64 },
    /// An already-collapsed three-block profile with the given block sizes
    /// and border scale.
    ThreeBlock { left: usize, center: usize, right: usize, beta: f64 },
    /// Seeded uniform line instances: sorted distinct candidates and
    /// unconstrained agents inside `coords` (default (-10, 10)).
    RandomLine {
        count: u32,
        max_agents: usize,
        max_candidates: usize,
        #[serde(default)]
        coords: Option<(f64, f64)>,
    },
}

/// A parsed scenario file. Fields that a task does not use are ignored by
/// that task; unknown fields are rejected outright.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub task: Task,
    #[serde(default)]
    pub mechanisms: Vec<String>,
    #[serde(default)]
    pub instances: Vec<serde_json::Value>,
    #[serde(default)]
    pub generator: Option<Generator>,
    /// Seed for seeded generators and searches; the `--seed` flag wins.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Pass threshold for ratio rows (eval, search, lowerbound).
    #[serde(default)]
    pub bound: Option<f64>,
    /// Location-deviation grid spacing for audits; the `--grid-step` flag wins.
    #[serde(default)]
    pub grid_step: Option<f64>,
    /// Audit task: also run the coalition audit (voting rules, n <= 6).
    #[serde(default)]
    pub group: bool,
    /// Search task: number of random instances; the `--samples` flag wins.
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub max_agents: Option<usize>,
    #[serde(default)]
    pub max_candidates: Option<usize>,
    #[serde(default)]
    pub coords: Option<(f64, f64)>,
    /// Search task: sample random explicit metrics instead of the line.
    #[serde(default)]
    pub explicit_metric: bool,
    /// Search task: pin the candidate locations, randomize only agents.
    #[serde(default)]
    pub fixed_candidates: Option<Vec<f64>>,
    /// Search task: append the near-tied pair as deterministic probes.
    #[serde(default)]
    pub gap_probes: bool,
    /// Reduce task: lift target, `"ranking"` or `"location"`.
    #[serde(default)]
    pub lift_to: Option<String>,
    /// Reduce task: also check the ranking-zone projection of the lift.
    #[serde(default)]
    pub projection: bool,
    /// Lowerbound task: `gap`, `simplex`, `triangle`, `dictator-worst`, or
    /// `pair`.
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Lowerbound task (`dictator-worst`): number of agents.
    #[serde(default)]
    pub agents: Option<usize>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        let sc: Scenario = serde_json::from_str(&text)
            .with_context(|| format!("{} does not match the scenario schema", path.display()))?;
        sc.validate()?;
        Ok(sc)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
        {
            bail!("scenario name {:?} must be nonempty and use only [A-Za-z0-9._-]", self.name);
        }
        let needs_instances = matches!(self.task, Task::Eval | Task::Audit | Task::Compress)
            || (self.task == Task::Reduce);
        if needs_instances && self.instances.is_empty() && self.generator.is_none() {
            bail!("task {:?} needs inline instances or a generator", self.task.name());
        }
        let needs_mechanisms =
            matches!(self.task, Task::Eval | Task::Audit | Task::Reduce | Task::Search);
        if needs_mechanisms && self.mechanisms.is_empty() {
            bail!("task {:?} needs at least one mechanism", self.task.name());
        }
        if self.task == Task::Reduce && self.lift_to.is_none() {
            bail!("task \"reduce\" needs \"lift_to\": \"ranking\" or \"location\"");
        }
        if self.task == Task::Lowerbound && self.family.is_none() {
            bail!(
                "task \"lowerbound\" needs \"family\": one of gap, simplex, triangle, \
                 dictator-worst, pair"
            );
        }
        Ok(())
    }

    /// All instances the scenario provides: inline ones first, generated
    /// ones after.
    pub fn build_instances(&self, seed: u64) -> Result<Vec<Instance>> {
        let mut out = Vec::new();
        for (i, value) in self.instances.iter().enumerate() {
            let inst = Instance::from_json_str(&value.to_string())
                .with_context(|| format!("inline instance #{}", i + 1))?;
            out.push(inst);
        }
        if let Some(gen) = &self.generator {
            out.extend(generate(gen, seed)?);
        }
        Ok(out)
    }
}

fn generate(gen: &Generator, seed: u64) -> Result<Vec<Instance>> {
    match gen {
        Generator::GapPair { eps } => {
            if !(*eps > 0.0 && *eps < 1.0) {
                bail!("gap-pair eps must lie strictly in (0, 1)");
            }
            let (a, b) = mechlab::gap_instances(*eps);
            Ok(vec![a, b])
        }
        Generator::DictatorWorst { n, eps } => Ok(vec![rd_worst_instance(*n, *eps)?]),
        Generator::ThreeBlock { left, center, right, beta } => {
            let tb = ThreeBlock { left: *left, center: *center, right: *right, beta: *beta };
            Ok(vec![three_block_instance(&tb)?])
        }
        Generator::RandomLine { count, max_agents, max_candidates, coords } => {
            let (lo, hi) = coords.unwrap_or((-10.0, 10.0));
            if !(lo < hi) || *max_candidates < 2 || *max_agents == 0 {
                bail!("random-line needs coords.0 < coords.1, max_candidates >= 2, max_agents >= 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*count).map(|_| random_line(&mut rng, *max_agents, *max_candidates, lo, hi)).collect()
        }
    }
}

fn random_line(
    rng: &mut ChaCha8Rng,
    max_agents: usize,
    max_candidates: usize,
    lo: f64,
    hi: f64,
) -> Result<Instance> {
    let m = rng.random_range(2..=max_candidates);
    let mut cands = Vec::with_capacity(m);
    while cands.len() < m {
        let y: f64 = rng.random_range(lo..hi);
        if cands.iter().all(|&c: &f64| c != y) {
            cands.push(y);
        }
    }
    cands.sort_by(f64::total_cmp);
    let n = rng.random_range(1..=max_agents);
    let agents: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    Ok(Instance::line(&cands, &agents)?)
}
