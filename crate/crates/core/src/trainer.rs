//! Incremental training over a suite of instances, and run reports.
//!
//! Instances are visited smallest first. An instance the current policy
//! already handles in simulation is skipped; otherwise it joins the training
//! set and a new policy is learned by sweeping the feature complexity up to
//! `c_max`, each improvement bounding the cost of the next.

use crate::deadend::label_model;
use crate::features::{FeatureError, PoolConfig, DEFAULT_POOL_CAP};
use crate::learner::{learn_policy, pool_for, LearnError, LearnOptions, Mode, TrainingInstance, Variant};
use crate::pddl::{load_task, GroundTask, PddlError};
use crate::policy::{Constraints, GeneralPolicy, PolicyError};
use crate::state_space::{expand_model, ModelError, DEFAULT_STATE_LIMIT};
use crate::verifier::{simulate_check, verify_policy, VerifierError, DEFAULT_MAX_STEPS};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{name}: {source}")]
    Pddl { name: String, source: PddlError },
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

fn io_error(path: &Path, e: impl fmt::Display) -> TrainError {
    TrainError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn default_c_max() -> usize {
    15
}

fn default_trials() -> usize {
    10
}

fn default_state_limit() -> usize {
    DEFAULT_STATE_LIMIT
}

fn default_pool_cap() -> usize {
    DEFAULT_POOL_CAP
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

/// Settings of one training run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: PathBuf,
    pub problems: Vec<PathBuf>,
    #[serde(default = "default_c_max")]
    pub c_max: usize,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub mode: Mode,
    /// Simulation runs per policy check.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub time_limit_secs: Option<f64>,
    /// Checked against the peak resident set size of the process.
    #[serde(default)]
    pub memory_limit_mb: Option<u64>,
    #[serde(default = "default_state_limit")]
    pub state_limit: usize,
    #[serde(default = "default_pool_cap")]
    pub pool_cap: usize,
    #[serde(default)]
    pub max_literals: Option<usize>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(domain: impl Into<PathBuf>, problems: Vec<PathBuf>) -> Self {
        RunConfig {
            domain: domain.into(),
            problems,
            c_max: default_c_max(),
            variant: Variant::default(),
            mode: Mode::default(),
            trials: default_trials(),
            seed: 0,
            time_limit_secs: None,
            memory_limit_mb: None,
            state_limit: default_state_limit(),
            pool_cap: default_pool_cap(),
            max_literals: None,
            max_steps: default_max_steps(),
            output_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, TrainError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| TrainError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let mut config = RunConfig::from_toml(&text)?;
        // relative paths in the file are relative to the file
        if let Some(dir) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            fix(&mut config.domain);
            config.problems.iter_mut().for_each(fix);
            if let Some(out) = config.output_dir.as_mut() {
                fix(out);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.c_max == 0 {
            return Err(TrainError::Config("c_max must be at least 1".into()));
        }
        if self.problems.is_empty() {
            return Err(TrainError::Config("no problems given".into()));
        }
        if self.trials == 0 {
            return Err(TrainError::Config("trials must be at least 1".into()));
        }
        if self.time_limit_secs.is_some_and(|t| t.is_nan() || t <= 0.0) {
            return Err(TrainError::Config("time_limit_secs must be positive".into()));
        }
        Ok(())
    }
}

/// Domain and problem texts of a suite.
#[derive(Debug, Clone)]
pub struct Suite {
    pub domain: String,
    /// `(name, problem text)`.
    pub problems: Vec<(String, String)>,
}

impl Suite {
    pub fn load(config: &RunConfig) -> Result<Self, TrainError> {
        let domain = std::fs::read_to_string(&config.domain).map_err(|e| io_error(&config.domain, e))?;
        let problems = config
            .problems
            .iter()
            .map(|p| {
                let text = std::fs::read_to_string(p).map_err(|e| io_error(p, e))?;
                let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string());
                Ok((name, text))
            })
            .collect::<Result<_, TrainError>>()?;
        Ok(Suite { domain, problems })
    }
}

/// Why a run stopped without a policy for its whole training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureClass {
    /// The theory exceeded the literal budget.
    #[serde(rename = "I")]
    TheoryTooLarge,
    /// No policy up to `c_max`.
    #[serde(rename = "C")]
    NoSolution,
    /// A state, pool, memory or time budget ran out.
    #[serde(rename = "M")]
    Resources,
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureClass::TheoryTooLarge => "I",
            FailureClass::NoSolution => "C",
            FailureClass::Resources => "M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceStatus {
    /// Exactly verified.
    Solved,
    /// Exact verification found a counterexample.
    Failed,
    /// Too large to expand; every simulation reached the goal.
    SimOnly,
    /// Too large to expand; some simulation failed.
    SimFailed,
    /// The initial state is a dead-end.
    Unsolvable,
}

impl fmt::Display for InstanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceStatus::Solved => "solved",
            InstanceStatus::Failed => "failed",
            InstanceStatus::SimOnly => "sim-only",
            InstanceStatus::SimFailed => "sim-failed",
            InstanceStatus::Unsolvable => "unsolvable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub name: String,
    pub objects: usize,
    pub training: bool,
    pub status: InstanceStatus,
}

/// Summary of a run; the counters follow the usual results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problems: usize,
    pub training: usize,
    /// Exactly verified instances.
    pub solved: usize,
    pub sim_only: usize,
    pub max_objects_training: usize,
    pub max_objects: usize,
    pub t_solve_secs: f64,
    pub t_wall_secs: f64,
    /// Peak resident set size, where the platform reports it.
    pub mem_mb: Option<f64>,
    pub pool_size: usize,
    pub num_features: usize,
    pub num_constraints: usize,
    pub max_feature_cost: u64,
    pub total_cost: u64,
    pub failure: Option<FailureClass>,
    pub failure_detail: Option<String>,
    pub instances: Vec<InstanceReport>,
}

fn peak_memory_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

fn instance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Item {
    name: String,
    objects: usize,
    task: Arc<GroundTask>,
}

/// Reads the suite named in `config` and trains on it, writing the policy
/// and reports to `config.output_dir` when set.
pub fn incremental_train(config: &RunConfig) -> Result<(GeneralPolicy, RunReport), TrainError> {
    config.validate()?;
    let suite = Suite::load(config)?;
    let (policy, report) = train_suite(config, &suite)?;
    if let Some(dir) = &config.output_dir {
        write_run(dir, &policy, &report)?;
    }
    Ok((policy, report))
}

/// Writes `policy.txt`, `report.txt` and `report.json` into `dir`.
pub fn write_run(dir: &Path, policy: &GeneralPolicy, report: &RunReport) -> Result<(), TrainError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    for (file, text) in
        [("policy.txt", policy.to_string()), ("report.txt", emit_report(report, ReportFormat::Table)), ("report.json", emit_report(report, ReportFormat::Json))]
    {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

/// Trains on an in-memory suite; file paths in `config` are not used.
pub fn train_suite(config: &RunConfig, suite: &Suite) -> Result<(GeneralPolicy, RunReport), TrainError> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.time_limit_secs.map(|t| start + Duration::from_secs_f64(t));
    let mut items = suite
        .problems
        .iter()
        .map(|(name, text)| {
            let task = load_task(&suite.domain, text).map_err(|source| TrainError::Pddl { name: name.clone(), source })?;
            Ok(Item { name: name.clone(), objects: task.objects.len(), task: Arc::new(task) })
        })
        .collect::<Result<Vec<_>, TrainError>>()?;
    items.sort_by(|a, b| (a.objects, &a.name).cmp(&(b.objects, &b.name)));

    let mut policy = GeneralPolicy::empty();
    if config.mode == Mode::Transition {
        policy.constraints = Constraints::Transition(vec![]);
    }
    let mut training: Vec<TrainingInstance> = Vec::new();
    let mut in_training = vec![false; items.len()];
    let mut unsolvable = vec![false; items.len()];
    let mut c_min = 1;
    let mut t_solve = Duration::ZERO;
    let mut pool_size = 0;
    let mut cost = 0;
    let mut failure: Option<(FailureClass, String)> = None;

    'instances: for (i, item) in items.iter().enumerate() {
        if i > 0 && simulate_check(&policy, &item.task, config.trials, instance_seed(config.seed, i), config.max_steps)? {
            continue;
        }
        match TrainingInstance::new(&item.name, item.task.clone(), config.state_limit) {
            Ok(t) => training.push(t),
            Err(LearnError::UnsolvableInstance(_)) => {
                unsolvable[i] = true;
                continue;
            }
            Err(LearnError::Model(e @ ModelError::StateLimitExceeded { .. })) => {
                failure = Some((FailureClass::Resources, format!("{}: {e}", item.name)));
                break;
            }
            Err(e) => return Err(e.into()),
        }
        in_training[i] = true;
        let mut cost_max = None;
        let mut found = false;
        let first = c_min;
        for c in first..=config.c_max {
            if let (Some(limit), Some(used)) = (config.memory_limit_mb, peak_memory_mb()) {
                if used > limit as f64 {
                    failure = Some((FailureClass::Resources, format!("memory use {used:.0} MB above {limit} MB")));
                    break 'instances;
                }
            }
            let pool_config = PoolConfig { cap: config.pool_cap, ..PoolConfig::new(c) };
            let pool = match pool_for(&training, &pool_config) {
                Ok(p) => p,
                Err(e @ FeatureError::PoolExplosion { .. }) => {
                    failure = Some((FailureClass::Resources, e.to_string()));
                    break 'instances;
                }
                Err(e) => return Err(e.into()),
            };
            let options = LearnOptions {
                variant: config.variant,
                mode: config.mode,
                cost_upper_bound: cost_max,
                // below c there is no policy at all, or none cheaper than the last
                require_complexity: (c > c_min).then_some(c as u64),
                deadline,
                max_literals: config.max_literals,
            };
            let t0 = Instant::now();
            let result = learn_policy(&training, &pool, &options);
            t_solve += t0.elapsed();
            match result {
                Ok(learned) => {
                    policy = learned.policy;
                    cost = learned.cost;
                    pool_size = learned.pool_size;
                    c_min = c;
                    cost_max = Some(learned.cost);
                    found = true;
                }
                Err(LearnError::Infeasible) => {}
                Err(e @ LearnError::TheoryTooLarge { .. }) => {
                    failure = Some((FailureClass::TheoryTooLarge, e.to_string()));
                    break 'instances;
                }
                Err(LearnError::TimeLimit) => {
                    failure = Some((FailureClass::Resources, "time limit reached".into()));
                    break 'instances;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !found {
            failure = Some((FailureClass::NoSolution, format!("no policy for the training set with {} up to complexity {}", item.name, config.c_max)));
            break;
        }
    }

    let mut instances = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let status = if unsolvable[i] {
            InstanceStatus::Unsolvable
        } else {
            match expand_model(item.task.clone(), config.state_limit) {
                Ok(model) => {
                    let partition = label_model(&model);
                    if partition.dead.contains(&model.init) {
                        InstanceStatus::Unsolvable
                    } else if verify_policy(&policy, &partition.model)?.solved {
                        InstanceStatus::Solved
                    } else {
                        InstanceStatus::Failed
                    }
                }
                Err(ModelError::StateLimitExceeded { .. }) => {
                    if simulate_check(&policy, &item.task, config.trials, instance_seed(config.seed, i), config.max_steps)? {
                        InstanceStatus::SimOnly
                    } else {
                        InstanceStatus::SimFailed
                    }
                }
                Err(e) => return Err(LearnError::Model(e).into()),
            }
        };
        instances.push(InstanceReport { name: item.name.clone(), objects: item.objects, training: in_training[i], status });
    }

    let weights: Vec<u64> = policy.features.iter().map(|f| f.weight() as u64).collect();
    let report = RunReport {
        problems: items.len(),
        training: training.len(),
        solved: instances.iter().filter(|r| r.status == InstanceStatus::Solved).count(),
        sim_only: instances.iter().filter(|r| r.status == InstanceStatus::SimOnly).count(),
        max_objects_training: items.iter().zip(&in_training).filter(|(_, &t)| t).map(|(it, _)| it.objects).max().unwrap_or(0),
        max_objects: items.iter().map(|it| it.objects).max().unwrap_or(0),
        t_solve_secs: t_solve.as_secs_f64(),
        t_wall_secs: start.elapsed().as_secs_f64(),
        mem_mb: peak_memory_mb(),
        pool_size,
        num_features: policy.features.len(),
        num_constraints: match &policy.constraints {
            Constraints::State(b) => b.len(),
            Constraints::Transition(t) => t.len(),
        },
        max_feature_cost: weights.iter().copied().max().unwrap_or(0),
        total_cost: cost,
        failure: failure.as_ref().map(|f| f.0),
        failure_detail: failure.map(|f| f.1),
        instances,
    };
    Ok((policy, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Header and one row, then one line per instance.
    Table,
    /// One JSON object on a single line.
    Json,
}

pub const REPORT_COLUMNS: [&str; 14] = ["|P|", "|T|", "|S|", "|O|_T", "|O|_P", "t_solve", "t_wall", "mem", "|F|", "|Φ|", "|C|", "k*", "c_Φ", "status"];

pub fn emit_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string(report).expect("reports serialize") + "\n",
        ReportFormat::Table => {
            let row = [
                report.problems.to_string(),
                report.training.to_string(),
                report.solved.to_string(),
                report.max_objects_training.to_string(),
                report.max_objects.to_string(),
                format!("{:.2}", report.t_solve_secs),
                format!("{:.2}", report.t_wall_secs),
                report.mem_mb.map_or("-".into(), |m| format!("{m:.0}")),
                report.pool_size.to_string(),
                report.num_features.to_string(),
                report.num_constraints.to_string(),
                report.max_feature_cost.to_string(),
                report.total_cost.to_string(),
                report.failure.map_or("ok".into(), |f| f.to_string()),
            ];
            let widths: Vec<usize> = REPORT_COLUMNS.iter().zip(&row).map(|(h, r)| h.chars().count().max(r.len())).collect();
            let line = |cells: &mut dyn Iterator<Item = String>| -> String {
                cells.zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(&mut REPORT_COLUMNS.iter().map(|h| h.to_string()));
            out += &line(&mut row.into_iter());
            if let Some(detail) = &report.failure_detail {
                writeln!(out, "failure: {detail}").unwrap();
            }
            for inst in &report.instances {
                writeln!(out, "{:<24} objects={:<4} {}{}", inst.name, inst.objects, inst.status, if inst.training { " (training)" } else { "" }).unwrap();
            }
            out
        }
    }
}
