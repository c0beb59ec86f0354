//! Learning general policies as a min-cost SAT problem.
//!
//! Training instances are expanded and labeled, their pruned models feed a
//! propositional theory over a feature pool ([`build_theory`]), the theory is
//! solved to optimality ([`solve_min_cost`]) and rules plus constraints are
//! read off the optimal model ([`extract_policy`]).

mod solve;
mod theory;

pub use solve::{solve_min_cost, solve_min_cost_until, Assignment};
pub use theory::{build_theory, Theory};

use crate::deadend::{label_model, StatePartition};
use crate::features::{generate_pool, Change, Feature, FeatureError, PoolConfig, Sample, Value};
use crate::pddl::GroundTask;
use crate::policy::{Condition, Constraints, EffectAtom, GeneralPolicy, Literal, PolicyError, Rule};
use crate::state_space::{expand_model, Label, ModelError};
use crate::verifier::{verify_policy, VerifierError};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error("no alive state in the training set")]
    EmptyAliveSet,
    #[error("no policy over the feature pool within the cost bound")]
    Infeasible,
    #[error("time limit reached")]
    TimeLimit,
    #[error("theory has {literals} literals, above the limit of {limit}")]
    TheoryTooLarge { literals: usize, limit: usize },
    #[error("training instance {0} has a dead initial state")]
    UnsolvableInstance(String),
    #[error("learned policy fails on training instance {instance}: {reason}")]
    VerificationFailed { instance: String, reason: String },
    #[error("SAT solver error: {0}")]
    Solver(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

/// How the theory forces good transitions towards the goal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Explicit goal distances.
    Ranked,
    /// All alive states must be labeled safe by backward induction.
    #[default]
    SafeLabeled,
}

/// Whether dead-ends are avoided with state or transition constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    State,
    Transition,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Ranked => "ranked",
            Variant::SafeLabeled => "safe-labeled",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ranked" => Ok(Variant::Ranked),
            "safe-labeled" => Ok(Variant::SafeLabeled),
            _ => Err(format!("unknown variant `{s}` (expected ranked or safe-labeled)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::State => "state",
            Mode::Transition => "transition",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "state" => Ok(Mode::State),
            "transition" => Ok(Mode::Transition),
            _ => Err(format!("unknown mode `{s}` (expected state or transition)")),
        }
    }
}

/// A training instance ready for the theory: its labeled full model plus the
/// pruned model inside the partition.
#[derive(Debug, Clone)]
pub struct TrainingInstance {
    pub name: String,
    pub partition: StatePartition,
}

impl TrainingInstance {
    pub fn new(name: impl Into<String>, task: Arc<GroundTask>, state_limit: usize) -> Result<Self, LearnError> {
        let name = name.into();
        let model = expand_model(task, state_limit)?;
        let partition = label_model(&model);
        if partition.dead.contains(&model.init) {
            return Err(LearnError::UnsolvableInstance(name));
        }
        Ok(TrainingInstance { name, partition })
    }
}

/// Generates the pool over the states kept in the pruned training models.
pub fn pool_for(training: &[TrainingInstance], config: &PoolConfig) -> Result<Vec<Feature>, FeatureError> {
    let samples: Vec<Sample<'_>> = training.iter().map(|t| (&*t.partition.pruned_model.task, t.partition.pruned_model.states.as_slice())).collect();
    generate_pool(&samples, config)
}

fn literal(f: usize, v: Value) -> Literal {
    Literal { feature: f, holds: v.boolean_view() }
}

fn effect(f: usize, boolean: bool, a: Value, b: Value) -> Option<EffectAtom> {
    match (Change::between(a, b), boolean) {
        (Change::Same, _) => None,
        (Change::Up, true) => Some(EffectAtom::SetTrue(f)),
        (Change::Down, true) => Some(EffectAtom::SetFalse(f)),
        (Change::Up, false) => Some(EffectAtom::Inc(f)),
        (Change::Down, false) => Some(EffectAtom::Dec(f)),
    }
}

/// Reads the policy off a model: one rule per good transition, with the
/// valuation of the selected features in the source state as condition and
/// their changes as effect, and constraints from the critical states (state
/// mode) or critical transitions (transition mode).
pub fn extract_policy(assignment: &Assignment, theory: &Theory, pool: &[Feature]) -> GeneralPolicy {
    let phi: Vec<usize> = assignment.selected().collect();
    let features: Vec<Feature> = phi.iter().map(|&f| pool[f].clone()).collect();
    let names: Vec<String> = (0..phi.len()).map(|i| format!("f{i}")).collect();
    let vals = |s: usize| -> Vec<Value> { phi.iter().map(|&f| theory.values[s][f]).collect() };
    let rule_for = |s: usize, t: usize| -> Rule {
        let (vs, vt) = (vals(s), vals(t));
        let cond = Condition::new(vs.iter().enumerate().map(|(i, &v)| literal(i, v)).collect()).expect("one literal per feature");
        let eff = (0..phi.len()).filter_map(|i| effect(i, features[i].is_boolean(), vs[i], vt[i])).collect();
        Rule::new(cond, eff).expect("one effect per feature")
    };
    let mut rules: Vec<Rule> = Vec::new();
    let mut tcons: Vec<Rule> = Vec::new();
    for (c, class) in theory.classes.iter().enumerate() {
        for &(s, t) in &class.members {
            if assignment.good[c] {
                rules.push(rule_for(s, t));
            }
            if theory.states[t].label == Label::Dead {
                tcons.push(rule_for(s, t));
            }
        }
    }
    rules.sort();
    rules.dedup();
    let constraints = match theory.mode {
        Mode::State => {
            let mut b: Vec<Condition> = (0..theory.states.len())
                .filter(|&s| theory.states[s].label == Label::Dead)
                .map(|s| Condition::new(vals(s).iter().enumerate().map(|(i, &v)| literal(i, v)).collect()).expect("one literal per feature"))
                .collect();
            b.sort();
            b.dedup();
            Constraints::State(b)
        }
        Mode::Transition => {
            tcons.sort();
            tcons.dedup();
            Constraints::Transition(tcons)
        }
    };
    GeneralPolicy::new(names, features, rules, constraints).expect("extracted policies are well-formed")
}

/// Options for one learning call.
#[derive(Debug, Clone, Default)]
pub struct LearnOptions {
    pub variant: Variant,
    pub mode: Mode,
    /// Only policies of strictly smaller cost are accepted.
    pub cost_upper_bound: Option<u64>,
    /// Require at least one selected feature of at least this weight.
    pub require_complexity: Option<u64>,
    pub deadline: Option<Instant>,
    /// Upper limit on the size of the eagerly built theory.
    pub max_literals: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Learned {
    pub policy: GeneralPolicy,
    pub cost: u64,
    pub pool_size: usize,
    pub num_vars: usize,
    pub num_clauses: usize,
}

/// Learns a min-cost policy for the training instances over `pool` and
/// checks it exactly on every training instance before returning it.
pub fn learn_policy(training: &[TrainingInstance], pool: &[Feature], options: &LearnOptions) -> Result<Learned, LearnError> {
    let parts: Vec<StatePartition> = training.iter().map(|t| t.partition.clone()).collect();
    let mut theory = match build_theory(&parts, pool, options.variant, options.mode) {
        Err(LearnError::EmptyAliveSet) => {
            let constraints = match options.mode {
                Mode::State => Constraints::State(vec![]),
                Mode::Transition => Constraints::Transition(vec![]),
            };
            let policy = GeneralPolicy::new(vec![], vec![], vec![], constraints)?;
            return Ok(Learned { policy, cost: 0, pool_size: pool.len(), num_vars: 0, num_clauses: 0 });
        }
        other => other?,
    };
    if let Some(c) = options.require_complexity {
        theory.require_complexity(c);
    }
    if let Some(limit) = options.max_literals {
        let literals = theory.num_literals();
        if literals > limit {
            return Err(LearnError::TheoryTooLarge { literals, limit });
        }
    }
    let assignment = solve_min_cost_until(&theory, options.cost_upper_bound, options.deadline)?.ok_or(LearnError::Infeasible)?;
    let policy = extract_policy(&assignment, &theory, pool);
    for t in training {
        let v = verify_policy(&policy, &t.partition.model)?;
        if !v.solved {
            return Err(LearnError::VerificationFailed { instance: t.name.clone(), reason: v.reason.to_string() });
        }
    }
    Ok(Learned { policy, cost: assignment.cost, pool_size: pool.len(), num_vars: theory.num_vars, num_clauses: theory.clauses.len() })
}
