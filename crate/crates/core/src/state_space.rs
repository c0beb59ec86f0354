//! Explicit FOND state models: breadth-first expansion, transition lookup,
//! labels, and a plain-text edge-list export.

use crate::pddl::{ActionId, AtomId, GroundTask};
use std::collections::{HashMap, VecDeque};
use std::fmt::Write;
use std::sync::Arc;
use thiserror::Error;

pub type StateId = usize;

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("state limit {limit} exceeded with {frontier} states still on the frontier")]
    StateLimitExceeded { limit: usize, frontier: usize },
    #[error("invalid state id {0}")]
    InvalidStateId(StateId),
    #[error("model has no dead-end labels")]
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Alive,
    Goal,
    Dead,
}

/// Non-deterministic transition: an applicable action and its distinct successors
/// in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub action: ActionId,
    pub outcomes: Vec<StateId>,
}

#[derive(Debug, Clone)]
pub struct FondModel {
    pub task: Arc<GroundTask>,
    /// Sorted true fluent atoms per state.
    pub states: Vec<Vec<AtomId>>,
    index: HashMap<Vec<AtomId>, StateId>,
    pub init: StateId,
    pub is_goal: Vec<bool>,
    pub transitions: Vec<Vec<Transition>>,
    pub labels: Option<Vec<Label>>,
    /// Dead states with an incoming transition from an alive state.
    pub critical: Vec<bool>,
    /// For pruned models: the id of each state in the model it was pruned from.
    pub origin: Option<Vec<StateId>>,
}

/// Expands every state reachable from the initial state. Goal states are terminal.
pub fn expand_model(task: Arc<GroundTask>, state_limit: usize) -> Result<FondModel, ModelError> {
    let init: Vec<AtomId> = task.init.clone();
    let mut states = vec![init.clone()];
    let mut index = HashMap::from([(init, 0)]);
    let mut transitions: Vec<Vec<Transition>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        if transitions.len() <= s {
            transitions.resize_with(s + 1, Vec::new);
        }
        if task.is_goal(&states[s]) {
            continue;
        }
        let mut out = Vec::new();
        for a in 0..task.actions.len() {
            if !task.applicable(&states[s], a) {
                continue;
            }
            let mut outcomes = Vec::new();
            for o in &task.actions[a].outcomes {
                let next = task.apply(&states[s], o);
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= state_limit {
                            return Err(ModelError::StateLimitExceeded { limit: state_limit, frontier: queue.len() + 1 });
                        }
                        let id = states.len();
                        index.insert(next.clone(), id);
                        states.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                if !outcomes.contains(&id) {
                    outcomes.push(id);
                }
            }
            out.push(Transition { action: a, outcomes });
        }
        transitions[s] = out;
    }
    transitions.resize_with(states.len(), Vec::new);
    let is_goal = states.iter().map(|s| task.is_goal(s)).collect();
    let n = states.len();
    Ok(FondModel { task, states, index, init: 0, is_goal, transitions, labels: None, critical: vec![false; n], origin: None })
}

impl FondModel {
    /// Builds a model from explicit parts; used by pruning and by crafted fixtures.
    pub fn from_parts(task: Arc<GroundTask>, states: Vec<Vec<AtomId>>, init: StateId, is_goal: Vec<bool>, transitions: Vec<Vec<Transition>>) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let n = states.len();
        FondModel { task, states, index, init, is_goal, transitions, labels: None, critical: vec![false; n], origin: None }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_id(&self, atoms: &[AtomId]) -> Option<StateId> {
        self.index.get(atoms).copied()
    }

    pub fn transition_function(&self, s: StateId) -> Result<&[Transition], ModelError> {
        self.transitions.get(s).map(|t| t.as_slice()).ok_or(ModelError::InvalidStateId(s))
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().flatten().map(|t| t.outcomes.len()).sum()
    }

    pub fn labels(&self) -> Result<&[Label], ModelError> {
        self.labels.as_deref().ok_or(ModelError::Unlabeled)
    }

    pub fn label(&self, s: StateId) -> Option<Label> {
        self.labels.as_ref().map(|l| l[s])
    }

    pub fn state_string(&self, s: StateId) -> String {
        let names: Vec<String> = self.states[s].iter().map(|&a| self.task.atom_name(a)).collect();
        format!("{{{}}}", names.join(", "))
    }

    /// Edge list: one `state action -> successors` line per transition, preceded
    /// by state listings.
    pub fn export_edges(&self) -> String {
        let mut s = String::from("# fond-model v1\n");
        writeln!(s, "states {}", self.len()).unwrap();
        writeln!(s, "init {}", self.init).unwrap();
        let goals: Vec<String> = (0..self.len()).filter(|&i| self.is_goal[i]).map(|i| i.to_string()).collect();
        writeln!(s, "goal {}", goals.join(" ")).unwrap();
        for i in 0..self.len() {
            let label = match self.label(i) {
                Some(Label::Alive) => " alive",
                Some(Label::Goal) => " goal",
                Some(Label::Dead) if self.critical[i] => " dead critical",
                Some(Label::Dead) => " dead",
                None => "",
            };
            writeln!(s, "state {i}{label} {}", self.state_string(i)).unwrap();
        }
        for (i, ts) in self.transitions.iter().enumerate() {
            for t in ts {
                let succ: Vec<String> = t.outcomes.iter().map(|o| o.to_string()).collect();
                writeln!(s, "{i} {} -> {}", self.task.action_name(t.action), succ.join(" ")).unwrap();
            }
        }
        s
    }
}
