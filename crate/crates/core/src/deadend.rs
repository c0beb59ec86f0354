//! Dead-end detection, state partitioning and pruning.
//!
//! [`detect_dead_ends`] removes every action with a known dead outcome and
//! marks states that can no longer reach a goal, until nothing changes.
//! [`solvable_states`] computes the same set independently as a nested
//! fixpoint and is used for cross-checking.

use crate::state_space::{FondModel, Label, StateId, Transition};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeadEndError {
    #[error("inconsistent input: state {0} is both a goal and a dead-end")]
    InconsistentInput(StateId),
}

/// Returns the dead-ends of a fully expanded model.
pub fn detect_dead_ends(model: &FondModel) -> BTreeSet<StateId> {
    let n = model.len();
    let mut dead = vec![false; n];
    loop {
        let reach = backward_goal_reachability(model, |s, t| !dead[s] && t.outcomes.iter().all(|&o| !dead[o]));
        let mut changed = false;
        for s in 0..n {
            if !reach[s] && !dead[s] {
                dead[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&s| dead[s]).collect()
}

/// States that can reach a goal using only transitions accepted by `keep`.
fn backward_goal_reachability(model: &FondModel, keep: impl Fn(StateId, &Transition) -> bool) -> Vec<bool> {
    let n = model.len();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in 0..n {
        for t in &model.transitions[s] {
            if keep(s, t) {
                for &o in &t.outcomes {
                    preds[o].push(s);
                }
            }
        }
    }
    let mut seen = model.is_goal.clone();
    let mut stack: Vec<StateId> = (0..n).filter(|&s| seen[s]).collect();
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

/// States from which some policy reaches a goal under fairness:
/// the greatest X such that every state of X reaches a goal through actions
/// whose outcomes all stay in X.
pub fn solvable_states(model: &FondModel) -> BTreeSet<StateId> {
    let n = model.len();
    let mut x = vec![true; n];
    loop {
        let mut y = model.is_goal.clone();
        loop {
            let mut grew = false;
            for s in 0..n {
                if y[s] {
                    continue;
                }
                let ok = model.transitions[s].iter().any(|t| t.outcomes.iter().all(|&o| x[o]) && t.outcomes.iter().any(|&o| y[o]));
                if ok {
                    y[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if y == x {
            break;
        }
        x = y;
    }
    (0..n).filter(|&s| x[s]).collect()
}

/// Alive, goal and dead states of one model, plus the pruned model that
/// keeps alive, goal and critical states only.
#[derive(Debug, Clone)]
pub struct StatePartition {
    pub alive: BTreeSet<StateId>,
    pub goal: BTreeSet<StateId>,
    pub dead: BTreeSet<StateId>,
    /// Dead states with an incoming transition from an alive state.
    pub critical: BTreeSet<StateId>,
    /// The full model with labels and critical flags set.
    pub model: FondModel,
    pub pruned_model: FondModel,
}

pub fn partition_states(model: &FondModel, dead: &BTreeSet<StateId>) -> Result<StatePartition, DeadEndError> {
    if let Some(&s) = dead.iter().find(|&&s| model.is_goal[s]) {
        return Err(DeadEndError::InconsistentInput(s));
    }
    let n = model.len();
    let mut labels = vec![Label::Alive; n];
    let (mut alive, mut goal) = (BTreeSet::new(), BTreeSet::new());
    for (s, label) in labels.iter_mut().enumerate() {
        if model.is_goal[s] {
            *label = Label::Goal;
            goal.insert(s);
        } else if dead.contains(&s) {
            *label = Label::Dead;
        } else {
            alive.insert(s);
        }
    }
    let mut critical = BTreeSet::new();
    for &s in &alive {
        for t in &model.transitions[s] {
            critical.extend(t.outcomes.iter().copied().filter(|o| dead.contains(o)));
        }
    }
    let mut labeled = model.clone();
    labeled.labels = Some(labels);
    labeled.critical = (0..n).map(|s| critical.contains(&s)).collect();
    labeled.origin = None;
    let mut part = StatePartition { alive, goal, dead: dead.clone(), critical, pruned_model: labeled.clone(), model: labeled };
    part.pruned_model = prune_and_mark_critical(&part);
    Ok(part)
}

/// Drops dead states that are not critical together with all transitions
/// leaving dead states. A dead initial state is always kept so the result
/// still has an initial state.
pub fn prune_and_mark_critical(part: &StatePartition) -> FondModel {
    let model = &part.model;
    let keep: Vec<bool> = (0..model.len()).map(|s| !part.dead.contains(&s) || part.critical.contains(&s) || s == model.init).collect();
    let mut new_id = vec![usize::MAX; model.len()];
    let mut origin = Vec::new();
    for s in 0..model.len() {
        if keep[s] {
            new_id[s] = origin.len();
            origin.push(s);
        }
    }
    let states = origin.iter().map(|&s| model.states[s].clone()).collect();
    let is_goal = origin.iter().map(|&s| model.is_goal[s]).collect();
    let transitions = origin
        .iter()
        .map(|&s| {
            if part.dead.contains(&s) {
                return Vec::new();
            }
            model.transitions[s].iter().map(|t| Transition { action: t.action, outcomes: t.outcomes.iter().map(|&o| new_id[o]).collect() }).collect()
        })
        .collect();
    let mut pruned = FondModel::from_parts(model.task.clone(), states, new_id[model.init], is_goal, transitions);
    let labels = model.labels.as_ref().expect("partition models are labeled");
    pruned.labels = Some(origin.iter().map(|&s| labels[s]).collect());
    pruned.critical = origin.iter().map(|&s| part.critical.contains(&s)).collect();
    pruned.origin = Some(origin);
    pruned
}

/// Runs detection and partitioning in one step.
pub fn label_model(model: &FondModel) -> StatePartition {
    let dead = detect_dead_ends(model);
    partition_states(model, &dead).expect("detected dead-ends never contain goals")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::GroundTask;
    use std::sync::Arc;

    fn empty_task() -> Arc<GroundTask> {
        Arc::new(GroundTask {
            domain_name: "t".into(),
            problem_name: "t".into(),
            objects: vec![],
            constants: vec![],
            predicates: vec![],
            atoms: vec![],
            is_static: vec![],
            static_true: vec![],
            init: vec![],
            goal: vec![],
            static_goal_holds: true,
            actions: vec![],
        })
    }

    /// Explicit model from `(state, [(action, [outcomes])])` with the given goals.
    fn model(n: usize, goals: &[usize], edges: &[(usize, usize, &[usize])]) -> FondModel {
        let mut transitions = vec![Vec::new(); n];
        for &(s, a, outs) in edges {
            transitions[s].push(Transition { action: a, outcomes: outs.to_vec() });
        }
        let states = (0..n).map(|i| vec![i]).collect();
        let is_goal = (0..n).map(|i| goals.contains(&i)).collect();
        FondModel::from_parts(empty_task(), states, 0, is_goal, transitions)
    }

    #[test]
    fn chain_has_no_dead_ends() {
        let m = model(4, &[3], &[(0, 0, &[1]), (1, 0, &[2]), (2, 0, &[3])]);
        assert!(detect_dead_ends(&m).is_empty());
        let p = label_model(&m);
        assert_eq!((p.alive.len(), p.goal.len(), p.dead.len()), (3, 1, 0));
        assert_eq!(p.pruned_model.len(), 4);
    }

    #[test]
    fn risky_action_is_removed_iteratively() {
        // 0 -a-> {3 goal, 1}; 1 -b-> {2 sink}; 0 -c-> {4}; 4 -d-> {3}
        let m = model(5, &[3], &[(0, 0, &[3, 1]), (1, 1, &[2]), (0, 2, &[4]), (4, 3, &[3])]);
        let dead = detect_dead_ends(&m);
        assert_eq!(dead, BTreeSet::from([1, 2]));
        assert_eq!(dead, (0..5).filter(|s| !solvable_states(&m).contains(s)).collect());
        let p = partition_states(&m, &dead).unwrap();
        assert_eq!(p.critical, BTreeSet::from([1]));
        // state 2 is only reachable from the dead state 1
        assert_eq!(p.pruned_model.len(), 4);
        assert_eq!(p.pruned_model.origin.as_ref().unwrap(), &vec![0, 1, 3, 4]);
        assert!(p.pruned_model.transitions[1].is_empty());
    }

    #[test]
    fn loop_without_exit_is_dead() {
        // 0 -a-> {0, 1}; 1 -b-> {2 goal, 3}; 3 -c-> {3}
        let m = model(4, &[2], &[(0, 0, &[0, 1]), (1, 1, &[2, 3]), (3, 2, &[3])]);
        let dead = detect_dead_ends(&m);
        assert_eq!(dead, BTreeSet::from([0, 1, 3]));
        assert_eq!(solvable_states(&m), BTreeSet::from([2]));
    }

    #[test]
    fn goal_in_dead_set_is_rejected() {
        let m = model(2, &[1], &[(0, 0, &[1])]);
        assert_eq!(partition_states(&m, &BTreeSet::from([1])).unwrap_err(), DeadEndError::InconsistentInput(1));
    }

    #[test]
    fn dead_initial_state_survives_pruning() {
        let m = model(3, &[2], &[(0, 0, &[1, 2]), (1, 0, &[2])]);
        let p = partition_states(&m, &BTreeSet::from([0])).unwrap();
        assert_eq!(p.pruned_model.origin.as_ref().unwrap()[p.pruned_model.init], 0);
    }
}
