//! Solvability by enumerating every memoryless policy.
//!
//! A state is solvable when some policy makes the goal reachable from every
//! state the policy can reach from it. Only feasible for small models.

use fondgen::pddl::GroundTask;
use fondgen::state_space::{FondModel, Transition};
use std::collections::BTreeSet;
use std::sync::Arc;

/// log2 of the number of policies [`solvable_by_enumeration`] accepts.
pub const MAX_POLICY_BITS: f64 = 24.0;

pub fn policy_bits(model: &FondModel) -> f64 {
    (0..model.len()).filter(|&s| !model.is_goal[s]).map(|s| (model.transitions[s].len().max(1) as f64).log2()).sum()
}

pub fn solvable_by_enumeration(model: &FondModel) -> BTreeSet<usize> {
    let n = model.len();
    assert!(policy_bits(model) <= MAX_POLICY_BITS, "too many policies to enumerate");
    let choosers: Vec<usize> = (0..n).filter(|&s| !model.is_goal[s] && !model.transitions[s].is_empty()).collect();
    let mut choice = vec![0usize; n];
    let mut solvable = vec![false; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut reach = vec![false; n];
    let mut tainted = vec![false; n];
    let mut stack = Vec::new();
    loop {
        for p in preds.iter_mut() {
            p.clear();
        }
        for &s in &choosers {
            for &o in &model.transitions[s][choice[s]].outcomes {
                preds[o].push(s);
            }
        }
        // states that can reach a goal under the policy
        reach.copy_from_slice(&model.is_goal);
        stack.extend((0..n).filter(|&s| reach[s]));
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !reach[p] {
                    reach[p] = true;
                    stack.push(p);
                }
            }
        }
        // states that can reach a state without that option
        for s in 0..n {
            tainted[s] = !reach[s];
        }
        stack.extend((0..n).filter(|&s| tainted[s]));
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !tainted[p] {
                    tainted[p] = true;
                    stack.push(p);
                }
            }
        }
        for s in 0..n {
            solvable[s] |= !tainted[s];
        }
        if solvable.iter().all(|&x| x) {
            break;
        }
        // next policy in mixed radix
        let mut carry = true;
        for &s in &choosers {
            choice[s] += 1;
            if choice[s] < model.transitions[s].len() {
                carry = false;
                break;
            }
            choice[s] = 0;
        }
        if carry {
            break;
        }
    }
    (0..n).filter(|&s| solvable[s]).collect()
}

/// A model given as an explicit graph: `(state, action, outcomes)` triples.
pub fn explicit_model(n: usize, goals: &[usize], edges: &[(usize, usize, Vec<usize>)]) -> FondModel {
    let task = GroundTask {
        domain_name: "graph".into(),
        problem_name: "graph".into(),
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
    };
    let mut transitions = vec![Vec::new(); n];
    for (s, a, outs) in edges {
        if !goals.contains(s) {
            transitions[*s].push(Transition { action: *a, outcomes: outs.clone() });
        }
    }
    let states = (0..n).map(|i| vec![i]).collect();
    let is_goal = (0..n).map(|i| goals.contains(&i)).collect();
    FondModel::from_parts(Arc::new(task), states, 0, is_goal, transitions)
}
