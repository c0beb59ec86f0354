//! Deciding whether a policy solves an instance.
//!
//! [`verify_strong_cyclic`] is exact: every state reachable under the policy
//! must be alive or a goal, have a selected action, and reach a goal inside
//! the policy graph. Under fairness this is equivalent to every fair
//! trajectory reaching the goal. [`simulate_check`] samples trajectories and
//! can only refute. [`check_descending_certificate`] checks a sufficient
//! condition given a lexicographic ranking of states.

use crate::features::{parse_feature, Feature, StateEvaluator, Value};
use crate::pddl::{ActionId, AtomId, GroundTask};
use crate::policy::{ConcretePolicy, GeneralPolicy, PolicyError};
use crate::state_space::{FondModel, Label, StateId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifierError {
    #[error("model has no dead-end labels")]
    ModelUnlabeled,
    #[error("certificate term {term} is undefined in state {state}")]
    CertificateUndefined { state: StateId, term: usize },
    #[error("certificate format error on line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// A path in the model: `states[i]` goes to `states[i + 1]` via `actions[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
}

impl Trajectory {
    /// Whether the path starts in the initial state and every step is a
    /// transition of the model.
    pub fn replays_on(&self, model: &FondModel) -> bool {
        self.states.first() == Some(&model.init)
            && self.states.len() == self.actions.len() + 1
            && self
                .actions
                .iter()
                .enumerate()
                .all(|(i, &a)| model.transitions[self.states[i]].iter().any(|t| t.action == a && t.outcomes.contains(&self.states[i + 1])))
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("trajectories are non-empty")
    }

    pub fn render(&self, model: &FondModel) -> String {
        let mut out = model.state_string(self.states[0]);
        for (i, &a) in self.actions.iter().enumerate() {
            out.push_str(&format!("\n  --{}--> {}", model.task.action_name(a), model.state_string(self.states[i + 1])));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    Ok,
    ReachesDeadEnd(Trajectory),
    /// States reachable under the policy from which no goal is reachable.
    UnfairLivelock(Vec<StateId>),
    /// A non-goal state where the policy selects nothing, with a path to it.
    Stuck(Trajectory),
    /// The instance could not be expanded within the state limit.
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub solved: bool,
    pub reason: Reason,
}

impl Verdict {
    fn fail(reason: Reason) -> Self {
        Verdict { solved: false, reason }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::Ok => f.write_str("ok"),
            Reason::ReachesDeadEnd(t) => write!(f, "reaches-dead-end after {} steps", t.actions.len()),
            Reason::UnfairLivelock(c) => write!(f, "unfair-livelock over {} states", c.len()),
            Reason::Stuck(t) => write!(f, "stuck in state {}", t.last()),
            Reason::Limit => f.write_str("limit"),
        }
    }
}

fn path_to(parent: &[Option<(StateId, ActionId)>], mut s: StateId) -> Trajectory {
    let (mut states, mut actions) = (vec![s], vec![]);
    while let Some((p, a)) = parent[s] {
        states.push(p);
        actions.push(a);
        s = p;
    }
    states.reverse();
    actions.reverse();
    Trajectory { states, actions }
}

/// States reached by a policy, in breadth-first order, with BFS parents.
struct PolicyGraph {
    order: Vec<StateId>,
    parent: Vec<Option<(StateId, ActionId)>>,
    reached: Vec<bool>,
}

/// Breadth-first search from the initial state following selected actions.
/// Goal and dead states are not expanded.
fn explore(policy: &ConcretePolicy, model: &FondModel, labels: &[Label]) -> PolicyGraph {
    let n = model.len();
    let mut reached = vec![false; n];
    let mut parent = vec![None; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([model.init]);
    reached[model.init] = true;
    while let Some(s) = queue.pop_front() {
        order.push(s);
        if labels[s] != Label::Alive {
            continue;
        }
        for t in selected(policy, model, s) {
            for &o in &t.outcomes {
                if !reached[o] {
                    reached[o] = true;
                    parent[o] = Some((s, t.action));
                    queue.push_back(o);
                }
            }
        }
    }
    PolicyGraph { order, parent, reached }
}

fn selected<'m>(policy: &'m ConcretePolicy, model: &'m FondModel, s: StateId) -> impl Iterator<Item = &'m crate::state_space::Transition> {
    let chosen = policy.get(s);
    model.transitions[s].iter().filter(move |t| chosen.binary_search(&t.action).is_ok())
}

/// Exact strong-cyclic check of a concrete policy on a labeled model.
pub fn verify_strong_cyclic(policy: &ConcretePolicy, model: &FondModel) -> Result<Verdict, VerifierError> {
    let labels = model.labels.as_deref().ok_or(VerifierError::ModelUnlabeled)?;
    let g = explore(policy, model, labels);
    for &s in &g.order {
        match labels[s] {
            Label::Goal => {}
            Label::Dead => return Ok(Verdict::fail(Reason::ReachesDeadEnd(path_to(&g.parent, s)))),
            Label::Alive => {
                if selected(policy, model, s).next().is_none() {
                    return Ok(Verdict::fail(Reason::Stuck(path_to(&g.parent, s))));
                }
            }
        }
    }
    // backward reachability of goals inside the policy graph
    let n = model.len();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for &s in &g.order {
        if labels[s] == Label::Alive {
            for t in selected(policy, model, s) {
                for &o in &t.outcomes {
                    preds[o].push(s);
                }
            }
        }
    }
    let mut good = vec![false; n];
    let mut stack: Vec<StateId> = g.order.iter().copied().filter(|&s| labels[s] == Label::Goal).collect();
    for &s in &stack {
        good[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !good[p] {
                good[p] = true;
                stack.push(p);
            }
        }
    }
    if let Some(&bad) = g.order.iter().find(|&&s| !good[s]) {
        // everything reachable from `bad` is also unable to reach a goal
        let mut comp = vec![bad];
        let mut seen = vec![false; n];
        seen[bad] = true;
        let mut i = 0;
        while i < comp.len() {
            let s = comp[i];
            i += 1;
            for t in selected(policy, model, s) {
                for &o in &t.outcomes {
                    if !seen[o] {
                        seen[o] = true;
                        comp.push(o);
                    }
                }
            }
        }
        comp.sort_unstable();
        return Ok(Verdict::fail(Reason::UnfairLivelock(comp)));
    }
    debug_assert!(g.reached[model.init]);
    Ok(Verdict { solved: true, reason: Reason::Ok })
}

/// Projects a general policy on a labeled model and checks it exactly.
pub fn verify_policy(policy: &GeneralPolicy, model: &FondModel) -> Result<Verdict, VerifierError> {
    if model.labels.is_none() {
        return Err(VerifierError::ModelUnlabeled);
    }
    verify_strong_cyclic(&ConcretePolicy::project(policy, model)?, model)
}

/// Runs `trials` random executions of `policy` from the initial state of
/// `task`. In each step the lowest selected action is applied with a
/// uniformly chosen outcome. Returns true iff every run reaches a goal
/// within `max_steps` steps.
pub fn simulate_check(policy: &GeneralPolicy, task: &GroundTask, trials: usize, seed: u64, max_steps: usize) -> Result<bool, PolicyError> {
    let ev = StateEvaluator::new(task, &policy.features)?;
    let mut cache: HashMap<Vec<AtomId>, Option<ActionId>> = HashMap::new();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let mut state = task.init.clone();
        let mut steps = 0;
        while !task.is_goal(&state) {
            if steps == max_steps {
                return Ok(false);
            }
            let choice = match cache.get(&state) {
                Some(&c) => c,
                None => {
                    let c = policy.actions_in(task, &ev, &state)?.first().copied();
                    cache.insert(state.clone(), c);
                    c
                }
            };
            let Some(a) = choice else { return Ok(false) };
            let outcomes = &task.actions[a].outcomes;
            state = task.apply(&state, &outcomes[rng.gen_range(0..outcomes.len())]);
            steps += 1;
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Certificates

/// Integer arithmetic over feature values; Booleans count as 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Const(i64),
    Feature(usize),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

/// Integer extended with both infinities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtInt {
    NegInf,
    Fin(i128),
    PosInf,
}

impl ExtInt {
    fn neg(self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::Fin(x) => ExtInt::Fin(-x),
            ExtInt::PosInf => ExtInt::NegInf,
        }
    }

    fn add(self, o: ExtInt) -> Option<ExtInt> {
        match (self, o) {
            (ExtInt::Fin(a), ExtInt::Fin(b)) => Some(ExtInt::Fin(a + b)),
            (ExtInt::PosInf, ExtInt::NegInf) | (ExtInt::NegInf, ExtInt::PosInf) => None,
            (ExtInt::Fin(_), x) | (x, _) => Some(x),
        }
    }

    fn signum(self) -> i128 {
        match self {
            ExtInt::NegInf => -1,
            ExtInt::Fin(x) => x.signum(),
            ExtInt::PosInf => 1,
        }
    }

    fn mul(self, o: ExtInt) -> Option<ExtInt> {
        match (self, o) {
            (ExtInt::Fin(a), ExtInt::Fin(b)) => Some(ExtInt::Fin(a * b)),
            _ => match self.signum() * o.signum() {
                0 => None,
                1 => Some(ExtInt::PosInf),
                _ => Some(ExtInt::NegInf),
            },
        }
    }
}

impl Term {
    /// `None` when the value is undefined, such as infinity minus infinity.
    pub fn eval(&self, values: &[Value]) -> Option<ExtInt> {
        match self {
            Term::Const(c) => Some(ExtInt::Fin(*c as i128)),
            Term::Feature(f) => Some(match values[*f] {
                Value::Bool(b) => ExtInt::Fin(b as i128),
                Value::Num(crate::features::Num::Fin(n)) => ExtInt::Fin(n as i128),
                Value::Num(crate::features::Num::Inf) => ExtInt::PosInf,
            }),
            Term::Neg(t) => Some(t.eval(values)?.neg()),
            Term::Add(a, b) => a.eval(values)?.add(b.eval(values)?),
            Term::Sub(a, b) => a.eval(values)?.add(b.eval(values)?.neg()),
            Term::Mul(a, b) => a.eval(values)?.mul(b.eval(values)?),
        }
    }
}

/// A tuple of terms ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub names: Vec<String>,
    pub features: Vec<Feature>,
    pub terms: Vec<Term>,
}

impl Certificate {
    fn rank(&self, values: &[Value], state: StateId) -> Result<Vec<ExtInt>, VerifierError> {
        self.terms.iter().enumerate().map(|(i, t)| t.eval(values).ok_or(VerifierError::CertificateUndefined { state, term: i })).collect()
    }
}

struct TermParser<'a> {
    text: &'a [u8],
    pos: usize,
    names: &'a [String],
}

impl TermParser<'_> {
    fn skip(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.text.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Term, String> {
        let mut t = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.product()?;
            t = if c == b'+' { Term::Add(Box::new(t), Box::new(r)) } else { Term::Sub(Box::new(t), Box::new(r)) };
        }
        Ok(t)
    }

    fn product(&mut self) -> Result<Term, String> {
        let mut t = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            t = Term::Mul(Box::new(t), Box::new(self.unary()?));
        }
        Ok(t)
    }

    fn unary(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Term::Neg(Box::new(self.unary()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(format!("expected `)` at column {}", self.pos + 1));
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
                digits.parse().map(Term::Const).map_err(|e| format!("bad integer `{digits}`: {e}"))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.text.len() && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
                self.names.iter().position(|n| n == name).map(Term::Feature).ok_or_else(|| format!("unknown feature `{name}`"))
            }
            _ => Err(format!("unexpected input at column {}", self.pos + 1)),
        }
    }
}

/// Parses `feature <id> <expr>` and `term <arithmetic>` lines.
pub fn parse_certificate(text: &str) -> Result<Certificate, VerifierError> {
    let mut cert = Certificate { names: vec![], features: vec![], terms: vec![] };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        let err = |message: String| VerifierError::Format { line: i + 1, message };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("feature ") {
            let (name, expr) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| err("expected `feature <id> <expr>`".into()))?;
            if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || name.starts_with(|c: char| c.is_ascii_digit()) {
                return Err(err(format!("invalid feature name `{name}`")));
            }
            if cert.names.iter().any(|n| n == name) {
                return Err(err(format!("duplicate feature `{name}`")));
            }
            cert.features.push(parse_feature(expr.trim()).map_err(|e| err(e.to_string()))?);
            cert.names.push(name.into());
        } else if let Some(rest) = line.strip_prefix("term ") {
            let mut p = TermParser { text: rest.as_bytes(), pos: 0, names: &cert.names };
            let t = p.expr().map_err(&err)?;
            if p.peek().is_some() {
                return Err(err(format!("trailing input at column {}", p.pos + 1)));
            }
            cert.terms.push(t);
        } else {
            return Err(err(format!("unrecognized line `{line}`")));
        }
    }
    if cert.terms.is_empty() {
        return Err(VerifierError::Format { line: 0, message: "certificate has no terms".into() });
    }
    Ok(cert)
}

/// Why a certificate check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateFailure {
    /// A trajectory of the policy visits a dead state.
    DeadEnd(Trajectory),
    /// An alive state where the policy selects nothing.
    Incomplete(StateId),
    /// A selected action none of whose outcomes decreases the ranking.
    NotDescending { state: StateId, action: ActionId },
}

/// Checks that the policy is dead-end free, complete and descending over the
/// certificate on the states it reaches. Returns the first failure found.
pub fn certificate_failure(policy: &ConcretePolicy, model: &FondModel, cert: &Certificate) -> Result<Option<CertificateFailure>, VerifierError> {
    let labels = model.labels.as_deref().ok_or(VerifierError::ModelUnlabeled)?;
    let ev = StateEvaluator::new(&model.task, &cert.features).map_err(PolicyError::from)?;
    let g = explore(policy, model, labels);
    if let Some(&d) = g.order.iter().find(|&&s| labels[s] == Label::Dead) {
        return Ok(Some(CertificateFailure::DeadEnd(path_to(&g.parent, d))));
    }
    let mut ranks: HashMap<StateId, Vec<ExtInt>> = HashMap::new();
    let mut rank = |s: StateId| -> Result<Vec<ExtInt>, VerifierError> {
        if let Some(r) = ranks.get(&s) {
            return Ok(r.clone());
        }
        let r = cert.rank(&ev.values(&model.states[s]).map_err(PolicyError::from)?, s)?;
        ranks.insert(s, r.clone());
        Ok(r)
    };
    for &s in g.order.iter().filter(|&&s| labels[s] == Label::Alive) {
        let mut any = false;
        let rs = rank(s)?;
        for t in selected(policy, model, s) {
            any = true;
            let mut descends = false;
            for &o in &t.outcomes {
                if rank(o)? < rs {
                    descends = true;
                    break;
                }
            }
            if !descends {
                return Ok(Some(CertificateFailure::NotDescending { state: s, action: t.action }));
            }
        }
        if !any {
            return Ok(Some(CertificateFailure::Incomplete(s)));
        }
    }
    Ok(None)
}

pub fn check_descending_certificate(policy: &ConcretePolicy, model: &FondModel, cert: &Certificate) -> Result<bool, VerifierError> {
    Ok(certificate_failure(policy, model, cert)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Num;
    use crate::pddl::GroundTask;
    use crate::state_space::Transition;
    use std::sync::Arc;

    fn labeled(n: usize, goals: &[usize], dead: &[usize], edges: &[(usize, usize, &[usize])]) -> FondModel {
        let task = Arc::new(GroundTask {
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
        });
        let mut transitions = vec![Vec::new(); n];
        for &(s, a, outs) in edges {
            transitions[s].push(Transition { action: a, outcomes: outs.to_vec() });
        }
        let states = (0..n).map(|i| vec![i]).collect();
        let is_goal = (0..n).map(|i| goals.contains(&i)).collect();
        let mut m = FondModel::from_parts(task, states, 0, is_goal, transitions);
        m.labels = Some(
            (0..n)
                .map(|s| {
                    if goals.contains(&s) {
                        Label::Goal
                    } else if dead.contains(&s) {
                        Label::Dead
                    } else {
                        Label::Alive
                    }
                })
                .collect(),
        );
        m
    }

    fn pol(actions: &[&[usize]]) -> ConcretePolicy {
        ConcretePolicy::from_actions(actions.iter().map(|a| a.to_vec()).collect())
    }

    #[test]
    fn cycles_with_an_exit_are_fine() {
        let m = labeled(3, &[2], &[], &[(0, 0, &[0, 1]), (1, 0, &[0, 2])]);
        let v = verify_strong_cyclic(&pol(&[&[0], &[0], &[]]), &m).unwrap();
        assert_eq!(v, Verdict { solved: true, reason: Reason::Ok });
    }

    #[test]
    fn dead_end_witness_replays() {
        let m = labeled(4, &[2], &[3], &[(0, 0, &[1]), (1, 5, &[2, 3]), (1, 6, &[2])]);
        let v = verify_strong_cyclic(&pol(&[&[0], &[5], &[], &[]]), &m).unwrap();
        let Reason::ReachesDeadEnd(t) = v.reason else { panic!("{v:?}") };
        assert_eq!(t.states, vec![0, 1, 3]);
        assert!(t.replays_on(&m));
        assert!(verify_strong_cyclic(&pol(&[&[0], &[6], &[], &[]]), &m).unwrap().solved);
    }

    #[test]
    fn livelock_and_stuck_are_distinguished() {
        // 0 -> {1}; 1 <-> 0 under the policy, the exit from 1 is not selected
        let m = labeled(3, &[2], &[], &[(0, 0, &[1]), (1, 0, &[0]), (1, 1, &[2])]);
        let v = verify_strong_cyclic(&pol(&[&[0], &[0], &[]]), &m).unwrap();
        assert_eq!(v.reason, Reason::UnfairLivelock(vec![0, 1]));
        let v = verify_strong_cyclic(&pol(&[&[0], &[], &[]]), &m).unwrap();
        assert!(matches!(v.reason, Reason::Stuck(ref t) if t.last() == 1));
    }

    #[test]
    fn initial_goal_is_solved_by_anything() {
        let m = labeled(1, &[0], &[], &[]);
        assert!(verify_strong_cyclic(&pol(&[&[]]), &m).unwrap().solved);
    }

    #[test]
    fn unlabeled_model_is_rejected() {
        let mut m = labeled(1, &[0], &[], &[]);
        m.labels = None;
        assert_eq!(verify_strong_cyclic(&pol(&[&[]]), &m), Err(VerifierError::ModelUnlabeled));
    }

    #[test]
    fn terms_parse_and_evaluate() {
        let cert = parse_certificate("feature U bool:nullary(up)\nfeature d num:count(p_0)\nterm 1 - U\nterm -(1 - U) * d\nterm d\n").unwrap();
        let vals = [Value::Bool(false), Value::Num(Num::Fin(4))];
        let r: Vec<_> = cert.terms.iter().map(|t| t.eval(&vals).unwrap()).collect();
        assert_eq!(r, vec![ExtInt::Fin(1), ExtInt::Fin(-4), ExtInt::Fin(4)]);
        let inf = [Value::Bool(true), Value::Num(Num::Inf)];
        assert_eq!(cert.terms[1].eval(&inf), None);
        assert_eq!(cert.terms[2].eval(&inf), Some(ExtInt::PosInf));
        let inf0 = [Value::Bool(false), Value::Num(Num::Inf)];
        assert_eq!(cert.terms[1].eval(&inf0), Some(ExtInt::NegInf));
    }

    #[test]
    fn certificate_format_errors() {
        for (text, line) in
            [("term x\n", 1), ("feature a num:count(p_0)\nterm a +\n", 2), ("feature a num:count(p_0)\nterm (a\n", 2), ("nonsense\n", 1), ("", 0)]
        {
            assert!(matches!(parse_certificate(text), Err(VerifierError::Format { line: l, .. }) if l == line), "{text}");
        }
    }
}
