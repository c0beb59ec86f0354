//! Exact min-cost solving with incremental SAT.
//!
//! The cost bound is a weighted sequential counter whose output literals are
//! assumed, so one solver instance serves every bound. Clauses that are only
//! checked on candidate models are added when violated and stay in the
//! solver, since they belong to the theory.

use super::theory::Theory;
use super::theory::{Lit, Var};
use super::{LearnError, Variant};
use crate::state_space::Label;
use cadical::{Callbacks, Solver};
use std::collections::HashMap;
use std::time::Instant;

/// A model of the theory restricted to the feature and transition variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub select: Vec<bool>,
    /// Per transition class.
    pub good: Vec<bool>,
    pub cost: u64,
}

impl Assignment {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.select.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

/// Stops the solver once the deadline has passed.
struct Deadline(Option<Instant>);

impl Callbacks for Deadline {
    fn terminate(&mut self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}

struct Search<'t> {
    theory: &'t Theory,
    solver: Solver<Deadline>,
    num_vars: usize,
    deadline: Option<Instant>,
}

impl Search<'_> {
    fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        self.num_vars as Var
    }

    fn check_time(&self) -> Result<(), LearnError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(LearnError::TimeLimit),
            _ => Ok(()),
        }
    }

    /// Solves under `assumptions` until a model satisfying the whole theory
    /// is found or the solver reports unsatisfiability. Models are indexed by
    /// variable number.
    fn solve(&mut self, assumptions: &[Lit]) -> Result<Option<Vec<bool>>, LearnError> {
        loop {
            self.check_time()?;
            match self.solver.solve_with(assumptions.iter().copied()) {
                None => return Err(LearnError::TimeLimit),
                Some(false) => return Ok(None),
                Some(true) => {}
            }
            let model: Vec<bool> = (0..=self.num_vars as Var).map(|v| v > 0 && self.solver.value(v) == Some(true)).collect();
            let cuts = self.violated(&model);
            if cuts.is_empty() {
                return Ok(Some(model));
            }
            for cut in cuts {
                self.add_cut(cut);
            }
        }
    }

    fn add_cut(&mut self, cut: Cut) {
        match cut {
            Cut::Clause(c) => self.solver.add_clause(c),
            Cut::Unfounded(groups) => {
                // one of the states must have all listed classes non-good
                let mut outer = Vec::new();
                for classes in groups {
                    let z = self.new_var();
                    for c in classes {
                        self.solver.add_clause([-z, -self.theory.good[c]]);
                    }
                    outer.push(z);
                }
                self.solver.add_clause(outer);
            }
        }
    }

    fn violated(&self, model: &[bool]) -> Vec<Cut> {
        let t = self.theory;
        let select: Vec<bool> = t.select.iter().map(|v| model[*v as usize]).collect();
        let good: Vec<bool> = t.good.iter().map(|v| model[*v as usize]).collect();
        let mut cuts = Vec::new();
        // (8): classes that look alike under the selected features must agree on Good
        let mut groups: HashMap<Vec<u8>, (Vec<usize>, Vec<usize>)> = HashMap::new();
        for (c, class) in t.classes.iter().enumerate() {
            let key: Vec<u8> =
                select.iter().enumerate().filter(|(_, &s)| s).map(|(f, _)| (((class.bits[f / 64] >> (f % 64)) & 1) as u8) << 2 | class.delta[f]).collect();
            let e = groups.entry(key).or_default();
            if good[c] {
                e.0.push(c);
            } else {
                e.1.push(c);
            }
        }
        let mut keys: Vec<_> = groups.keys().cloned().collect();
        keys.sort();
        for k in keys {
            let (g, ng) = &groups[&k];
            for &x in g {
                for &y in ng {
                    cuts.push(Cut::Clause(t.separation_clause(x, y)));
                }
            }
        }
        if t.variant == Variant::SafeLabeled && cuts.is_empty() {
            cuts.extend(unfounded_sets(t, &good).into_iter().map(Cut::Unfounded));
        }
        cuts
    }
}

enum Cut {
    Clause(Vec<Lit>),
    /// For each state of an unfounded set, the good classes it depends on.
    Unfounded(Vec<Vec<usize>>),
}

/// Labels states safe from the goals backwards: an alive state is safe once
/// every action behind each of its good transitions has a safe outcome. The
/// alive states left over contain unfounded sets; for each bottom strongly
/// connected component K of the dependencies among them, returns per state
/// in K the classes whose actions have all outcomes in K or dead.
fn unfounded_sets(t: &Theory, good: &[bool]) -> Vec<Vec<Vec<usize>>> {
    let n = t.states.len();
    let mut safe: Vec<bool> = t.states.iter().map(|s| s.label == Label::Goal).collect();
    let mut alive: Vec<usize> = t.obligations.keys().copied().collect();
    alive.sort_unstable();
    loop {
        let mut changed = false;
        for &s in &alive {
            if !safe[s] && t.obligations[&s].iter().filter(|o| good[o.class]).all(|o| o.outcomes.iter().any(|&x| safe[x])) {
                safe[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unsafe_states: Vec<usize> = alive.iter().copied().filter(|&s| !safe[s]).collect();
    if unsafe_states.is_empty() {
        return Vec::new();
    }
    let in_u = {
        let mut v = vec![false; n];
        for &s in &unsafe_states {
            v[s] = true;
        }
        v
    };
    // edges s -> x for outcomes x of blocked good obligations of s
    let succ = |s: usize| -> Vec<usize> {
        let mut out: Vec<usize> = t.obligations[&s]
            .iter()
            .filter(|o| good[o.class] && !o.outcomes.iter().any(|&x| safe[x]))
            .flat_map(|o| o.outcomes.iter().copied().filter(|&x| in_u[x]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let sccs = tarjan(&unsafe_states, &succ);
    let mut comp_of = vec![usize::MAX; n];
    for (i, c) in sccs.iter().enumerate() {
        for &s in c {
            comp_of[s] = i;
        }
    }
    let mut result = Vec::new();
    for (i, comp) in sccs.iter().enumerate() {
        if comp.iter().any(|&s| succ(s).iter().any(|&x| comp_of[x] != i)) {
            continue;
        }
        let in_k = |x: usize| comp_of[x] == i || t.states[x].label == Label::Dead;
        let groups = comp
            .iter()
            .map(|&s| {
                let mut cs: Vec<usize> = t.obligations[&s].iter().filter(|o| o.outcomes.iter().all(|&x| in_k(x))).map(|o| o.class).collect();
                cs.sort_unstable();
                cs.dedup();
                cs
            })
            .collect();
        result.push(groups);
    }
    result
}

/// Strongly connected components, in the order Tarjan's algorithm closes them.
fn tarjan(nodes: &[usize], succ: &dyn Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut low: HashMap<usize, usize> = HashMap::new();
    let mut on_stack: HashMap<usize, bool> = HashMap::new();
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for &root in nodes {
        if index.contains_key(&root) {
            continue;
        }
        // iterative DFS: (node, successors, next position)
        let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index.insert(root, counter);
        low.insert(root, counter);
        counter += 1;
        stack.push(root);
        on_stack.insert(root, true);
        while let Some((v, ss, i)) = work.last_mut() {
            let v = *v;
            if *i < ss.len() {
                let w = ss[*i];
                *i += 1;
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(w) {
                    e.insert(counter);
                    low.insert(w, counter);
                    counter += 1;
                    stack.push(w);
                    on_stack.insert(w, true);
                    work.push((w, succ(w), 0));
                } else if on_stack.get(&w) == Some(&true) {
                    let m = low[&v].min(index[&w]);
                    low.insert(v, m);
                }
            } else {
                work.pop();
                if let Some((p, _, _)) = work.last() {
                    let m = low[p].min(low[&v]);
                    low.insert(*p, m);
                }
                if low[&v] == index[&v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack.insert(w, false);
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Weighted sequential counter: `out[j]` is implied whenever the weighted sum
/// of the inputs is at least `j + 1`, for `j` up to `k`.
fn counter(search: &mut Search<'_>, inputs: &[(Lit, u64)], k: u64) -> Vec<Lit> {
    if k == 0 {
        return Vec::new();
    }
    let width = (k + 1) as usize;
    let mut prev: Vec<Lit> = Vec::new();
    for &(x, w) in inputs {
        let cur: Vec<Lit> = (0..width).map(|_| search.new_var()).collect();
        for &c in cur.iter().take(w as usize) {
            search.solver.add_clause([-x, c]);
        }
        for j in 0..prev.len() {
            search.solver.add_clause([-prev[j], cur[j]]);
            let up = (j + w as usize).min(width - 1);
            search.solver.add_clause([-x, -prev[j], cur[up]]);
        }
        prev = cur;
    }
    prev
}

const INITIAL_WIDTH: u64 = 16;

/// Assumptions meaning "cost <= b" for a counter built with width at least `b`.
fn at_most(t: &Theory, out: &[Lit], b: u64) -> Vec<Lit> {
    if b == 0 {
        t.select.iter().map(|&v| -v).collect()
    } else {
        vec![-out[b as usize]]
    }
}

fn assignment(t: &Theory, model: &[bool]) -> Assignment {
    let select: Vec<bool> = t.select.iter().map(|v| model[*v as usize]).collect();
    let cost = select.iter().zip(&t.weights).filter(|(s, _)| **s).map(|(_, w)| w).sum();
    Assignment { select, good: t.good.iter().map(|v| model[*v as usize]).collect(), cost }
}

/// Finds a minimum-cost model, or `None` if there is none. With an upper
/// bound only models of strictly smaller cost count. Among optimal models
/// the one whose Select vector is lexicographically smallest in pool order
/// (false before true) is returned.
pub fn solve_min_cost(theory: &Theory, cost_upper_bound: Option<u64>) -> Result<Option<Assignment>, LearnError> {
    solve_min_cost_until(theory, cost_upper_bound, None)
}

pub fn solve_min_cost_until(theory: &Theory, cost_upper_bound: Option<u64>, deadline: Option<Instant>) -> Result<Option<Assignment>, LearnError> {
    let mut solver = Solver::new();
    solver.set_callbacks(Some(Deadline(deadline)));
    let mut s = Search { theory, solver, num_vars: theory.num_vars, deadline };
    for c in &theory.clauses {
        s.solver.add_clause(c.iter().copied());
    }
    let Some(first) = s.solve(&[])? else { return Ok(None) };
    let mut best = assignment(theory, &first);
    if cost_upper_bound == Some(0) {
        return Ok(None);
    }
    let limit = match cost_upper_bound {
        Some(ub) => best.cost.min(ub - 1),
        None => best.cost,
    };
    let inputs: Vec<(Lit, u64)> = (0..theory.select.len()).filter(|&f| !theory.redundant[f]).map(|f| (theory.select[f], theory.weights[f])).collect();
    let mut found = cost_upper_bound.is_none_or(|ub| best.cost < ub);
    let mut model = first;
    // the counter is sized by the bound tried first, growing while infeasible
    let mut width = limit.min(INITIAL_WIDTH);
    let mut out = counter(&mut s, &inputs, width);
    while !(found && best.cost <= width) {
        match s.solve(&at_most(theory, &out, width))? {
            Some(m) => {
                best = assignment(theory, &m);
                model = m;
                found = true;
            }
            None if width == limit => return Ok(None),
            None => {
                width = (width * 2).min(limit);
                out = counter(&mut s, &inputs, width);
            }
        }
    }
    while best.cost > 0 {
        match s.solve(&at_most(theory, &out, best.cost - 1))? {
            Some(m) => {
                best = assignment(theory, &m);
                model = m;
            }
            None => break,
        }
    }
    // every optimal Select vector, then the lexicographically smallest
    let bound = at_most(theory, &out, best.cost);
    let mut optimal = vec![model];
    loop {
        let last = optimal.last().expect("non-empty");
        let block: Vec<Lit> = theory.select.iter().filter(|&&v| last[v as usize]).map(|&v| -v).collect();
        if block.is_empty() {
            break;
        }
        s.solver.add_clause(block);
        match s.solve(&bound)? {
            Some(m) => optimal.push(m),
            None => break,
        }
    }
    let key = |m: &Vec<bool>| -> Vec<bool> { theory.select.iter().map(|v| m[*v as usize]).collect() };
    let model = optimal.into_iter().min_by_key(key).expect("non-empty");
    Ok(Some(assignment(theory, &model)))
}
