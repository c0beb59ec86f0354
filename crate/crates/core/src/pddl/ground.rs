//! Grounding with relaxed-reachability pruning, plus all-outcome determinization.

use super::*;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;

pub type AtomId = usize;
pub type ActionId = usize;

/// Suffix of goal-copy predicates: `p_G(o..)` holds iff `p(o..)` is a goal atom.
pub const GOAL_SUFFIX: &str = "_G";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub pred: usize,
    pub args: Vec<usize>,
}

/// One deterministic outcome; `del` never intersects `add`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<usize>,
    /// Fluent atoms that must hold.
    pub pre: Vec<AtomId>,
    /// Fluent atoms that must not hold.
    pub pre_neg: Vec<AtomId>,
    pub outcomes: Vec<Outcome>,
    /// For determinized actions: the parent action and outcome index.
    pub origin: Option<(ActionId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTask {
    pub domain_name: String,
    pub problem_name: String,
    pub objects: Vec<String>,
    pub constants: Vec<String>,
    /// `(name, arity)`; domain predicates first, then their goal copies.
    pub predicates: Vec<(String, usize)>,
    pub atoms: Vec<GroundAtom>,
    pub is_static: Vec<bool>,
    pub static_true: Vec<AtomId>,
    /// Fluent atoms true in the initial state, sorted.
    pub init: Vec<AtomId>,
    /// Fluent goal atoms, sorted.
    pub goal: Vec<AtomId>,
    /// False when some static goal atom does not hold.
    pub static_goal_holds: bool,
    pub actions: Vec<GroundAction>,
}

type Fact = (usize, Vec<usize>);

struct Grounder<'a> {
    domain: &'a Domain,
    objects: Vec<String>,
    object_types: Vec<String>,
    object_index: HashMap<String, usize>,
    pred_index: HashMap<String, usize>,
    init: HashSet<Fact>,
    static_preds: HashSet<usize>,
}

struct Candidate {
    schema: usize,
    args: Vec<usize>,
    pre: Vec<Fact>,
    pre_neg: Vec<Fact>,
    outcomes: Vec<(Vec<Fact>, Vec<Fact>)>,
}

pub fn ground_task(domain: &Domain, problem: &Problem) -> Result<GroundTask, PddlError> {
    let mut objects = Vec::new();
    let mut object_types = Vec::new();
    let mut object_index = HashMap::new();
    for o in domain.constants.iter().chain(&problem.objects) {
        if object_index.insert(o.name.clone(), objects.len()).is_some() {
            return Err(PddlError::Type(format!("object `{}` declared twice", o.name)));
        }
        objects.push(o.name.clone());
        object_types.push(o.ty.clone());
    }
    let mut predicates: Vec<(String, usize)> = domain.predicates.iter().map(|p| (p.name.clone(), p.params.len())).collect();
    let n_base = predicates.len();
    for i in 0..n_base {
        let (name, arity) = predicates[i].clone();
        predicates.push((format!("{name}{GOAL_SUFFIX}"), arity));
    }
    let pred_index: HashMap<String, usize> = predicates.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
    let fact_of = |f: &FactExpr| -> Result<Fact, PddlError> {
        let p = *pred_index.get(&f.pred).ok_or_else(|| PddlError::Type(format!("undeclared predicate `{}`", f.pred)))?;
        let args =
            f.args.iter().map(|a| object_index.get(a).copied().ok_or_else(|| PddlError::Type(format!("undeclared object `{a}`")))).collect::<Result<_, _>>()?;
        Ok((p, args))
    };
    let init: HashSet<Fact> = problem.init.iter().map(fact_of).collect::<Result<_, _>>()?;
    let goal: Vec<Fact> = problem.goal.iter().map(fact_of).collect::<Result<_, _>>()?;

    let mut effect_preds = HashSet::new();
    for a in &domain.actions {
        for l in a.effect.always.iter().chain(a.effect.oneof.iter().flatten().flatten()) {
            effect_preds.insert(pred_index[&l.atom.pred]);
        }
    }
    let static_preds = (0..predicates.len()).filter(|p| !effect_preds.contains(p)).collect();
    let g = Grounder { domain, objects, object_types, object_index, pred_index, init, static_preds };

    let mut candidates = Vec::new();
    for (si, schema) in domain.actions.iter().enumerate() {
        g.enumerate(si, schema, &mut candidates)?;
    }

    // Delete-relaxed reachability from the initial state.
    let mut reached: HashSet<Fact> = g.init.clone();
    let mut alive = vec![false; candidates.len()];
    loop {
        let mut changed = false;
        for (i, c) in candidates.iter().enumerate() {
            if alive[i] || !c.pre.iter().all(|f| reached.contains(f)) {
                continue;
            }
            alive[i] = true;
            changed = true;
            for (add, _) in &c.outcomes {
                for f in add {
                    reached.insert(f.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<Candidate> = candidates.into_iter().zip(alive).filter(|(_, a)| *a).map(|(c, _)| c).collect();

    let mut fluent: HashSet<Fact> = HashSet::new();
    for c in &kept {
        for (add, del) in &c.outcomes {
            fluent.extend(add.iter().cloned());
            fluent.extend(del.iter().cloned());
        }
    }
    let mut universe: HashSet<Fact> = HashSet::new();
    universe.extend(g.init.iter().cloned());
    universe.extend(goal.iter().cloned());
    universe.extend(fluent.iter().cloned());
    for c in &kept {
        universe.extend(c.pre.iter().cloned());
        universe.extend(c.pre_neg.iter().filter(|f| fluent.contains(*f) || g.init.contains(*f)).cloned());
    }
    for (p, args) in &goal {
        universe.insert((p + n_base, args.clone()));
    }
    let mut sorted: Vec<Fact> = universe.into_iter().collect();
    sorted.sort_by(|a, b| {
        let ka = (&predicates[a.0].0, a.1.iter().map(|&o| &g.objects[o]).collect::<Vec<_>>());
        let kb = (&predicates[b.0].0, b.1.iter().map(|&o| &g.objects[o]).collect::<Vec<_>>());
        ka.cmp(&kb)
    });
    let atom_id: HashMap<Fact, AtomId> = sorted.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let goal_copies: HashSet<Fact> = goal.iter().map(|(p, a)| (p + n_base, a.clone())).collect();
    let is_static: Vec<bool> = sorted.iter().map(|f| !fluent.contains(f)).collect();
    let static_true: Vec<AtomId> =
        sorted.iter().enumerate().filter(|(i, f)| is_static[*i] && (g.init.contains(*f) || goal_copies.contains(*f))).map(|(i, _)| i).collect();
    let holds_statically = |f: &Fact| g.init.contains(f);

    let mut actions = Vec::new();
    'actions: for c in kept {
        let mut pre = BTreeSet::new();
        for f in &c.pre {
            if fluent.contains(f) {
                pre.insert(atom_id[f]);
            } else if !holds_statically(f) {
                continue 'actions;
            }
        }
        let mut pre_neg = BTreeSet::new();
        for f in &c.pre_neg {
            if fluent.contains(f) {
                pre_neg.insert(atom_id[f]);
            } else if holds_statically(f) {
                continue 'actions;
            }
        }
        let mut outcomes: Vec<Outcome> = Vec::new();
        for (add, del) in &c.outcomes {
            let add: BTreeSet<AtomId> = add.iter().map(|f| atom_id[f]).collect();
            let del: BTreeSet<AtomId> = del.iter().map(|f| atom_id[f]).filter(|a| !add.contains(a)).collect();
            let o = Outcome { add: add.into_iter().collect(), del: del.into_iter().collect() };
            if !outcomes.contains(&o) {
                outcomes.push(o);
            }
        }
        actions.push(GroundAction {
            schema: domain.actions[c.schema].name.clone(),
            args: c.args,
            pre: pre.into_iter().collect(),
            pre_neg: pre_neg.into_iter().collect(),
            outcomes,
            origin: None,
        });
    }

    let mut init_ids: Vec<AtomId> = g.init.iter().filter(|f| fluent.contains(*f)).map(|f| atom_id[f]).collect();
    init_ids.sort_unstable();
    let mut goal_ids: Vec<AtomId> = goal.iter().filter(|f| fluent.contains(*f)).map(|f| atom_id[f]).collect();
    goal_ids.sort_unstable();
    goal_ids.dedup();
    let static_goal_holds = goal.iter().filter(|f| !fluent.contains(*f)).all(|f| g.init.contains(f));

    Ok(GroundTask {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        objects: g.objects,
        constants: domain.constants.iter().map(|c| c.name.clone()).collect(),
        predicates,
        atoms: sorted.into_iter().map(|(pred, args)| GroundAtom { pred, args }).collect(),
        is_static,
        static_true,
        init: init_ids,
        goal: goal_ids,
        static_goal_holds,
        actions,
    })
}

impl<'a> Grounder<'a> {
    fn resolve(&self, t: &Term, params: &[TypedName], binding: &[usize]) -> Option<usize> {
        match t {
            Term::Const(c) => self.object_index.get(c).copied(),
            Term::Var(v) => {
                let i = params.iter().position(|p| &p.name == v)?;
                binding.get(i).copied()
            }
        }
    }

    fn fact(&self, a: &AtomExpr, params: &[TypedName], binding: &[usize]) -> Option<Fact> {
        let args = a.args.iter().map(|t| self.resolve(t, params, binding)).collect::<Option<Vec<_>>>()?;
        Some((self.pred_index[&a.pred], args))
    }

    /// Evaluates a precondition literal once all its terms are bound; `None` while unbound
    /// or when it depends on a fluent predicate.
    fn static_check(&self, c: &Condition, params: &[TypedName], binding: &[usize]) -> Option<bool> {
        match c {
            Condition::Equal(x, y, positive) => {
                let x = self.resolve(x, params, binding)?;
                let y = self.resolve(y, params, binding)?;
                Some((x == y) == *positive)
            }
            Condition::Atom(a, positive) => {
                let f = self.fact(a, params, binding)?;
                if !self.static_preds.contains(&f.0) {
                    return None;
                }
                Some(self.init.contains(&f) == *positive)
            }
        }
    }

    fn enumerate(&self, si: usize, schema: &ActionSchema, out: &mut Vec<Candidate>) -> Result<(), PddlError> {
        let domain = self.domain;
        let choices: Vec<Vec<usize>> =
            schema.params.iter().map(|p| (0..self.objects.len()).filter(|&o| domain.is_subtype(&self.object_types[o], &p.ty)).collect()).collect();
        let mut binding = Vec::with_capacity(schema.params.len());
        self.extend(si, schema, &choices, &mut binding, out);
        Ok(())
    }

    fn extend(&self, si: usize, schema: &ActionSchema, choices: &[Vec<usize>], binding: &mut Vec<usize>, out: &mut Vec<Candidate>) {
        let depth = binding.len();
        if depth == choices.len() {
            self.instantiate(si, schema, binding, out);
            return;
        }
        for &o in &choices[depth] {
            binding.push(o);
            // Prune on literals that just became fully bound.
            let ok = schema.precondition.iter().all(|c| {
                let bound_now = condition_vars(c).iter().all(|v| schema.params.iter().position(|p| &p.name == *v).is_some_and(|i| i <= depth))
                    && condition_vars(c).iter().any(|v| schema.params.iter().position(|p| &p.name == *v) == Some(depth));
                !bound_now || self.static_check(c, &schema.params, binding) != Some(false)
            });
            if ok {
                self.extend(si, schema, choices, binding, out);
            }
            binding.pop();
        }
    }

    fn instantiate(&self, si: usize, schema: &ActionSchema, binding: &[usize], out: &mut Vec<Candidate>) {
        let params = &schema.params;
        let mut pre = Vec::new();
        let mut pre_neg = Vec::new();
        for c in &schema.precondition {
            match self.static_check(c, params, binding) {
                Some(false) => return,
                Some(true) => {}
                None => {
                    if let Condition::Atom(a, positive) = c {
                        let f = self.fact(a, params, binding).expect("bound");
                        if *positive {
                            pre.push(f);
                        } else {
                            pre_neg.push(f);
                        }
                    }
                }
            }
        }
        let always: Vec<(bool, Fact)> = schema.effect.always.iter().map(|l| (l.positive, self.fact(&l.atom, params, binding).expect("bound"))).collect();
        let mut combos: Vec<Vec<(bool, Fact)>> = vec![always];
        for group in &schema.effect.oneof {
            let mut next = Vec::new();
            for base in &combos {
                for branch in group {
                    let mut c = base.clone();
                    c.extend(branch.iter().map(|l| (l.positive, self.fact(&l.atom, params, binding).expect("bound"))));
                    next.push(c);
                }
            }
            combos = next;
        }
        let outcomes = combos
            .into_iter()
            .map(|lits| {
                let add = lits.iter().filter(|(p, _)| *p).map(|(_, f)| f.clone()).collect();
                let del = lits.iter().filter(|(p, _)| !*p).map(|(_, f)| f.clone()).collect();
                (add, del)
            })
            .collect();
        out.push(Candidate { schema: si, args: binding.to_vec(), pre, pre_neg, outcomes });
    }
}

fn condition_vars(c: &Condition) -> Vec<&String> {
    let terms: Vec<&Term> = match c {
        Condition::Atom(a, _) => a.args.iter().collect(),
        Condition::Equal(x, y, _) => vec![x, y],
    };
    terms
        .into_iter()
        .filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
        .collect()
}

/// Splits every action into one deterministic action per outcome. Single-outcome
/// actions keep their name; the others gain an `_i` suffix. `origin` records the parent.
pub fn determinize(task: &GroundTask) -> GroundTask {
    let mut actions = Vec::new();
    for (ai, a) in task.actions.iter().enumerate() {
        for (oi, o) in a.outcomes.iter().enumerate() {
            let schema = if a.outcomes.len() == 1 { a.schema.clone() } else { format!("{}_{oi}", a.schema) };
            actions.push(GroundAction {
                schema,
                args: a.args.clone(),
                pre: a.pre.clone(),
                pre_neg: a.pre_neg.clone(),
                outcomes: vec![o.clone()],
                origin: Some((ai, oi)),
            });
        }
    }
    GroundTask { actions, ..task.clone() }
}

impl GroundTask {
    pub fn atom_name(&self, id: AtomId) -> String {
        let a = &self.atoms[id];
        let args: Vec<&str> = a.args.iter().map(|&o| self.objects[o].as_str()).collect();
        format!("{}({})", self.predicates[a.pred].0, args.join(","))
    }

    pub fn action_name(&self, id: ActionId) -> String {
        let a = &self.actions[id];
        let args: Vec<&str> = a.args.iter().map(|&o| self.objects[o].as_str()).collect();
        format!("{}({})", a.schema, args.join(","))
    }

    pub fn is_deterministic(&self) -> bool {
        self.actions.iter().all(|a| a.outcomes.len() == 1)
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|(n, _)| n == name)
    }

    /// `state` is a sorted list of true fluent atoms.
    pub fn applicable(&self, state: &[AtomId], action: ActionId) -> bool {
        let a = &self.actions[action];
        a.pre.iter().all(|p| state.binary_search(p).is_ok()) && a.pre_neg.iter().all(|p| state.binary_search(p).is_err())
    }

    pub fn apply(&self, state: &[AtomId], outcome: &Outcome) -> Vec<AtomId> {
        let mut next: Vec<AtomId> = state.iter().copied().filter(|a| outcome.del.binary_search(a).is_err()).collect();
        for &a in &outcome.add {
            if let Err(pos) = next.binary_search(&a) {
                next.insert(pos, a);
            }
        }
        next
    }

    pub fn is_goal(&self, state: &[AtomId]) -> bool {
        self.static_goal_holds && self.goal.iter().all(|g| state.binary_search(g).is_ok())
    }

    /// Versioned, line-oriented dump of the ground task.
    pub fn dump(&self) -> String {
        let mut s = String::from("# ground-task v1\n");
        writeln!(s, "domain {}\nproblem {}", self.domain_name, self.problem_name).unwrap();
        writeln!(s, "atoms {}", self.atoms.len()).unwrap();
        for i in 0..self.atoms.len() {
            let tag = if self.is_static[i] { " [static]" } else { "" };
            writeln!(s, "#{i} {}{tag}", self.atom_name(i)).unwrap();
        }
        let ids = |v: &[AtomId]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "static-true {}", ids(&self.static_true)).unwrap();
        writeln!(s, "init {}", ids(&self.init)).unwrap();
        writeln!(s, "goal {}", ids(&self.goal)).unwrap();
        writeln!(s, "actions {}", self.actions.len()).unwrap();
        for i in 0..self.actions.len() {
            let a = &self.actions[i];
            writeln!(s, "action {i} {}", self.action_name(i)).unwrap();
            if let Some((p, o)) = a.origin {
                writeln!(s, "  origin {p} {o}").unwrap();
            }
            writeln!(s, "  pre {}", ids(&a.pre)).unwrap();
            writeln!(s, "  pre-neg {}", ids(&a.pre_neg)).unwrap();
            for (k, o) in a.outcomes.iter().enumerate() {
                writeln!(s, "  outcome {k} add {} del {}", ids(&o.add), ids(&o.del)).unwrap();
            }
        }
        s
    }
}
