//! Construction of the min-cost theory over sampled transitions.

use super::{LearnError, Mode, Variant};
use crate::deadend::StatePartition;
use crate::features::{Change, Feature, FeatureTable, Value};
use crate::state_space::Label;
use std::collections::{HashMap, HashSet};
use std::fmt::Write;
/// A DIMACS literal: a variable number, negative for the negated variable.
pub type Lit = i32;
/// A variable number, starting at 1.
pub type Var = i32;

/// Boolean view of every pool feature in one state, packed.
type Bits = Vec<u64>;

fn pack(values: &[Value]) -> Bits {
    let mut b = vec![0u64; values.len().div_ceil(64)];
    for (i, v) in values.iter().enumerate() {
        if v.boolean_view() {
            b[i / 64] |= 1 << (i % 64);
        }
    }
    b
}

fn change_code(a: Value, b: Value) -> u8 {
    match Change::between(a, b) {
        Change::Down => 0,
        Change::Same => 1,
        Change::Up => 2,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StateInfo {
    pub instance: usize,
    pub label: Label,
    pub bits: Bits,
}

/// All sampled transitions `(s, s')` from alive states that share one
/// valuation of the pool in `s` and one change signature.
#[derive(Debug, Clone)]
pub(crate) struct TransitionClass {
    pub bits: Bits,
    pub delta: Vec<u8>,
    /// `(s, s')` in global state ids.
    pub members: Vec<(usize, usize)>,
    pub critical: bool,
}

/// For a transition `(s, s')` and an action `a` with `s'` among its outcomes:
/// the class of `(s, s')` and all outcomes of `a`.
#[derive(Debug, Clone)]
pub(crate) struct Obligation {
    pub class: usize,
    pub outcomes: Vec<usize>,
}

/// Min-cost propositional theory. Variables are `Select(f)` per pool
/// feature, `Good` per transition class, and for the ranked variant a ladder
/// `L(s, d)` meaning "the goal distance of s is at most d".
///
/// Separation of good from non-good transitions and, for the safe-labeled
/// variant, well-foundedness of the labeling are checked against candidate
/// models, and the violated clauses are added on demand.
#[derive(Debug, Clone)]
pub struct Theory {
    pub variant: Variant,
    pub mode: Mode,
    pub weights: Vec<u64>,
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    pub(crate) select: Vec<Var>,
    pub(crate) good: Vec<Var>,
    pub(crate) states: Vec<StateInfo>,
    pub(crate) classes: Vec<TransitionClass>,
    /// Per global alive state.
    pub(crate) obligations: HashMap<usize, Vec<Obligation>>,
    pub(crate) values: Vec<Vec<Value>>,
    /// Per clause family: name and number of eager clauses.
    pub(crate) families: Vec<(&'static str, usize)>,
    /// Features fixed to unselected, see [`redundant_features`].
    pub(crate) redundant: Vec<bool>,
}

struct Builder {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl Builder {
    fn var(&mut self) -> Var {
        self.num_vars += 1;
        self.num_vars as Var
    }
}

/// Builds the theory for the given labeled instances (alive, goal and
/// critical states of each pruned model) and feature pool.
pub fn build_theory(partitions: &[StatePartition], pool: &[Feature], variant: Variant, mode: Mode) -> Result<Theory, LearnError> {
    if partitions.iter().all(|p| p.alive.is_empty()) {
        return Err(LearnError::EmptyAliveSet);
    }
    // global states and pool values
    let mut states = Vec::new();
    let mut values = Vec::new();
    let mut offsets = Vec::new();
    for (i, p) in partitions.iter().enumerate() {
        let m = &p.pruned_model;
        let labels = m.labels().map_err(LearnError::Model)?;
        let table = FeatureTable::build(&m.task, &m.states, pool)?;
        offsets.push(states.len());
        for (s, vals) in table.values.into_iter().enumerate() {
            states.push(StateInfo { instance: i, label: labels[s], bits: pack(&vals) });
            values.push(vals);
        }
    }

    let mut b = Builder { num_vars: 0, clauses: Vec::new() };
    let select: Vec<Var> = pool.iter().map(|_| b.var()).collect();
    let weights: Vec<u64> = pool.iter().map(|f| f.weight() as u64).collect();
    let sel = |f: usize| select[f];

    // transition classes
    let mut class_of: HashMap<(Bits, Vec<u8>), usize> = HashMap::new();
    let mut classes: Vec<TransitionClass> = Vec::new();
    let mut obligations: HashMap<usize, Vec<Obligation>> = HashMap::new();
    let mut safe_classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, p) in partitions.iter().enumerate() {
        let m = &p.pruned_model;
        let off = offsets[i];
        for s in 0..m.len() {
            if states[off + s].label != Label::Alive {
                continue;
            }
            let gs = off + s;
            let mut pair_class: Vec<(usize, usize)> = Vec::new();
            let mut class_for = |t: usize, classes: &mut Vec<TransitionClass>| -> usize {
                if let Some(&(_, c)) = pair_class.iter().find(|(x, _)| *x == t) {
                    return c;
                }
                let delta: Vec<u8> = values[gs].iter().zip(&values[t]).map(|(&a, &c)| change_code(a, c)).collect();
                let key = (states[gs].bits.clone(), delta);
                let critical = states[t].label == Label::Dead;
                let c = *class_of.entry(key.clone()).or_insert_with(|| {
                    classes.push(TransitionClass { bits: key.0.clone(), delta: key.1.clone(), members: vec![], critical: false });
                    classes.len() - 1
                });
                classes[c].members.push((gs, t));
                classes[c].critical |= critical;
                pair_class.push((t, c));
                c
            };
            let mut obs = Vec::new();
            let mut safe = Vec::new();
            for tr in &m.transitions[s] {
                let outs: Vec<usize> = tr.outcomes.iter().map(|&o| off + o).collect();
                let is_safe = outs.iter().all(|&o| states[o].label != Label::Dead);
                for &o in &outs {
                    let c = class_for(o, &mut classes);
                    if states[o].label != Label::Dead {
                        obs.push(Obligation { class: c, outcomes: outs.clone() });
                    }
                    if is_safe {
                        safe.push(c);
                    }
                }
            }
            safe.sort_unstable();
            safe.dedup();
            obligations.insert(gs, obs);
            safe_classes.insert(gs, safe);
        }
    }
    let good: Vec<Var> = classes.iter().map(|_| b.var()).collect();
    let redundant = redundant_features(&states, &classes, &weights);
    let mut families = Vec::new();
    let family = |name: &'static str, b: &Builder, start: usize, families: &mut Vec<(&'static str, usize)>| {
        families.push((name, b.clauses.len() - start));
    };

    // (1) every alive state has a good transition through a safe action
    let start = b.clauses.len();
    let mut alive: Vec<usize> = safe_classes.keys().copied().collect();
    alive.sort_unstable();
    for s in &alive {
        b.clauses.push(safe_classes[s].iter().map(|&c| good[c]).collect());
    }
    family("1-good-transition", &b, start, &mut families);

    // features the theory cannot tell from a preferred one
    let start = b.clauses.len();
    for f in (0..pool.len()).filter(|&f| redundant[f]) {
        b.clauses.push(vec![-select[f]]);
    }
    family("redundant-features", &b, start, &mut families);

    // (2)-(4) ranking, ladder encoded
    if variant == Variant::Ranked {
        let start = b.clauses.len();
        let mut ladder: HashMap<usize, Vec<Var>> = HashMap::new();
        for (i, p) in partitions.iter().enumerate() {
            let d_max = p.pruned_model.len();
            for s in 0..p.pruned_model.len() {
                if states[offsets[i] + s].label == Label::Alive {
                    // L(s, 1) ..= L(s, d_max - 1); L(s, 0) is false and L(s, d_max) true
                    let vars: Vec<Var> = (1..d_max).map(|_| b.var()).collect();
                    for w in vars.windows(2) {
                        b.clauses.push(vec![-w[0], w[1]]);
                    }
                    ladder.insert(offsets[i] + s, vars);
                }
            }
        }
        // Some(lit) for a ladder variable, Err(value) for a constant
        let le = |s: usize, d: usize| -> Result<Lit, bool> {
            match states[s].label {
                Label::Goal => Err(true),
                Label::Dead => Err(false),
                Label::Alive => {
                    let v = &ladder[&s];
                    if d == 0 {
                        Err(false)
                    } else if d > v.len() {
                        Err(true)
                    } else {
                        Ok(v[d - 1])
                    }
                }
            }
        };
        for s in &alive {
            let d_max = partitions[states[*s].instance].pruned_model.len();
            for ob in &obligations[s] {
                // Good(c) and L(s, d) imply some outcome has L(s'', d - 1)
                'd: for d in 1..=d_max {
                    let mut clause = vec![-good[ob.class]];
                    match le(*s, d) {
                        Ok(l) => clause.push(-l),
                        Err(false) => continue,
                        Err(true) => {}
                    }
                    for &o in &ob.outcomes {
                        match le(o, d - 1) {
                            Ok(l) => clause.push(l),
                            Err(true) => continue 'd,
                            Err(false) => {}
                        }
                    }
                    b.clauses.push(clause);
                }
            }
        }
        family("2-4-descending-rank", &b, start, &mut families);
    }

    // (5) transitions into dead states are never good
    let start = b.clauses.len();
    for (c, class) in classes.iter().enumerate() {
        if class.critical {
            b.clauses.push(vec![-good[c]]);
        }
    }
    family("5-avoid-dead-ends", &b, start, &mut families);

    let diff_clause = |x: &Bits, y: &Bits| -> Vec<Lit> {
        let mut c = Vec::new();
        for (w, (a, b)) in x.iter().zip(y).enumerate() {
            let mut d = a ^ b;
            while d != 0 {
                let f = w * 64 + d.trailing_zeros() as usize;
                if !redundant[f] {
                    c.push(sel(f));
                }
                d &= d - 1;
            }
        }
        c
    };
    let mut seen: HashSet<Vec<Lit>> = HashSet::new();
    let mut pairs = |b: &mut Builder, xs: &[&Bits], ys: &[&Bits]| {
        for x in xs {
            for y in ys {
                let c = diff_clause(x, y);
                if seen.insert(c.clone()) {
                    b.clauses.push(c);
                }
            }
        }
    };
    let unique = |pred: &dyn Fn(&StateInfo) -> bool| -> Vec<&Bits> {
        let mut v: Vec<&Bits> = states.iter().filter(|s| pred(s)).map(|s| &s.bits).collect();
        v.sort();
        v.dedup();
        v
    };

    // (6) goals differ from non-goals
    let start = b.clauses.len();
    pairs(&mut b, &unique(&|s| s.label == Label::Goal), &unique(&|s| s.label != Label::Goal));
    family("6-goal-separation", &b, start, &mut families);

    // (7) alive states differ from critical states, or in transition mode
    // transitions between alive or goal states differ from critical ones
    let start = b.clauses.len();
    match mode {
        Mode::State => pairs(&mut b, &unique(&|s| s.label == Label::Alive), &unique(&|s| s.label == Label::Dead)),
        Mode::Transition => {
            for x in classes.iter().filter(|c| c.members.iter().any(|&(_, t)| states[t].label != Label::Dead)) {
                for y in classes.iter().filter(|c| c.critical) {
                    let c = class_diff(x, y, &select, &redundant);
                    if seen.insert(c.clone()) {
                        b.clauses.push(c);
                    }
                }
            }
        }
    }
    family(if mode == Mode::State { "7-critical-states" } else { "7-critical-transitions" }, &b, start, &mut families);

    Ok(Theory { variant, mode, weights, num_vars: b.num_vars, clauses: b.clauses, select, good, states, classes, obligations, values, families, redundant })
}

/// Marks features whose valuation on every state and change on every class
/// equal those of another feature that is cheaper, or as cheap and later in
/// pool order. Such a feature can be swapped for the other in any model
/// without raising the cost or the Select vector.
fn redundant_features(states: &[StateInfo], classes: &[TransitionClass], weights: &[u64]) -> Vec<bool> {
    let n = weights.len();
    let mut best: HashMap<(Vec<bool>, Vec<u8>), usize> = HashMap::new();
    for f in 0..n {
        let key = (states.iter().map(|s| (s.bits[f / 64] >> (f % 64)) & 1 == 1).collect(), classes.iter().map(|c| c.delta[f]).collect());
        let e = best.entry(key).or_insert(f);
        if weights[f] <= weights[*e] {
            *e = f;
        }
    }
    let mut redundant = vec![true; n];
    for &f in best.values() {
        redundant[f] = false;
    }
    redundant
}

/// `Select(f)` for every feature that tells the two classes apart by
/// valuation in the source state or by change.
fn class_diff(x: &TransitionClass, y: &TransitionClass, select: &[Var], redundant: &[bool]) -> Vec<Lit> {
    (0..select.len())
        .filter(|&f| !redundant[f])
        .filter(|&f| (x.bits[f / 64] >> (f % 64)) & 1 != (y.bits[f / 64] >> (f % 64)) & 1 || x.delta[f] != y.delta[f])
        .map(|f| select[f])
        .collect()
}

impl Theory {
    pub fn pool_size(&self) -> usize {
        self.select.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Number of literals in the eagerly built clauses.
    pub fn num_literals(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    /// Requires at least one selected feature of weight `c` or more.
    pub fn require_complexity(&mut self, c: u64) {
        let clause = (0..self.select.len()).filter(|&f| self.weights[f] >= c && !self.redundant[f]).map(|f| self.select[f]).collect();
        self.clauses.push(clause);
        self.families.push(("min-complexity", 1));
    }

    /// Clause (8) for a good class `x` and a non-good class `y`.
    pub(crate) fn separation_clause(&self, x: usize, y: usize) -> Vec<Lit> {
        let mut c = vec![-self.good[x], self.good[y]];
        c.extend(class_diff(&self.classes[x], &self.classes[y], &self.select, &self.redundant));
        c
    }

    /// Weighted CNF in the classic DIMACS `p wcnf` dialect. Hard clauses carry
    /// the weight `top`; each feature contributes a soft unit clause
    /// `¬Select(f)` with its weight. Clause (8) is written out for all pairs
    /// of classes; the well-foundedness condition of the safe-labeled variant
    /// is not finitely expanded and only noted in a comment.
    pub fn to_wcnf(&self) -> String {
        let mut hard: Vec<Vec<Lit>> = self.clauses.clone();
        for x in 0..self.classes.len() {
            for y in 0..self.classes.len() {
                if x != y {
                    hard.push(self.separation_clause(x, y));
                }
            }
        }
        let top: u64 = self.weights.iter().sum::<u64>() + 1;
        let mut out = String::new();
        writeln!(out, "c fondgen theory v1 variant={} mode={}", self.variant, self.mode).unwrap();
        writeln!(out, "c select 1..={} good {}..={}", self.select.len(), self.select.len() + 1, self.select.len() + self.good.len()).unwrap();
        for (name, n) in &self.families {
            writeln!(out, "c family {name} {n}").unwrap();
        }
        writeln!(out, "c family 8-transition-separation {}", self.classes.len() * self.classes.len().saturating_sub(1)).unwrap();
        if self.variant == Variant::SafeLabeled {
            writeln!(out, "c well-foundedness of the safe labeling is enforced by cuts during solving").unwrap();
        }
        writeln!(out, "p wcnf {} {} {}", self.num_vars, hard.len() + self.select.len(), top).unwrap();
        for c in &hard {
            write!(out, "{top}").unwrap();
            for l in c {
                write!(out, " {}", l).unwrap();
            }
            out.push_str(" 0\n");
        }
        for (f, v) in self.select.iter().enumerate() {
            writeln!(out, "{} -{} 0", self.weights[f], v).unwrap();
        }
        out
    }
}
