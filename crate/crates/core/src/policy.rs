//! General policies: rules `C -> E` over features plus state or transition
//! constraints, their satisfaction semantics, and projection to concrete
//! policies on explicit models.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! mode: state
//! feature U bool:nullary(up)
//! feature d num:dist(position_0,next-fwd_0_1,position_G_0)
//! rule: U, d>0 -> dec(d)
//! rule: !U -> U | inc(d)
//! constraint: !U, d=0
//! ```
//!
//! `E1 | E2` abbreviates two rules with the same condition. In transition
//! mode constraints are written `tconstraint: <condition> -> <effect>`.
//! Effects are `p`, `!p`, `p?` for Boolean features and `dec(n)`, `inc(n)`,
//! `eq0(n)`, `gt0(n)`, `unk(n)` for numerical ones; `{}` is the empty effect.

use crate::features::{parse_feature, Feature, FeatureError, FeatureTable, StateEvaluator, Value};
use crate::pddl::{ActionId, AtomId, GroundTask};
use crate::state_space::{FondModel, Label, StateId};
use std::fmt::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("policy format error on line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("feature {index} is referenced but the policy has {count} features")]
    UnknownFeature { index: usize, count: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// `p` / `n>0` when `holds`, `!p` / `n=0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub feature: usize,
    pub holds: bool,
}

impl Literal {
    pub fn is_true(&self, values: &[Value]) -> bool {
        values[self.feature].boolean_view() == self.holds
    }
}

/// Conjunction of literals, sorted by feature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition(pub Vec<Literal>);

impl Condition {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self, PolicyError> {
        literals.sort();
        literals.dedup();
        if let Some(w) = literals.windows(2).find(|w| w[0].feature == w[1].feature) {
            return Err(PolicyError::Invalid(format!("contradictory literals on feature {}", w[0].feature)));
        }
        Ok(Condition(literals))
    }

    pub fn holds(&self, values: &[Value]) -> bool {
        self.0.iter().all(|l| l.is_true(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectAtom {
    SetTrue(usize),
    SetFalse(usize),
    UnknownBool(usize),
    Dec(usize),
    Inc(usize),
    SetZero(usize),
    SetPositive(usize),
    UnknownNum(usize),
}

impl EffectAtom {
    pub fn feature(&self) -> usize {
        match *self {
            EffectAtom::SetTrue(f)
            | EffectAtom::SetFalse(f)
            | EffectAtom::UnknownBool(f)
            | EffectAtom::Dec(f)
            | EffectAtom::Inc(f)
            | EffectAtom::SetZero(f)
            | EffectAtom::SetPositive(f)
            | EffectAtom::UnknownNum(f) => f,
        }
    }

    fn is_boolean(&self) -> bool {
        matches!(self, EffectAtom::SetTrue(_) | EffectAtom::SetFalse(_) | EffectAtom::UnknownBool(_))
    }

    /// Whether the change of the feature from `a` to `b` matches this atom.
    pub fn accepts(&self, a: Value, b: Value) -> bool {
        match self {
            EffectAtom::SetTrue(_) => b.boolean_view(),
            EffectAtom::SetFalse(_) => !b.boolean_view(),
            EffectAtom::Dec(_) => b < a,
            EffectAtom::Inc(_) => b > a,
            EffectAtom::SetZero(_) => !b.boolean_view(),
            EffectAtom::SetPositive(_) => b.boolean_view(),
            EffectAtom::UnknownBool(_) | EffectAtom::UnknownNum(_) => true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub condition: Condition,
    /// Sorted by feature, at most one atom per feature.
    pub effect: Vec<EffectAtom>,
}

impl Rule {
    pub fn new(condition: Condition, mut effect: Vec<EffectAtom>) -> Result<Self, PolicyError> {
        effect.sort_by_key(|e| (e.feature(), *e));
        effect.dedup();
        if let Some(w) = effect.windows(2).find(|w| w[0].feature() == w[1].feature()) {
            return Err(PolicyError::Invalid(format!("effect mentions feature {} twice", w[0].feature())));
        }
        Ok(Rule { condition, effect })
    }

    /// Whether the transition with feature values `s` then `s2` satisfies the rule.
    pub fn satisfied_by(&self, s: &[Value], s2: &[Value]) -> bool {
        if !self.condition.holds(s) {
            return false;
        }
        let mut e = self.effect.iter().peekable();
        for f in 0..s.len() {
            match e.next_if(|a| a.feature() == f) {
                Some(atom) => {
                    if !atom.accepts(s[f], s2[f]) {
                        return false;
                    }
                }
                None => {
                    if s[f] != s2[f] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraints {
    State(Vec<Condition>),
    Transition(Vec<Rule>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralPolicy {
    /// Feature names as used in the text format, parallel to `features`.
    pub names: Vec<String>,
    pub features: Vec<Feature>,
    pub rules: Vec<Rule>,
    pub constraints: Constraints,
}

impl GeneralPolicy {
    /// Checks feature references and sorts, and drops duplicate rules and
    /// constraints while keeping first occurrences in order.
    pub fn new(names: Vec<String>, features: Vec<Feature>, rules: Vec<Rule>, constraints: Constraints) -> Result<Self, PolicyError> {
        if names.len() != features.len() {
            return Err(PolicyError::Invalid("feature names and features differ in length".into()));
        }
        let mut policy = GeneralPolicy { names, features, rules: dedup(rules), constraints };
        policy.constraints = match policy.constraints {
            Constraints::State(b) => Constraints::State(dedup(b)),
            Constraints::Transition(t) => Constraints::Transition(dedup(t)),
        };
        policy.validate()?;
        Ok(policy)
    }

    fn validate(&self) -> Result<(), PolicyError> {
        let count = self.features.len();
        let check_lit = |l: &Literal| if l.feature < count { Ok(()) } else { Err(PolicyError::UnknownFeature { index: l.feature, count }) };
        let check_rule = |r: &Rule| -> Result<(), PolicyError> {
            r.condition.0.iter().try_for_each(check_lit)?;
            for e in &r.effect {
                let f = e.feature();
                if f >= count {
                    return Err(PolicyError::UnknownFeature { index: f, count });
                }
                if e.is_boolean() != self.features[f].is_boolean() {
                    return Err(PolicyError::Invalid(format!("effect on `{}` does not match its sort", self.names[f])));
                }
            }
            Ok(())
        };
        self.rules.iter().try_for_each(check_rule)?;
        match &self.constraints {
            Constraints::State(b) => b.iter().flat_map(|c| &c.0).try_for_each(check_lit),
            Constraints::Transition(t) => t.iter().try_for_each(check_rule),
        }
    }

    pub fn empty() -> Self {
        GeneralPolicy { names: vec![], features: vec![], rules: vec![], constraints: Constraints::State(vec![]) }
    }

    pub fn is_transition_mode(&self) -> bool {
        matches!(self.constraints, Constraints::Transition(_))
    }

    /// The same policy without any constraints, in the same mode.
    pub fn without_constraints(&self) -> Self {
        let mut p = self.clone();
        p.constraints = match p.constraints {
            Constraints::State(_) => Constraints::State(vec![]),
            Constraints::Transition(_) => Constraints::Transition(vec![]),
        };
        p
    }

    pub fn satisfies_some_rule(&self, s: &[Value], s2: &[Value]) -> bool {
        self.rules.iter().any(|r| r.satisfied_by(s, s2))
    }

    /// Whether the transition `(s, s2)` is forbidden by a constraint.
    pub fn violates_constraint(&self, s: &[Value], s2: &[Value]) -> bool {
        match &self.constraints {
            Constraints::State(b) => b.iter().any(|c| c.holds(s2)),
            Constraints::Transition(t) => t.iter().any(|r| r.satisfied_by(s, s2)),
        }
    }

    /// Whether an action whose outcomes have the given feature values is
    /// selected in a state with values `s`.
    pub fn selects<'v>(&self, s: &[Value], outcomes: impl IntoIterator<Item = &'v [Value]> + Clone) -> bool {
        outcomes.clone().into_iter().any(|o| self.satisfies_some_rule(s, o)) && !outcomes.into_iter().any(|o| self.violates_constraint(s, o))
    }

    /// Rule satisfaction on raw states.
    pub fn transition_satisfies_rule(&self, rule: &Rule, task: &GroundTask, s: &[AtomId], s2: &[AtomId]) -> Result<bool, PolicyError> {
        let ev = StateEvaluator::new(task, &self.features)?;
        Ok(rule.satisfied_by(&ev.values(s)?, &ev.values(s2)?))
    }

    /// Selected actions in an arbitrary state of `task`, computed on the fly.
    pub fn actions_in(&self, task: &GroundTask, ev: &StateEvaluator<'_>, state: &[AtomId]) -> Result<Vec<ActionId>, PolicyError> {
        let vs = ev.values(state)?;
        let mut out = Vec::new();
        for a in 0..task.actions.len() {
            if !task.applicable(state, a) {
                continue;
            }
            let succ: Vec<Vec<Value>> = task.actions[a].outcomes.iter().map(|o| ev.values(&task.apply(state, o))).collect::<Result<_, _>>()?;
            if self.selects(&vs, succ.iter().map(Vec::as_slice)) {
                out.push(a);
            }
        }
        Ok(out)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn dedup<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// The actions a general policy selects in each state of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcretePolicy {
    /// Sorted action ids per state.
    pub actions: Vec<Vec<ActionId>>,
}

impl ConcretePolicy {
    /// Projects `policy` onto every state of `model`.
    pub fn project(policy: &GeneralPolicy, model: &FondModel) -> Result<Self, PolicyError> {
        let table = policy_table(policy, model)?;
        Ok(Self::project_with(policy, model, &table))
    }

    pub fn project_with(policy: &GeneralPolicy, model: &FondModel, table: &FeatureTable) -> Self {
        let actions = (0..model.len()).map(|s| select_in(policy, model, table, s)).collect();
        ConcretePolicy { actions }
    }

    /// Policy given explicitly, for example by a search procedure.
    pub fn from_actions(actions: Vec<Vec<ActionId>>) -> Self {
        ConcretePolicy { actions }
    }

    pub fn get(&self, s: StateId) -> &[ActionId] {
        &self.actions[s]
    }
}

pub(crate) fn policy_table(policy: &GeneralPolicy, model: &FondModel) -> Result<FeatureTable, PolicyError> {
    StateEvaluator::new(&model.task, &policy.features)?;
    Ok(FeatureTable::build(&model.task, &model.states, &policy.features)?)
}

fn select_in(policy: &GeneralPolicy, model: &FondModel, table: &FeatureTable, s: StateId) -> Vec<ActionId> {
    let vs = &table.values[s];
    let mut out: Vec<ActionId> =
        model.transitions[s].iter().filter(|t| policy.selects(vs, t.outcomes.iter().map(|&o| table.values[o].as_slice()))).map(|t| t.action).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Actions selected by `policy` in state `s` of `model`.
pub fn concrete_policy_actions(policy: &GeneralPolicy, model: &FondModel, s: StateId) -> Result<Vec<ActionId>, PolicyError> {
    let ev = StateEvaluator::new(&model.task, &policy.features)?;
    let vs = ev.values(&model.states[s])?;
    let mut out = Vec::new();
    for t in &model.transitions[s] {
        let succ: Vec<Vec<Value>> = t.outcomes.iter().map(|&o| ev.values(&model.states[o])).collect::<Result<_, _>>()?;
        if policy.selects(&vs, succ.iter().map(Vec::as_slice)) {
            out.push(t.action);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Serializes and parses back.
pub fn policy_roundtrip(policy: &GeneralPolicy) -> Result<GeneralPolicy, PolicyError> {
    parse_policy(&policy.to_string())
}

/// Every labeled dead-end of `model` reachable from an alive state in one
/// step violates a constraint on that step; with state constraints, every
/// dead-end of the model satisfies some constraint.
pub fn constraints_sound(policy: &GeneralPolicy, model: &FondModel) -> Result<bool, PolicyError> {
    let labels = model.labels.as_ref().ok_or_else(|| PolicyError::Invalid("model has no dead-end labels".into()))?;
    let table = policy_table(policy, model)?;
    Ok(match &policy.constraints {
        Constraints::State(b) => (0..model.len()).filter(|&s| labels[s] == Label::Dead).all(|s| b.iter().any(|c| c.holds(&table.values[s]))),
        Constraints::Transition(_) => (0..model.len()).filter(|&s| labels[s] == Label::Alive).all(|s| {
            model.transitions[s]
                .iter()
                .flat_map(|t| &t.outcomes)
                .filter(|&&o| labels[o] == Label::Dead)
                .all(|&o| policy.violates_constraint(&table.values[s], &table.values[o]))
        }),
    })
}

/// Every deterministic intent `(s, s')` of an alive state that satisfies a
/// rule is carried out by some action with `s'` among its outcomes and no
/// outcome violating a constraint.
pub fn is_safe(policy: &GeneralPolicy, model: &FondModel) -> Result<bool, PolicyError> {
    let labels = model.labels.as_ref().ok_or_else(|| PolicyError::Invalid("model has no dead-end labels".into()))?;
    let table = policy_table(policy, model)?;
    for s in (0..model.len()).filter(|&s| labels[s] == Label::Alive) {
        let vs = &table.values[s];
        for t in &model.transitions[s] {
            for &o in &t.outcomes {
                if !policy.satisfies_some_rule(vs, &table.values[o]) {
                    continue;
                }
                let carried = model.transitions[s]
                    .iter()
                    .filter(|u| u.outcomes.contains(&o))
                    .any(|u| !u.outcomes.iter().any(|&x| policy.violates_constraint(vs, &table.values[x])));
                if !carried {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Text format

struct Printer<'p>(&'p GeneralPolicy);

impl Printer<'_> {
    fn literal(&self, out: &mut String, l: &Literal) {
        let name = &self.0.names[l.feature];
        match (self.0.features[l.feature].is_boolean(), l.holds) {
            (true, true) => out.push_str(name),
            (true, false) => write!(out, "!{name}").unwrap(),
            (false, true) => write!(out, "{name}>0").unwrap(),
            (false, false) => write!(out, "{name}=0").unwrap(),
        }
    }

    fn condition(&self, out: &mut String, c: &Condition) {
        for (i, l) in c.0.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.literal(out, l);
        }
    }

    fn effect(&self, out: &mut String, e: &[EffectAtom]) {
        if e.is_empty() {
            out.push_str("{}");
        }
        for (i, a) in e.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let n = &self.0.names[a.feature()];
            match a {
                EffectAtom::SetTrue(_) => write!(out, "{n}"),
                EffectAtom::SetFalse(_) => write!(out, "!{n}"),
                EffectAtom::UnknownBool(_) => write!(out, "{n}?"),
                EffectAtom::Dec(_) => write!(out, "dec({n})"),
                EffectAtom::Inc(_) => write!(out, "inc({n})"),
                EffectAtom::SetZero(_) => write!(out, "eq0({n})"),
                EffectAtom::SetPositive(_) => write!(out, "gt0({n})"),
                EffectAtom::UnknownNum(_) => write!(out, "unk({n})"),
            }
            .unwrap();
        }
    }

    /// Consecutive rules with equal conditions share one line.
    fn rules(&self, out: &mut String, keyword: &str, rules: &[Rule]) {
        let mut i = 0;
        while i < rules.len() {
            let mut j = i + 1;
            while j < rules.len() && rules[j].condition == rules[i].condition {
                j += 1;
            }
            write!(out, "{keyword}:").unwrap();
            if !rules[i].condition.0.is_empty() {
                out.push(' ');
                self.condition(out, &rules[i].condition);
            }
            out.push_str(" -> ");
            for (k, r) in rules[i..j].iter().enumerate() {
                if k > 0 {
                    out.push_str(" | ");
                }
                self.effect(out, &r.effect);
            }
            out.push('\n');
            i = j;
        }
    }
}

impl fmt::Display for GeneralPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = Printer(self);
        let mut out = String::new();
        writeln!(out, "mode: {}", if self.is_transition_mode() { "transition" } else { "state" }).unwrap();
        for (name, feature) in self.names.iter().zip(&self.features) {
            writeln!(out, "feature {name} {feature}").unwrap();
        }
        p.rules(&mut out, "rule", &self.rules);
        match &self.constraints {
            Constraints::State(b) => {
                for c in b {
                    out.push_str("constraint:");
                    if !c.0.is_empty() {
                        out.push(' ');
                        p.condition(&mut out, c);
                    }
                    out.push('\n');
                }
            }
            Constraints::Transition(t) => p.rules(&mut out, "tconstraint", t),
        }
        f.write_str(&out)
    }
}

impl std::str::FromStr for GeneralPolicy {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_policy(s)
    }
}

struct LineParser<'a> {
    line: usize,
    names: &'a [String],
    features: &'a [Feature],
}

impl LineParser<'_> {
    fn err(&self, message: impl Into<String>) -> PolicyError {
        PolicyError::Format { line: self.line, message: message.into() }
    }

    fn feature(&self, name: &str) -> Result<usize, PolicyError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| self.err(format!("unknown feature `{name}`")))
    }

    fn expect_sort(&self, f: usize, boolean: bool, token: &str) -> Result<usize, PolicyError> {
        if self.features[f].is_boolean() == boolean {
            Ok(f)
        } else {
            let kind = if boolean { "Boolean" } else { "numerical" };
            Err(self.err(format!("`{token}` needs a {kind} feature")))
        }
    }

    fn literal(&self, token: &str) -> Result<Literal, PolicyError> {
        if let Some(n) = token.strip_suffix(">0") {
            Ok(Literal { feature: self.expect_sort(self.feature(n.trim())?, false, token)?, holds: true })
        } else if let Some(n) = token.strip_suffix("=0") {
            Ok(Literal { feature: self.expect_sort(self.feature(n.trim())?, false, token)?, holds: false })
        } else if let Some(p) = token.strip_prefix('!') {
            Ok(Literal { feature: self.expect_sort(self.feature(p.trim())?, true, token)?, holds: false })
        } else {
            Ok(Literal { feature: self.expect_sort(self.feature(token)?, true, token)?, holds: true })
        }
    }

    fn condition(&self, text: &str) -> Result<Condition, PolicyError> {
        let lits = split_list(text).map(|t| self.literal(t)).collect::<Result<Vec<_>, _>>()?;
        Condition::new(lits).map_err(|e| self.err(e.to_string()))
    }

    fn effect_atom(&self, token: &str) -> Result<EffectAtom, PolicyError> {
        for (head, make) in [
            ("dec(", EffectAtom::Dec as fn(usize) -> EffectAtom),
            ("inc(", EffectAtom::Inc),
            ("eq0(", EffectAtom::SetZero),
            ("gt0(", EffectAtom::SetPositive),
            ("unk(", EffectAtom::UnknownNum),
        ] {
            if let Some(rest) = token.strip_prefix(head) {
                let name = rest.strip_suffix(')').ok_or_else(|| self.err(format!("missing `)` in `{token}`")))?;
                return Ok(make(self.expect_sort(self.feature(name.trim())?, false, token)?));
            }
        }
        if let Some(p) = token.strip_suffix('?') {
            Ok(EffectAtom::UnknownBool(self.expect_sort(self.feature(p.trim())?, true, token)?))
        } else if let Some(p) = token.strip_prefix('!') {
            Ok(EffectAtom::SetFalse(self.expect_sort(self.feature(p.trim())?, true, token)?))
        } else {
            Ok(EffectAtom::SetTrue(self.expect_sort(self.feature(token)?, true, token)?))
        }
    }

    fn rules(&self, text: &str) -> Result<Vec<Rule>, PolicyError> {
        let (cond, effects) = text.split_once("->").ok_or_else(|| self.err("expected `->`"))?;
        let condition = self.condition(cond)?;
        effects
            .split('|')
            .map(|e| {
                let e = e.trim();
                let atoms = if e == "{}" { Vec::new() } else { split_list(e).map(|t| self.effect_atom(t)).collect::<Result<Vec<_>, _>>()? };
                Rule::new(condition.clone(), atoms).map_err(|err| self.err(err.to_string()))
            })
            .collect()
    }
}

/// Comma-separated non-empty tokens; an empty string gives no tokens.
fn split_list(text: &str) -> impl Iterator<Item = &str> {
    let text = text.trim();
    text.split(',').map(str::trim).filter(move |_| !text.is_empty())
}

pub fn parse_policy(text: &str) -> Result<GeneralPolicy, PolicyError> {
    let mut mode: Option<bool> = None;
    let mut names: Vec<String> = Vec::new();
    let mut features = Vec::new();
    let mut rules = Vec::new();
    let mut state_constraints = Vec::new();
    let mut transition_constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let lp = LineParser { line: i + 1, names: &names, features: &features };
        if let Some(rest) = line.strip_prefix("mode:") {
            if mode.is_some() {
                return Err(lp.err("duplicate `mode`"));
            }
            mode = Some(match rest.trim() {
                "state" => false,
                "transition" => true,
                other => return Err(lp.err(format!("unknown mode `{other}`"))),
            });
        } else if let Some(rest) = line.strip_prefix("feature ") {
            let (name, expr) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| lp.err("expected `feature <id> <expr>`"))?;
            if !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
                return Err(lp.err(format!("invalid feature name `{name}`")));
            }
            if names.iter().any(|n| n == name) {
                return Err(lp.err(format!("duplicate feature `{name}`")));
            }
            let f = parse_feature(expr.trim()).map_err(|e| lp.err(e.to_string()))?;
            names.push(name.to_string());
            features.push(f);
        } else if let Some(rest) = line.strip_prefix("rule:") {
            rules.extend(lp.rules(rest)?);
        } else if let Some(rest) = line.strip_prefix("tconstraint:") {
            transition_constraints.extend(lp.rules(rest)?);
        } else if let Some(rest) = line.strip_prefix("constraint:") {
            state_constraints.push(lp.condition(rest)?);
        } else {
            return Err(lp.err(format!("unrecognized line `{line}`")));
        }
    }
    let transition = mode.ok_or(PolicyError::Format { line: 0, message: "missing `mode:` header".into() })?;
    let constraints = match (transition, state_constraints.is_empty(), transition_constraints.is_empty()) {
        (false, _, true) => Constraints::State(state_constraints),
        (true, true, _) => Constraints::Transition(transition_constraints),
        (false, _, false) => return Err(PolicyError::Format { line: 0, message: "`tconstraint` in a state-mode policy".into() }),
        (true, false, _) => return Err(PolicyError::Format { line: 0, message: "`constraint` in a transition-mode policy".into() }),
    };
    GeneralPolicy::new(names, features, rules, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Num;

    fn num(n: u64) -> Value {
        Value::Num(Num::Fin(n))
    }

    const ACRO: &str = "\
mode: state
feature U bool:nullary(up)
feature B bool:nullary(broken-leg)
feature d num:dist(position_0,next-fwd_0_1,position_G_0)
rule: U, d>0, !B -> dec(d)
rule: !B, !U -> U | inc(d)
constraint: B, !U
";

    #[test]
    fn parses_rule_groups_into_separate_rules() {
        let p = parse_policy(ACRO).unwrap();
        assert_eq!(p.features.len(), 3);
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[1].condition, p.rules[2].condition);
        assert_eq!(p.constraints, Constraints::State(vec![Condition(vec![Literal { feature: 0, holds: false }, Literal { feature: 1, holds: true }])]));
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let p = parse_policy(ACRO).unwrap();
        assert_eq!(policy_roundtrip(&p).unwrap(), p);
        let e = GeneralPolicy::empty();
        assert_eq!(policy_roundtrip(&e).unwrap(), e);
        let t = parse_policy("mode: transition\nfeature n num:count(p_0)\nrule: n>0 -> dec(n)\ntconstraint: n>0 -> inc(n)\n").unwrap();
        let back = policy_roundtrip(&t).unwrap();
        assert!(back.is_transition_mode());
        assert_eq!(back, t);
    }

    #[test]
    fn dormant_effects_round_trip() {
        let text = "mode: state\nfeature p bool:nullary(a)\nfeature n num:count(q_0)\nrule: -> p?, unk(n)\nrule: p -> !p, eq0(n) | gt0(n)\nconstraint:\n";
        let p = parse_policy(text).unwrap();
        assert_eq!(p.rules[0].effect, vec![EffectAtom::UnknownBool(0), EffectAtom::UnknownNum(1)]);
        assert_eq!(policy_roundtrip(&p).unwrap(), p);
    }

    #[test]
    fn duplicate_rules_are_pruned() {
        let p = parse_policy("mode: state\nfeature p bool:nullary(a)\nrule: p -> !p | !p\nrule: p -> !p\n").unwrap();
        assert_eq!(p.rules.len(), 1);
    }

    #[test]
    fn rule_semantics() {
        let p = parse_policy(ACRO).unwrap();
        let r1 = &p.rules[0];
        let t = Value::Bool(true);
        let f = Value::Bool(false);
        assert!(r1.satisfied_by(&[t, f, num(3)], &[t, f, num(2)]));
        assert!(!r1.satisfied_by(&[t, f, num(3)], &[t, f, num(3)]));
        // an unmentioned feature must keep its value
        assert!(!r1.satisfied_by(&[t, f, num(3)], &[f, f, num(2)]));
        assert!(!r1.satisfied_by(&[f, f, num(3)], &[f, f, num(2)]));
        let inf = Value::Num(Num::Inf);
        let q = parse_policy("mode: state\nfeature n num:count(a_0)\nrule: n>0 -> {}\nrule: n>0 -> eq0(n)\n").unwrap();
        assert!(q.rules[0].satisfied_by(&[inf], &[inf]));
        assert!(q.rules[1].satisfied_by(&[inf], &[num(0)]));
        assert!(!q.rules[1].satisfied_by(&[num(2)], &[num(1)]));
    }

    #[test]
    fn constraints_filter_actions() {
        let p = parse_policy(ACRO).unwrap();
        let (t, f) = (Value::Bool(true), Value::Bool(false));
        let s = [t, f, num(3)];
        assert!(p.selects(&s, [&[t, f, num(2)][..]]));
        assert!(!p.selects(&s, [&[t, f, num(1)][..], &[f, t, num(1)][..]]));
        assert!(p.without_constraints().selects(&s, [&[t, f, num(1)][..], &[f, t, num(1)][..]]));
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let cases = [
            ("mode: state\nfeature p bool:nullary(a)\nrule: q -> p\n", 3),
            ("mode: state\nfeature n num:count(a_0)\nrule: n -> {}\n", 3),
            ("mode: state\nfeature p bool:nullary(a)\nrule: p -> dec(p)\n", 3),
            ("mode: state\nfeature p bool:nullary(a)\nrule: p, !p -> {}\n", 3),
            ("mode: state\nfeature p num:count(\n", 2),
            ("mode: state\nfeature p bool:nullary(a)\nfeature p bool:nullary(b)\n", 3),
            ("mode: wrong\n", 1),
            ("mode: state\nbogus\n", 2),
            ("mode: state\nfeature p bool:nullary(a)\nrule: p -> !p, p\n", 3),
        ];
        for (text, line) in cases {
            match parse_policy(text) {
                Err(PolicyError::Format { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_policy("feature p bool:nullary(a)\n"), Err(PolicyError::Format { line: 0, .. })));
        assert!(matches!(parse_policy("mode: state\nfeature n num:count(a_0)\ntconstraint: -> {}\n"), Err(PolicyError::Format { .. })));
    }
}
