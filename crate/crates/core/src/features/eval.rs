//! Denotations of concepts and roles in a state, and feature values.

use super::{Change, Concept, Feature, FeatureError, Num, Role, Value};
use crate::pddl::{AtomId, GroundTask};

/// Set of objects as a bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct ObjSet(pub(crate) Box<[u64]>);

/// Binary relation over objects as `n` rows of bit vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Rel(pub(crate) Box<[u64]>);

pub(crate) fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl ObjSet {
    pub(crate) fn empty(n: usize) -> Self {
        ObjSet(vec![0; words(n)].into())
    }

    pub(crate) fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub(crate) fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| wi * 64 + b))
    }

    fn zip(&self, other: &ObjSet, f: impl Fn(u64, u64) -> u64) -> ObjSet {
        ObjSet(self.0.iter().zip(other.0.iter()).map(|(&a, &b)| f(a, b)).collect())
    }

    pub(crate) fn and(&self, o: &ObjSet) -> ObjSet {
        self.zip(o, |a, b| a & b)
    }

    pub(crate) fn or(&self, o: &ObjSet) -> ObjSet {
        self.zip(o, |a, b| a | b)
    }

    pub(crate) fn diff(&self, o: &ObjSet) -> ObjSet {
        self.zip(o, |a, b| a & !b)
    }

    pub(crate) fn not(&self, n: usize) -> ObjSet {
        ObjSet::full(n).diff(self)
    }

    pub(crate) fn intersects(&self, o: &ObjSet) -> bool {
        self.0.iter().zip(o.0.iter()).any(|(a, b)| a & b != 0)
    }

    pub(crate) fn subset_of(&self, o: &ObjSet) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a & !b == 0)
    }
}

impl Rel {
    pub(crate) fn empty(n: usize) -> Self {
        Rel(vec![0; n * words(n)].into())
    }

    fn row(&self, n: usize, i: usize) -> &[u64] {
        let w = words(n);
        &self.0[i * w..(i + 1) * w]
    }

    pub(crate) fn row_set(&self, n: usize, i: usize) -> ObjSet {
        ObjSet(self.row(n, i).into())
    }

    pub(crate) fn insert(&mut self, n: usize, i: usize, j: usize) {
        let w = words(n);
        self.0[i * w + j / 64] |= 1 << (j % 64);
    }

    pub(crate) fn contains(&self, n: usize, i: usize, j: usize) -> bool {
        let w = words(n);
        self.0[i * w + j / 64] >> (j % 64) & 1 == 1
    }

    pub(crate) fn pairs(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..n).flat_map(move |i| self.row_set(n, i).iter().map(move |j| (i, j)).collect::<Vec<_>>())
    }

    fn zip(&self, other: &Rel, f: impl Fn(u64, u64) -> u64) -> Rel {
        Rel(self.0.iter().zip(other.0.iter()).map(|(&a, &b)| f(a, b)).collect())
    }

    pub(crate) fn and(&self, o: &Rel) -> Rel {
        self.zip(o, |a, b| a & b)
    }

    pub(crate) fn or(&self, o: &Rel) -> Rel {
        self.zip(o, |a, b| a | b)
    }

    pub(crate) fn full(n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for i in 0..n {
            for j in 0..n {
                r.insert(n, i, j);
            }
        }
        r
    }

    pub(crate) fn not(&self, n: usize) -> Rel {
        Rel::full(n).zip(self, |a, b| a & !b)
    }

    pub(crate) fn subset_of(&self, o: &Rel) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn inv(&self, n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for (i, j) in self.pairs(n) {
            r.insert(n, j, i);
        }
        r
    }

    /// `{(a, c) | (a, b) in self, (b, c) in o}`
    pub(crate) fn comp(&self, o: &Rel, n: usize) -> Rel {
        let w = words(n);
        let mut r = Rel::empty(n);
        for i in 0..n {
            for b in self.row_set(n, i).iter() {
                for k in 0..w {
                    r.0[i * w + k] |= o.0[b * w + k];
                }
            }
        }
        r
    }

    pub(crate) fn plus(&self, n: usize) -> Rel {
        let w = words(n);
        let mut r = self.clone();
        for k in 0..n {
            let row_k: Vec<u64> = r.row(n, k).to_vec();
            for i in 0..n {
                if r.contains(n, i, k) {
                    for (cell, bits) in r.0[i * w..(i + 1) * w].iter_mut().zip(&row_k) {
                        *cell |= bits;
                    }
                }
            }
        }
        r
    }

    pub(crate) fn star(&self, n: usize) -> Rel {
        let mut r = self.plus(n);
        for i in 0..n {
            r.insert(n, i, i);
        }
        r
    }

    pub(crate) fn restrict(&self, c: &ObjSet, n: usize) -> Rel {
        let w = words(n);
        let mut r = self.clone();
        for i in 0..n {
            for x in 0..w {
                r.0[i * w + x] &= c.0[x];
            }
        }
        r
    }

    pub(crate) fn id(c: &ObjSet, n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for i in c.iter() {
            r.insert(n, i, i);
        }
        r
    }

    /// `{a | exists b: (a, b) in self and b in c}`
    pub(crate) fn some(&self, c: &ObjSet, n: usize) -> ObjSet {
        let mut s = ObjSet::empty(n);
        for i in 0..n {
            if self.row_set(n, i).intersects(c) {
                s.insert(i);
            }
        }
        s
    }

    /// `{a | forall b: (a, b) in self implies b in c}`
    pub(crate) fn all(&self, c: &ObjSet, n: usize) -> ObjSet {
        let mut s = ObjSet::empty(n);
        for i in 0..n {
            if self.row_set(n, i).subset_of(c) {
                s.insert(i);
            }
        }
        s
    }

    /// Objects reachable in one step from some member of `from`.
    fn image(&self, from: &ObjSet, n: usize) -> ObjSet {
        let w = words(n);
        let mut s = ObjSet::empty(n);
        for i in from.iter() {
            for x in 0..w {
                s.0[x] |= self.0[i * w + x];
            }
        }
        s
    }
}

/// Length of the shortest `r`-path from `from` into `to`.
pub(crate) fn distance(from: &ObjSet, r: &Rel, to: &ObjSet, n: usize) -> Num {
    let mut reached = from.clone();
    let mut frontier = from.clone();
    let mut d = 0;
    loop {
        if frontier.intersects(to) {
            return Num::Fin(d);
        }
        let next = r.image(&frontier, n).diff(&reached);
        if next.is_empty() {
            return Num::Inf;
        }
        reached = reached.or(&next);
        frontier = next;
        d += 1;
    }
}

pub(crate) fn singleton(i: usize, n: usize) -> ObjSet {
    let mut s = ObjSet::empty(n);
    s.insert(i);
    s
}

pub(crate) fn sum_dist(c: &ObjSet, r: &Rel, d: &ObjSet, n: usize) -> Num {
    c.iter().fold(Num::Fin(0), |acc, x| acc.add(distance(&singleton(x, n), r, d, n)))
}

pub(crate) fn role_dist(r: &Rel, s: &Rel, t: &Rel, n: usize) -> Num {
    (0..n)
        .filter_map(|a| {
            let start = r.row_set(n, a);
            (!start.is_empty()).then(|| distance(&start, s, &t.row_set(n, a), n))
        })
        .min()
        .unwrap_or(Num::Inf)
}

pub(crate) fn sum_role_dist(r: &Rel, s: &Rel, t: &Rel, n: usize) -> Num {
    r.pairs(n).fold(Num::Fin(0), |acc, (a, b)| acc.add(distance(&singleton(b, n), s, &t.row_set(n, a), n)))
}

/// A state as an interpretation: the universe is every object of the task,
/// and predicates hold on the fluent atoms of the state plus the static ones.
pub struct Interp<'t> {
    task: &'t GroundTask,
    n: usize,
    by_pred: Vec<Vec<AtomId>>,
}

impl<'t> Interp<'t> {
    pub fn new(task: &'t GroundTask, state: &[AtomId]) -> Self {
        let mut by_pred = vec![Vec::new(); task.predicates.len()];
        for &a in state.iter().chain(task.static_true.iter()) {
            by_pred[task.atoms[a].pred].push(a);
        }
        Interp { task, n: task.objects.len(), by_pred }
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    fn pred(&self, name: &str, index: usize) -> Result<usize, FeatureError> {
        let p = self.task.predicate_index(name).ok_or_else(|| FeatureError::UnknownPredicate(name.to_string()))?;
        let arity = self.task.predicates[p].1;
        if index >= arity {
            return Err(FeatureError::Arity { pred: name.to_string(), arity, index });
        }
        Ok(p)
    }

    pub(crate) fn prim_concept(&self, name: &str, i: usize) -> Result<ObjSet, FeatureError> {
        let p = self.pred(name, i)?;
        let mut s = ObjSet::empty(self.n);
        for &a in &self.by_pred[p] {
            s.insert(self.task.atoms[a].args[i]);
        }
        Ok(s)
    }

    pub(crate) fn prim_role(&self, name: &str, i: usize, j: usize) -> Result<Rel, FeatureError> {
        let p = self.pred(name, i.max(j))?;
        let mut r = Rel::empty(self.n);
        for &a in &self.by_pred[p] {
            let args = &self.task.atoms[a].args;
            r.insert(self.n, args[i], args[j]);
        }
        Ok(r)
    }

    pub(crate) fn constant(&self, name: &str) -> Result<ObjSet, FeatureError> {
        let i = self.task.objects.iter().position(|o| o == name).ok_or_else(|| FeatureError::UnknownConstant(name.to_string()))?;
        Ok(singleton(i, self.n))
    }

    pub(crate) fn nullary(&self, name: &str) -> Result<bool, FeatureError> {
        let p = self.task.predicate_index(name).ok_or_else(|| FeatureError::UnknownPredicate(name.to_string()))?;
        if self.task.predicates[p].1 != 0 {
            return Err(FeatureError::Sort(format!("`{name}` is not a nullary predicate")));
        }
        Ok(!self.by_pred[p].is_empty())
    }

    pub(crate) fn concept(&self, c: &Concept) -> Result<ObjSet, FeatureError> {
        let n = self.n;
        Ok(match c {
            Concept::Prim(p, i) => self.prim_concept(p, *i)?,
            Concept::Top => ObjSet::full(n),
            Concept::Bot => ObjSet::empty(n),
            Concept::And(a, b) => self.concept(a)?.and(&self.concept(b)?),
            Concept::Or(a, b) => self.concept(a)?.or(&self.concept(b)?),
            Concept::Not(a) => self.concept(a)?.not(n),
            Concept::Diff(a, b) => self.concept(a)?.diff(&self.concept(b)?),
            Concept::Some(r, a) => self.role(r)?.some(&self.concept(a)?, n),
            Concept::All(r, a) => self.role(r)?.all(&self.concept(a)?, n),
            Concept::Const(o) => self.constant(o)?,
        })
    }

    pub(crate) fn role(&self, r: &Role) -> Result<Rel, FeatureError> {
        let n = self.n;
        Ok(match r {
            Role::Prim(p, i, j) => self.prim_role(p, *i, *j)?,
            Role::Univ => Rel::full(n),
            Role::And(a, b) => self.role(a)?.and(&self.role(b)?),
            Role::Or(a, b) => self.role(a)?.or(&self.role(b)?),
            Role::Not(a) => self.role(a)?.not(n),
            Role::Inv(a) => self.role(a)?.inv(n),
            Role::Comp(a, b) => self.role(a)?.comp(&self.role(b)?, n),
            Role::Plus(a) => self.role(a)?.plus(n),
            Role::Star(a) => self.role(a)?.star(n),
            Role::Restrict(a, c) => self.role(a)?.restrict(&self.concept(c)?, n),
            Role::Id(c) => Rel::id(&self.concept(c)?, n),
        })
    }

    pub fn feature(&self, f: &Feature) -> Result<Value, FeatureError> {
        let n = self.n;
        Ok(match f {
            Feature::Empty(c) => Value::Bool(self.concept(c)?.is_empty()),
            Feature::CSub(c, d) => Value::Bool(self.concept(c)?.subset_of(&self.concept(d)?)),
            Feature::RSub(r, s) => Value::Bool(self.role(r)?.subset_of(&self.role(s)?)),
            Feature::Nullary(p) => Value::Bool(self.nullary(p)?),
            Feature::Count(c) => Value::Num(Num::Fin(self.concept(c)?.len() as u64)),
            Feature::Dist(c, r, d) => Value::Num(distance(&self.concept(c)?, &self.role(r)?, &self.concept(d)?, n)),
            Feature::SumDist(c, r, d) => Value::Num(sum_dist(&self.concept(c)?, &self.role(r)?, &self.concept(d)?, n)),
            Feature::RDist(r, s, t) => Value::Num(role_dist(&self.role(r)?, &self.role(s)?, &self.role(t)?, n)),
            Feature::SumRDist(r, s, t) => Value::Num(sum_role_dist(&self.role(r)?, &self.role(s)?, &self.role(t)?, n)),
        })
    }
}

/// Value of `f` in `state`, a sorted list of true fluent atoms of `task`.
pub fn evaluate_feature(f: &Feature, task: &GroundTask, state: &[AtomId]) -> Result<Value, FeatureError> {
    Interp::new(task, state).feature(f)
}

pub fn qualitative_change(f: &Feature, task: &GroundTask, s: &[AtomId], s2: &[AtomId]) -> Result<Change, FeatureError> {
    Ok(Change::between(evaluate_feature(f, task, s)?, evaluate_feature(f, task, s2)?))
}

/// Evaluates a fixed feature list on states of one task.
pub struct StateEvaluator<'a> {
    pub task: &'a GroundTask,
    pub features: &'a [Feature],
}

impl<'a> StateEvaluator<'a> {
    /// Checks that every feature is well-formed for the task.
    pub fn new(task: &'a GroundTask, features: &'a [Feature]) -> Result<Self, FeatureError> {
        let e = StateEvaluator { task, features };
        e.values(&task.init)?;
        Ok(e)
    }

    pub fn values(&self, state: &[AtomId]) -> Result<Vec<Value>, FeatureError> {
        let interp = Interp::new(self.task, state);
        self.features.iter().map(|f| interp.feature(f)).collect()
    }
}

/// Precomputed feature values, `values[state][feature]`. Built once and read
/// concurrently afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTable {
    pub values: Vec<Vec<Value>>,
}

impl FeatureTable {
    pub fn build(task: &GroundTask, states: &[Vec<AtomId>], features: &[Feature]) -> Result<Self, FeatureError> {
        let eval = StateEvaluator { task, features };
        let values = states.iter().map(|s| eval.values(s)).collect::<Result<_, _>>()?;
        Ok(FeatureTable { values })
    }

    pub fn get(&self, state: usize, feature: usize) -> Value {
        self.values[state][feature]
    }
}
