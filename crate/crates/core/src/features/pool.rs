//! Bottom-up generation of the feature pool.

use super::eval::{distance, role_dist, sum_dist, sum_role_dist, Interp, ObjSet, Rel};
use super::{Concept, Feature, FeatureError, Num, Role, Value};
use crate::pddl::{AtomId, GroundTask};
use std::collections::HashSet;
use std::sync::Arc;

pub const DEFAULT_POOL_CAP: usize = 500_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolConfig {
    /// Maximal weight of a feature (and complexity of its parts).
    pub c_max: usize,
    /// Maximal number of features, concepts or roles kept.
    pub cap: usize,
    pub distances: bool,
    pub role_distances: bool,
    pub inclusions: bool,
}

impl PoolConfig {
    pub fn new(c_max: usize) -> Self {
        PoolConfig { c_max, cap: DEFAULT_POOL_CAP, distances: true, role_distances: true, inclusions: true }
    }
}

/// A set of sample states of one task.
pub type Sample<'a> = (&'a GroundTask, &'a [Vec<AtomId>]);

struct Item<T, D> {
    expr: T,
    denot: Vec<D>,
}

struct Layer<T, D> {
    items: Vec<Item<T, D>>,
    by_complexity: Vec<Vec<usize>>,
    seen: HashSet<Vec<D>>,
}

impl<T, D: Clone + Eq + std::hash::Hash> Layer<T, D> {
    fn new() -> Self {
        Layer { items: Vec::new(), by_complexity: Vec::new(), seen: HashSet::new() }
    }

    fn push(&mut self, expr: T, complexity: usize, denot: Vec<D>, cap: usize) -> Result<(), FeatureError> {
        if self.seen.insert(denot.clone()) {
            if self.by_complexity.len() <= complexity {
                self.by_complexity.resize(complexity + 1, Vec::new());
            }
            self.by_complexity[complexity].push(self.items.len());
            self.items.push(Item { expr, denot });
            if self.items.len() > cap {
                return Err(FeatureError::PoolExplosion { cap, count: self.items.len() });
            }
        }
        Ok(())
    }

    fn of(&self, c: usize) -> Vec<usize> {
        self.by_complexity.get(c).cloned().unwrap_or_default()
    }
}

struct Ctx<'a> {
    interps: Vec<Interp<'a>>,
    /// Universe size per global state.
    sizes: Vec<usize>,
}

impl Ctx<'_> {
    fn map_c(&self, f: impl Fn(usize, usize) -> ObjSet) -> Vec<ObjSet> {
        (0..self.sizes.len()).map(|k| f(k, self.sizes[k])).collect()
    }

    fn map_r(&self, f: impl Fn(usize, usize) -> Rel) -> Vec<Rel> {
        (0..self.sizes.len()).map(|k| f(k, self.sizes[k])).collect()
    }
}

/// Generates every feature up to `c_max`, deduplicated by value vector over
/// the sample states (the cheapest representative wins) and without
/// features that are constant on all samples.
pub fn generate_pool(samples: &[Sample<'_>], config: &PoolConfig) -> Result<Vec<Feature>, FeatureError> {
    Ok(generate_pool_with_values(samples, config)?.0)
}

/// As [`generate_pool`], also returning each feature's values on the sample
/// states in order (`values[feature][state]`).
pub fn generate_pool_with_values(samples: &[Sample<'_>], config: &PoolConfig) -> Result<(Vec<Feature>, Vec<Vec<Value>>), FeatureError> {
    if config.c_max == 0 {
        return Err(FeatureError::ZeroComplexity);
    }
    let Some((task0, _)) = samples.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut interps = Vec::new();
    let mut sizes = Vec::new();
    for (task, states) in samples {
        for s in states.iter() {
            interps.push(Interp::new(task, s));
            sizes.push(task.objects.len());
        }
    }
    let ctx = Ctx { interps, sizes };
    let (concepts, roles) = grammar(&ctx, task0, config)?;
    features(&ctx, task0, &concepts, &roles, config)
}

type Grammar = (Layer<Concept, ObjSet>, Layer<Role, Rel>);

fn grammar(ctx: &Ctx, task: &GroundTask, config: &PoolConfig) -> Result<Grammar, FeatureError> {
    let cap = config.cap;
    let mut cs: Layer<Concept, ObjSet> = Layer::new();
    let mut rs: Layer<Role, Rel> = Layer::new();
    cs.push(Concept::Top, 1, ctx.map_c(|_, n| ObjSet::full(n)), cap)?;
    cs.push(Concept::Bot, 1, ctx.map_c(|_, n| ObjSet::empty(n)), cap)?;
    rs.push(Role::Univ, 1, ctx.map_r(|_, n| Rel::full(n)), cap)?;
    for (name, arity) in &task.predicates {
        let name: Arc<str> = Arc::from(name.as_str());
        for i in 0..*arity {
            let d = ctx.map_c(|k, _| ctx.interps[k].prim_concept(&name, i).expect("predicate of the sample task"));
            cs.push(Concept::Prim(name.clone(), i), 1, d, cap)?;
        }
        for i in 0..*arity {
            for j in 0..*arity {
                if i != j {
                    let d = ctx.map_r(|k, _| ctx.interps[k].prim_role(&name, i, j).expect("predicate of the sample task"));
                    rs.push(Role::Prim(name.clone(), i, j), 1, d, cap)?;
                }
            }
        }
    }
    for c in &task.constants {
        let d = ctx.map_c(|k, _| ctx.interps[k].constant(c).expect("constant of the sample task"));
        cs.push(Concept::Const(Arc::from(c.as_str())), 1, d, cap)?;
    }
    for k in 2..=config.c_max {
        let sub = k - 1;
        // concepts
        for a in cs.of(sub) {
            let d = ctx.map_c(|s, n| cs.items[a].denot[s].not(n));
            cs.push(Concept::Not(Box::new(cs.items[a].expr.clone())), k, d, cap)?;
        }
        for i in 1..sub {
            let (la, lb) = (cs.of(i), cs.of(sub - i));
            for &a in &la {
                for &b in &lb {
                    let (ea, eb) = (&cs.items[a].expr, &cs.items[b].expr);
                    let mut new = Vec::new();
                    if a < b {
                        new.push((Concept::And(Box::new(ea.clone()), Box::new(eb.clone())), ctx.map_c(|s, _| cs.items[a].denot[s].and(&cs.items[b].denot[s]))));
                        new.push((Concept::Or(Box::new(ea.clone()), Box::new(eb.clone())), ctx.map_c(|s, _| cs.items[a].denot[s].or(&cs.items[b].denot[s]))));
                    }
                    if a != b {
                        new.push((
                            Concept::Diff(Box::new(ea.clone()), Box::new(eb.clone())),
                            ctx.map_c(|s, _| cs.items[a].denot[s].diff(&cs.items[b].denot[s])),
                        ));
                    }
                    for (e, d) in new {
                        cs.push(e, k, d, cap)?;
                    }
                }
            }
            let (lr, lc) = (rs.of(i), cs.of(sub - i));
            for &r in &lr {
                for &c in &lc {
                    let (er, ec) = (rs.items[r].expr.clone(), cs.items[c].expr.clone());
                    let some = ctx.map_c(|s, n| rs.items[r].denot[s].some(&cs.items[c].denot[s], n));
                    let all = ctx.map_c(|s, n| rs.items[r].denot[s].all(&cs.items[c].denot[s], n));
                    cs.push(Concept::Some(Box::new(er.clone()), Box::new(ec.clone())), k, some, cap)?;
                    cs.push(Concept::All(Box::new(er.clone()), Box::new(ec.clone())), k, all, cap)?;
                }
            }
        }
        // roles
        for a in rs.of(sub) {
            let e = rs.items[a].expr.clone();
            let unary: [(Role, Vec<Rel>); 4] = [
                (Role::Not(Box::new(e.clone())), ctx.map_r(|s, n| rs.items[a].denot[s].not(n))),
                (Role::Inv(Box::new(e.clone())), ctx.map_r(|s, n| rs.items[a].denot[s].inv(n))),
                (Role::Plus(Box::new(e.clone())), ctx.map_r(|s, n| rs.items[a].denot[s].plus(n))),
                (Role::Star(Box::new(e)), ctx.map_r(|s, n| rs.items[a].denot[s].star(n))),
            ];
            for (e, d) in unary {
                rs.push(e, k, d, cap)?;
            }
        }
        for c in cs.of(sub) {
            let d = ctx.map_r(|s, n| Rel::id(&cs.items[c].denot[s], n));
            rs.push(Role::Id(Box::new(cs.items[c].expr.clone())), k, d, cap)?;
        }
        for i in 1..sub {
            let (la, lb) = (rs.of(i), rs.of(sub - i));
            for &a in &la {
                for &b in &lb {
                    let (ea, eb) = (&rs.items[a].expr, &rs.items[b].expr);
                    let mut new = Vec::new();
                    if a < b {
                        new.push((Role::And(Box::new(ea.clone()), Box::new(eb.clone())), ctx.map_r(|s, _| rs.items[a].denot[s].and(&rs.items[b].denot[s]))));
                        new.push((Role::Or(Box::new(ea.clone()), Box::new(eb.clone())), ctx.map_r(|s, _| rs.items[a].denot[s].or(&rs.items[b].denot[s]))));
                    }
                    new.push((Role::Comp(Box::new(ea.clone()), Box::new(eb.clone())), ctx.map_r(|s, n| rs.items[a].denot[s].comp(&rs.items[b].denot[s], n))));
                    for (e, d) in new {
                        rs.push(e, k, d, cap)?;
                    }
                }
            }
            let (lr, lc) = (rs.of(i), cs.of(sub - i));
            for &r in &lr {
                for &c in &lc {
                    let d = ctx.map_r(|s, n| rs.items[r].denot[s].restrict(&cs.items[c].denot[s], n));
                    rs.push(Role::Restrict(Box::new(rs.items[r].expr.clone()), Box::new(cs.items[c].expr.clone())), k, d, cap)?;
                }
            }
        }
    }
    Ok((cs, rs))
}

struct FeatureSink {
    features: Vec<Feature>,
    values: Vec<Vec<Value>>,
    seen: HashSet<(bool, Vec<Value>)>,
    cap: usize,
}

impl FeatureSink {
    fn push(&mut self, f: impl FnOnce() -> Feature, values: Vec<Value>) -> Result<(), FeatureError> {
        if values.windows(2).all(|w| w[0] == w[1]) {
            return Ok(());
        }
        let boolean = matches!(values.first(), Some(Value::Bool(_)));
        if self.seen.insert((boolean, values.clone())) {
            self.features.push(f());
            self.values.push(values);
            if self.features.len() > self.cap {
                return Err(FeatureError::PoolExplosion { cap: self.cap, count: self.features.len() });
            }
        }
        Ok(())
    }
}

/// Splits `w` into `parts` positive summands, in lexicographic order.
fn compositions(w: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if w >= 1 { vec![vec![w]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..w {
        for mut rest in compositions(w - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn features(
    ctx: &Ctx,
    task: &GroundTask,
    cs: &Layer<Concept, ObjSet>,
    rs: &Layer<Role, Rel>,
    config: &PoolConfig,
) -> Result<(Vec<Feature>, Vec<Vec<Value>>), FeatureError> {
    let mut sink = FeatureSink { features: Vec::new(), values: Vec::new(), seen: HashSet::new(), cap: config.cap };
    let states = 0..ctx.sizes.len();
    for w in 1..=config.c_max {
        if w == 1 {
            for (name, arity) in &task.predicates {
                if *arity == 0 {
                    let vals = states.clone().map(|k| Value::Bool(ctx.interps[k].nullary(name).expect("nullary predicate"))).collect();
                    sink.push(|| Feature::Nullary(Arc::from(name.as_str())), vals)?;
                }
            }
        }
        for c in cs.of(w) {
            let d = &cs.items[c].denot;
            sink.push(|| Feature::Empty(cs.items[c].expr.clone()), d.iter().map(|x| Value::Bool(x.is_empty())).collect())?;
        }
        for c in cs.of(w) {
            let d = &cs.items[c].denot;
            sink.push(|| Feature::Count(cs.items[c].expr.clone()), d.iter().map(|x| Value::Num(Num::Fin(x.len() as u64))).collect())?;
        }
        if config.inclusions {
            for split in compositions(w, 2) {
                let lb = cs.of(split[1]);
                for a in cs.of(split[0]) {
                    for &b in &lb {
                        if a == b {
                            continue;
                        }
                        let vals = states.clone().map(|k| Value::Bool(cs.items[a].denot[k].subset_of(&cs.items[b].denot[k]))).collect();
                        sink.push(|| Feature::CSub(cs.items[a].expr.clone(), cs.items[b].expr.clone()), vals)?;
                    }
                }
            }
            for split in compositions(w, 2) {
                let lb = rs.of(split[1]);
                for a in rs.of(split[0]) {
                    for &b in &lb {
                        if a == b {
                            continue;
                        }
                        let vals = states.clone().map(|k| Value::Bool(rs.items[a].denot[k].subset_of(&rs.items[b].denot[k]))).collect();
                        sink.push(|| Feature::RSub(rs.items[a].expr.clone(), rs.items[b].expr.clone()), vals)?;
                    }
                }
            }
        }
        if config.distances {
            for sum in [false, true] {
                for split in compositions(w, 3) {
                    let (la, lr, lb) = (cs.of(split[0]), rs.of(split[1]), cs.of(split[2]));
                    for &a in &la {
                        for &r in &lr {
                            for &b in &lb {
                                let vals = states
                                    .clone()
                                    .map(|k| {
                                        let (ca, rr, cb, n) = (&cs.items[a].denot[k], &rs.items[r].denot[k], &cs.items[b].denot[k], ctx.sizes[k]);
                                        Value::Num(if sum { sum_dist(ca, rr, cb, n) } else { distance(ca, rr, cb, n) })
                                    })
                                    .collect();
                                let (ea, er, eb) = (&cs.items[a].expr, &rs.items[r].expr, &cs.items[b].expr);
                                let f = || {
                                    if sum {
                                        Feature::SumDist(ea.clone(), er.clone(), eb.clone())
                                    } else {
                                        Feature::Dist(ea.clone(), er.clone(), eb.clone())
                                    }
                                };
                                sink.push(f, vals)?;
                            }
                        }
                    }
                }
            }
        }
        if config.role_distances {
            for sum in [false, true] {
                for split in compositions(w, 3) {
                    let (la, lb, lc) = (rs.of(split[0]), rs.of(split[1]), rs.of(split[2]));
                    for &a in &la {
                        for &b in &lb {
                            for &c in &lc {
                                let vals = states
                                    .clone()
                                    .map(|k| {
                                        let (ra, rb, rc, n) = (&rs.items[a].denot[k], &rs.items[b].denot[k], &rs.items[c].denot[k], ctx.sizes[k]);
                                        Value::Num(if sum { sum_role_dist(ra, rb, rc, n) } else { role_dist(ra, rb, rc, n) })
                                    })
                                    .collect();
                                let (ea, eb, ec) = (&rs.items[a].expr, &rs.items[b].expr, &rs.items[c].expr);
                                let f = || {
                                    if sum {
                                        Feature::SumRDist(ea.clone(), eb.clone(), ec.clone())
                                    } else {
                                        Feature::RDist(ea.clone(), eb.clone(), ec.clone())
                                    }
                                };
                                sink.push(f, vals)?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((sink.features, sink.values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_cover_all_splits() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(2, 3), Vec::<Vec<usize>>::new());
        assert_eq!(compositions(4, 3).len(), 3);
    }
}
