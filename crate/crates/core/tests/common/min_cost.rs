//! Exhaustive search for the cheapest feature subset admitting a policy.

use fondgen::deadend::{label_model, StatePartition};
use fondgen::features::{parse_feature, Change, Feature, FeatureTable, PoolConfig, Value};
use fondgen::learner::{build_theory, pool_for, solve_min_cost, Mode, TrainingInstance, Variant};
use fondgen::pddl::load_task;
use fondgen::state_space::{expand_model, Label, DEFAULT_STATE_LIMIT};
use fondgen_benchmarks::Instance;
use std::collections::HashSet;
use std::sync::Arc;

pub fn partition(inst: &Instance) -> StatePartition {
    let task = load_task(inst.domain, &inst.problem).unwrap();
    label_model(&expand_model(Arc::new(task), DEFAULT_STATE_LIMIT).unwrap())
}

pub fn training(insts: &[Instance]) -> Vec<TrainingInstance> {
    insts.iter().map(|i| TrainingInstance::new(&i.name, Arc::new(load_task(i.domain, &i.problem).unwrap()), DEFAULT_STATE_LIMIT).unwrap()).collect()
}

/// `wanted` first, then pool features from `c_max` until `size` features.
pub fn crafted_pool(parts: &[StatePartition], wanted: &[&str], c_max: usize, size: usize) -> Vec<Feature> {
    let mut pool: Vec<Feature> = wanted.iter().map(|w| parse_feature(w).unwrap()).collect();
    let training: Vec<TrainingInstance> = parts.iter().map(|p| TrainingInstance { name: String::new(), partition: p.clone() }).collect();
    for f in pool_for(&training, &PoolConfig::new(c_max)).unwrap() {
        if pool.len() == size {
            break;
        }
        if !pool.contains(&f) {
            pool.push(f);
        }
    }
    pool
}

type TSig = (Vec<bool>, Vec<u8>);

/// One sampled instance seen through a feature subset.
pub struct View {
    labels: Vec<Label>,
    /// Per alive state: per action, its outcomes.
    actions: Vec<Vec<Vec<usize>>>,
    values: Vec<Vec<Value>>,
}

impl View {
    pub fn new(p: &StatePartition, pool: &[Feature]) -> View {
        let m = &p.pruned_model;
        let labels = m.labels().unwrap().to_vec();
        let actions = (0..m.len()).map(|s| m.transitions[s].iter().map(|t| t.outcomes.clone()).collect()).collect();
        let values = FeatureTable::build(&m.task, &m.states, pool).unwrap().values;
        View { labels, actions, values }
    }

    fn sig(&self, s: usize, phi: &[usize]) -> Vec<bool> {
        phi.iter().map(|&f| self.values[s][f].boolean_view()).collect()
    }

    fn tsig(&self, s: usize, t: usize, phi: &[usize]) -> TSig {
        let delta = phi
            .iter()
            .map(|&f| match Change::between(self.values[s][f], self.values[t][f]) {
                Change::Down => 0,
                Change::Same => 1,
                Change::Up => 2,
            })
            .collect();
        (self.sig(s, phi), delta)
    }

    fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&s| self.labels[s] == Label::Alive)
    }
}

/// Whether some set of good abstract transitions over `phi` meets every
/// requirement on a learned policy, by enumeration.
pub fn feasible(views: &[View], phi: &[usize], mode: Mode) -> bool {
    let states = |pred: &dyn Fn(Label) -> bool| -> Vec<Vec<bool>> {
        views.iter().flat_map(|v| (0..v.labels.len()).filter(|&s| pred(v.labels[s])).map(|s| v.sig(s, phi)).collect::<Vec<_>>()).collect()
    };
    let disjoint = |a: &[Vec<bool>], b: &[Vec<bool>]| a.iter().all(|x| !b.contains(x));
    if !disjoint(&states(&|l| l == Label::Goal), &states(&|l| l != Label::Goal)) {
        return false;
    }
    let mut critical: HashSet<TSig> = HashSet::new();
    let mut candidates: Vec<TSig> = Vec::new();
    for v in views {
        for s in v.alive() {
            for outs in &v.actions[s] {
                for &t in outs {
                    if v.labels[t] == Label::Dead {
                        critical.insert(v.tsig(s, t, phi));
                    }
                }
            }
        }
    }
    for v in views {
        for s in v.alive() {
            for outs in &v.actions[s] {
                for &t in outs {
                    let sig = v.tsig(s, t, phi);
                    if v.labels[t] != Label::Dead {
                        if mode == Mode::Transition && critical.contains(&sig) {
                            return false;
                        }
                        if !critical.contains(&sig) && !candidates.contains(&sig) {
                            candidates.push(sig);
                        }
                    }
                }
            }
        }
    }
    if mode == Mode::State && !disjoint(&states(&|l| l == Label::Alive), &states(&|l| l == Label::Dead)) {
        return false;
    }
    assert!(candidates.len() <= 16, "oracle enumeration too large: {}", candidates.len());
    (0u32..1 << candidates.len()).any(|mask| {
        let good = |v: &View, s: usize, t: usize| {
            let sig = v.tsig(s, t, phi);
            candidates.iter().position(|c| *c == sig).is_some_and(|i| mask >> i & 1 == 1)
        };
        views.iter().all(|v| {
            let has_good_safe =
                v.alive().all(|s| v.actions[s].iter().any(|outs| outs.iter().all(|&t| v.labels[t] != Label::Dead) && outs.iter().any(|&t| good(v, s, t))));
            if !has_good_safe {
                return false;
            }
            let mut safe: Vec<bool> = v.labels.iter().map(|&l| l == Label::Goal).collect();
            loop {
                let mut changed = false;
                for s in v.alive() {
                    if !safe[s] && v.actions[s].iter().all(|outs| !outs.iter().any(|&t| good(v, s, t)) || outs.iter().any(|&t| safe[t])) {
                        safe[s] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            v.alive().all(|s| safe[s])
        })
    })
}

/// Cheapest feature subset admitting a policy, ties broken towards the
/// lexicographically smallest selection vector (false before true).
pub fn brute_force(parts: &[StatePartition], pool: &[Feature], mode: Mode) -> Option<(u64, Vec<bool>)> {
    assert!(pool.len() <= 15);
    let views: Vec<View> = parts.iter().map(|p| View::new(p, pool)).collect();
    let mut subsets: Vec<(u64, Vec<bool>)> = (0u32..1 << pool.len())
        .map(|mask| {
            let sel: Vec<bool> = (0..pool.len()).map(|f| mask >> f & 1 == 1).collect();
            let cost = (0..pool.len()).filter(|&f| sel[f]).map(|f| pool[f].weight() as u64).sum();
            (cost, sel)
        })
        .collect();
    subsets.sort();
    subsets.into_iter().find(|(_, sel)| {
        let phi: Vec<usize> = (0..sel.len()).filter(|&f| sel[f]).collect();
        feasible(&views, &phi, mode)
    })
}

pub fn check_optimal(parts: &[StatePartition], pool: &[Feature], mode: Mode) -> u64 {
    let expected = brute_force(parts, pool, mode).expect("fixture has a policy");
    for variant in [Variant::Ranked, Variant::SafeLabeled] {
        let theory = build_theory(parts, pool, variant, mode).unwrap();
        let got = solve_min_cost(&theory, None).unwrap().expect("satisfiable");
        assert_eq!((got.cost, got.select.clone()), expected, "{variant} {mode}");
    }
    expected.0
}
